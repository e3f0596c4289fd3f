#pragma once

// Config-driven runs: JSON ingestion, the five commands with their verdicts
// and artifacts, and the run manifest.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <initializer_list>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "revival/asymptotics.hpp"
#include "revival/evolution.hpp"
#include "revival/output.hpp"
#include "revival/revival.hpp"
#include "revival/spectrum.hpp"

#ifndef REVIVAL_VERSION
#define REVIVAL_VERSION "unknown"
#endif

namespace revival::cli {

using json = nlohmann::ordered_json;

/// Invalid configuration, tagged with the offending field.
class ConfigError : public InvalidInput {
public:
    ConfigError(const std::string& field, const std::string& what)
        : InvalidInput("field '" + field + "': " + what), field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

enum class Command { spectrum, evolve, revival, asymptotics, verify };

inline std::string to_string(Command c) {
    switch (c) {
        case Command::spectrum: return "spectrum";
        case Command::evolve: return "evolve";
        case Command::revival: return "revival";
        case Command::asymptotics: return "asymptotics";
        case Command::verify: return "verify";
    }
    return "?";
}

inline Command parse_command(const std::string& s) {
    for (Command c : {Command::spectrum, Command::evolve, Command::revival, Command::asymptotics, Command::verify})
        if (to_string(c) == s) return c;
    throw ConfigError("command", "unknown command '" + s + "'");
}

struct Tolerances {
    double double_tol = 1e-7;       // band on sigma*Delta - 2 treated as a double eigenvalue
    double phase_tol = 1e-10;       // Dirichlet phase condition
    double gram_tol = 1e-6;         // |G - I| entrywise
    double interlacing_tol = 1e-7;
    double bessel_tol = 1e-8;       // sum |c_n|^2 - ||f||^2
    double unitarity_tol = 1e-9;    // change of ||u(t)|| over the listed times
    double split_tol = 1e-12;       // |u - w - psi_rev| relative to max |u|
    double jump_ratio = 0.05;       // max |jump w| / max |jump u|
    double slope_limit = -2.7;      // log-log slope of the asymptotic residuals
    double growth_limit = 1.5;      // scaled residual max, upper half-window over lower
    double fit_constant = 5.0;      // coefficient fits within C/m
    double phi1_doubling = 3.0;     // gap reduction per doubling of m
    double phi2_doubling = 6.0;
    int jump_core_cells = 20;
    int jump_window_cells = 40;
    int jump_min_samples = 8;
};

struct RunConfig {
    Command command = Command::verify;
    json potential_spec = {{"builtin", "section5_potential"}};
    json initial_spec = {{"builtin", "section5_sawtooth"}};
    Potential potential = Potential::section5_potential();
    ComplexDatum initial{InitialDatum::section5_sawtooth()};
    int n_eigs = 200;
    int n_points = 4000;
    std::vector<RationalTime> times{RationalTime(1, 60), RationalTime(1, 30), RationalTime(1, 20),
                                    RationalTime(1, 10)};
    bool remove_mean = true;
    int asym_m_lo = 10;
    int asym_m_hi = 100;
    int fit_m_lo = 10;
    int fit_m_hi = 40;
    std::vector<int> fundamental_m{10, 20, 40};
    Tolerances tol;
    std::string output = "out";
    bool plots = true;

    SpectrumOptions spectrum_options() const {
        SpectrumOptions o;
        o.double_tol = tol.double_tol;
        o.phase_tol = tol.phase_tol;
        return o;
    }
    JumpOptions jump_options() const { return {tol.jump_core_cells, tol.jump_window_cells, tol.jump_min_samples}; }
    Grid grid() const { return Grid(static_cast<std::size_t>(n_points)); }
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline void check_keys(const json& j, const std::string& field, std::initializer_list<const char*> allowed) {
    for (const auto& item : j.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; });
        if (!known) throw ConfigError(field.empty() ? item.key() : field + "." + item.key(), "unknown key");
    }
}

inline std::string join_field(const std::string& field, const std::string& key) {
    return field.empty() ? key : field + "." + key;
}

inline const json& require(const json& j, const std::string& field, const char* key) {
    if (!j.contains(key)) throw ConfigError(join_field(field, key), "missing");
    return j.at(key);
}

inline double number(const json& j, const std::string& field) {
    if (!j.is_number()) throw ConfigError(field, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(field, "not finite");
    return v;
}

inline long integer(const json& j, const std::string& field) {
    if (!j.is_number_integer()) throw ConfigError(field, "expected an integer");
    return j.get<long>();
}

inline bool boolean(const json& j, const std::string& field) {
    if (!j.is_boolean()) throw ConfigError(field, "expected true or false");
    return j.get<bool>();
}

}  // namespace detail

/// {"segments": [{"lo", "hi", "coeffs"}], "fourier": [{"k", "cos", "sin"}]}
/// or {"builtin": name}.
inline PiecewiseFunction parse_piecewise(const json& j, const std::string& field) {
    using namespace detail;
    if (!j.is_object()) throw ConfigError(field, "expected an object");
    if (j.contains("builtin")) {
        check_keys(j, field, {"builtin"});
        const auto& b = j.at("builtin");
        if (!b.is_string()) throw ConfigError(field + ".builtin", "expected a string");
        const auto name = b.get<std::string>();
        if (name == "section5_potential") return PiecewiseFunction::section5_potential();
        if (name == "section5_sawtooth") return PiecewiseFunction::section5_sawtooth();
        if (name == "zero") return PiecewiseFunction::constant(0.0);
        throw ConfigError(field + ".builtin", "unknown built-in '" + name + "'");
    }
    check_keys(j, field, {"segments", "fourier"});
    if (!j.contains("segments") && !j.contains("fourier"))
        throw ConfigError(field, "needs 'builtin', 'segments' or 'fourier'");
    std::vector<PolySegment> segs;
    if (j.contains("segments")) {
        const auto& arr = j.at("segments");
        const auto f = field + ".segments";
        if (!arr.is_array() || arr.empty()) throw ConfigError(f, "expected a non-empty array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto fi = f + "[" + std::to_string(i) + "]";
            const auto& s = arr[i];
            if (!s.is_object()) throw ConfigError(fi, "expected an object");
            check_keys(s, fi, {"lo", "hi", "coeffs"});
            PolySegment seg;
            seg.lo = number(require(s, fi, "lo"), fi + ".lo");
            seg.hi = number(require(s, fi, "hi"), fi + ".hi");
            const auto& c = require(s, fi, "coeffs");
            if (!c.is_array() || c.empty() || c.size() > 4)
                throw ConfigError(fi + ".coeffs", "expected 1 to 4 polynomial coefficients");
            for (std::size_t k = 0; k < c.size(); ++k)
                seg.coeffs[k] = number(c[k], fi + ".coeffs[" + std::to_string(k) + "]");
            segs.push_back(seg);
        }
    } else {
        segs.push_back(PolySegment{});
    }
    std::vector<TrigTerm> trig;
    if (j.contains("fourier")) {
        const auto& arr = j.at("fourier");
        const auto f = field + ".fourier";
        if (!arr.is_array()) throw ConfigError(f, "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto fi = f + "[" + std::to_string(i) + "]";
            const auto& t = arr[i];
            if (!t.is_object()) throw ConfigError(fi, "expected an object");
            check_keys(t, fi, {"k", "cos", "sin"});
            TrigTerm term;
            const long k = integer(require(t, fi, "k"), fi + ".k");
            if (k < 1 || k > 100000) throw ConfigError(fi + ".k", "expected 1 <= k <= 100000");
            term.k = static_cast<int>(k);
            if (t.contains("cos")) term.cos_coef = number(t.at("cos"), fi + ".cos");
            if (t.contains("sin")) term.sin_coef = number(t.at("sin"), fi + ".sin");
            trig.push_back(term);
        }
    }
    try {
        return PiecewiseFunction(std::move(segs), std::move(trig));
    } catch (const InvalidInput& e) {
        throw ConfigError(field, e.what());
    }
}

/// A piecewise spec, or {"re": spec, "im": spec} for complex data.
inline ComplexDatum parse_datum(const json& j, const std::string& field) {
    if (j.is_object() && j.contains("re")) {
        detail::check_keys(j, field, {"re", "im"});
        auto re = parse_piecewise(j.at("re"), field + ".re");
        if (!j.contains("im")) return ComplexDatum(std::move(re));
        return ComplexDatum(std::move(re), parse_piecewise(j.at("im"), field + ".im"));
    }
    return ComplexDatum(parse_piecewise(j, field));
}

/// {"q": q, "r": r} for t = 2 pi q/r, or {"pi": [a, b]} for t = pi a/b.
inline RationalTime parse_time(const json& j, const std::string& field) {
    using namespace detail;
    if (!j.is_object()) throw ConfigError(field, "expected an object");
    try {
        if (j.contains("pi")) {
            check_keys(j, field, {"pi"});
            const auto& p = j.at("pi");
            if (!p.is_array() || p.size() != 2) throw ConfigError(field + ".pi", "expected [numerator, denominator]");
            return RationalTime::from_pi_fraction(integer(p[0], field + ".pi[0]"), integer(p[1], field + ".pi[1]"));
        }
        check_keys(j, field, {"q", "r"});
        return RationalTime(integer(require(j, field, "q"), field + ".q"), integer(require(j, field, "r"), field + ".r"));
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidInput& e) {
        throw ConfigError(field, e.what());
    }
}

inline void apply_tolerances(Tolerances& t, const json& j) {
    using namespace detail;
    const std::string f = "tolerances";
    if (!j.is_object()) throw ConfigError(f, "expected an object");
    check_keys(j, f,
               {"double_tol", "phase_tol", "gram_tol", "interlacing_tol", "bessel_tol", "unitarity_tol", "split_tol",
                "jump_ratio", "slope_limit", "growth_limit", "fit_constant", "phi1_doubling", "phi2_doubling",
                "jump_core_cells", "jump_window_cells", "jump_min_samples"});
    auto positive = [&](const char* key, double& dst) {
        if (!j.contains(key)) return;
        const double v = number(j.at(key), f + "." + key);
        if (!(v > 0.0)) throw ConfigError(f + "." + key, "must be positive");
        dst = v;
    };
    auto cells = [&](const char* key, int& dst, int min) {
        if (!j.contains(key)) return;
        const long v = integer(j.at(key), f + "." + key);
        if (v < min || v > 100000) throw ConfigError(f + "." + key, "must be at least " + std::to_string(min));
        dst = static_cast<int>(v);
    };
    positive("double_tol", t.double_tol);
    positive("phase_tol", t.phase_tol);
    positive("gram_tol", t.gram_tol);
    positive("interlacing_tol", t.interlacing_tol);
    positive("bessel_tol", t.bessel_tol);
    positive("unitarity_tol", t.unitarity_tol);
    positive("split_tol", t.split_tol);
    positive("jump_ratio", t.jump_ratio);
    if (j.contains("slope_limit")) t.slope_limit = number(j.at("slope_limit"), f + ".slope_limit");
    positive("growth_limit", t.growth_limit);
    positive("fit_constant", t.fit_constant);
    positive("phi1_doubling", t.phi1_doubling);
    positive("phi2_doubling", t.phi2_doubling);
    cells("jump_core_cells", t.jump_core_cells, 1);
    cells("jump_window_cells", t.jump_window_cells, 1);
    cells("jump_min_samples", t.jump_min_samples, 2);
}

inline void validate(const RunConfig& c) {
    if (c.n_eigs < 1) throw ConfigError("n_eigs", "must be at least 1");
    if (c.n_points < 64) throw ConfigError("n_points", "must be at least 64");
    if (c.asym_m_lo < 1 || c.asym_m_hi < c.asym_m_lo + 1)
        throw ConfigError("asymptotics", "need 1 <= m_lo < m_hi");
    if (c.fit_m_lo < 1 || c.fit_m_hi < c.fit_m_lo || c.fit_m_hi > c.asym_m_hi)
        throw ConfigError("asymptotics", "need 1 <= fit_m_lo <= fit_m_hi <= m_hi");
    for (int m : c.fundamental_m)
        if (m < 1 || m > c.asym_m_hi) throw ConfigError("asymptotics.fundamental_m", "entries must lie in [1, m_hi]");
    const bool needs_times = c.command == Command::evolve || c.command == Command::revival ||
                             c.command == Command::verify;
    if (needs_times && c.times.empty()) throw ConfigError("times", "command needs at least one time");
}

/// Config from a parsed JSON document; keys that are absent keep the
/// defaults (the two-level potential with the sawtooth datum).
inline RunConfig parse_config(const json& j) {
    using namespace detail;
    if (!j.is_object()) throw ConfigError("<root>", "expected an object");
    check_keys(j, "",
               {"command", "potential", "initial", "n_eigs", "n_points", "times", "remove_mean", "asymptotics",
                "tolerances", "output", "plots"});
    RunConfig c;
    if (j.contains("command")) {
        if (!j.at("command").is_string()) throw ConfigError("command", "expected a string");
        c.command = parse_command(j.at("command").get<std::string>());
    }
    if (j.contains("potential")) {
        c.potential = parse_piecewise(j.at("potential"), "potential");
        c.potential_spec = j.at("potential");
    }
    if (j.contains("initial")) {
        c.initial = parse_datum(j.at("initial"), "initial");
        c.initial_spec = j.at("initial");
    }
    if (j.contains("n_eigs")) {
        const long n = integer(j.at("n_eigs"), "n_eigs");
        if (n < 1 || n > 1000000) throw ConfigError("n_eigs", "must be at least 1");
        c.n_eigs = static_cast<int>(n);
    }
    if (j.contains("n_points")) {
        const long n = integer(j.at("n_points"), "n_points");
        if (n < 64 || n > 100000000) throw ConfigError("n_points", "must be at least 64");
        c.n_points = static_cast<int>(n);
    }
    if (j.contains("times")) {
        const auto& arr = j.at("times");
        if (!arr.is_array()) throw ConfigError("times", "expected an array");
        c.times.clear();
        for (std::size_t i = 0; i < arr.size(); ++i) c.times.push_back(parse_time(arr[i], "times[" + std::to_string(i) + "]"));
    }
    if (j.contains("remove_mean")) c.remove_mean = boolean(j.at("remove_mean"), "remove_mean");
    if (j.contains("asymptotics")) {
        const auto& a = j.at("asymptotics");
        const std::string f = "asymptotics";
        if (!a.is_object()) throw ConfigError(f, "expected an object");
        check_keys(a, f, {"m_lo", "m_hi", "fit_m_lo", "fit_m_hi", "fundamental_m"});
        auto get_int = [&](const char* key, int& dst) {
            if (!a.contains(key)) return;
            const long v = integer(a.at(key), f + "." + key);
            if (v < 1 || v > 100000) throw ConfigError(f + "." + key, "must lie in [1, 100000]");
            dst = static_cast<int>(v);
        };
        get_int("m_lo", c.asym_m_lo);
        get_int("m_hi", c.asym_m_hi);
        get_int("fit_m_lo", c.fit_m_lo);
        get_int("fit_m_hi", c.fit_m_hi);
        if (a.contains("fundamental_m")) {
            const auto& fm = a.at("fundamental_m");
            if (!fm.is_array()) throw ConfigError(f + ".fundamental_m", "expected an array");
            c.fundamental_m.clear();
            for (std::size_t i = 0; i < fm.size(); ++i) {
                const auto fi = f + ".fundamental_m[" + std::to_string(i) + "]";
                const long v = integer(fm[i], fi);
                if (v < 1 || v > 100000) throw ConfigError(fi, "must lie in [1, 100000]");
                c.fundamental_m.push_back(static_cast<int>(v));
            }
        }
    }
    if (j.contains("tolerances")) apply_tolerances(c.tol, j.at("tolerances"));
    if (j.contains("output")) {
        if (!j.at("output").is_string()) throw ConfigError("output", "expected a string");
        c.output = j.at("output").get<std::string>();
    }
    if (j.contains("plots")) c.plots = boolean(j.at("plots"), "plots");
    return c;
}

/// Reads and parses a config file. Syntax errors carry the line and column
/// reported by the JSON parser.
inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open config file");
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path, e.what());
    }
    return parse_config(j);
}

inline json time_json(const RationalTime& t) { return {{"q", t.q}, {"r", t.r}}; }

inline json tolerances_json(const Tolerances& t) {
    return {{"double_tol", t.double_tol},
            {"phase_tol", t.phase_tol},
            {"gram_tol", t.gram_tol},
            {"interlacing_tol", t.interlacing_tol},
            {"bessel_tol", t.bessel_tol},
            {"unitarity_tol", t.unitarity_tol},
            {"split_tol", t.split_tol},
            {"jump_ratio", t.jump_ratio},
            {"slope_limit", t.slope_limit},
            {"growth_limit", t.growth_limit},
            {"fit_constant", t.fit_constant},
            {"phi1_doubling", t.phi1_doubling},
            {"phi2_doubling", t.phi2_doubling},
            {"jump_core_cells", t.jump_core_cells},
            {"jump_window_cells", t.jump_window_cells},
            {"jump_min_samples", t.jump_min_samples}};
}

/// The effective configuration, in the same schema parse_config reads.
inline json config_json(const RunConfig& c) {
    json times = json::array();
    for (const auto& t : c.times) times.push_back(time_json(t));
    return {{"command", to_string(c.command)},
            {"potential", c.potential_spec},
            {"initial", c.initial_spec},
            {"n_eigs", c.n_eigs},
            {"n_points", c.n_points},
            {"times", times},
            {"remove_mean", c.remove_mean},
            {"asymptotics",
             {{"m_lo", c.asym_m_lo},
              {"m_hi", c.asym_m_hi},
              {"fit_m_lo", c.fit_m_lo},
              {"fit_m_hi", c.fit_m_hi},
              {"fundamental_m", c.fundamental_m}}},
            {"tolerances", tolerances_json(c.tol)},
            {"output", c.output},
            {"plots", c.plots}};
}

// ---------------------------------------------------------------------------
// Results

struct Verdict {
    std::string name;
    bool pass = false;
    double value = 0.0;
    std::string relation;  // "<=" or ">="
    double limit = 0.0;
    std::string detail;
};

inline Verdict at_most(std::string name, double value, double limit, std::string detail = {}) {
    return {std::move(name), value <= limit, value, "<=", limit, std::move(detail)};
}

inline Verdict at_least(std::string name, double value, double limit, std::string detail = {}) {
    return {std::move(name), value >= limit, value, ">=", limit, std::move(detail)};
}

struct Artifact {
    std::string name;  // relative to the output directory
    std::string content;
};

struct RunResult {
    std::vector<Verdict> verdicts;
    std::vector<Artifact> artifacts;
    json manifest;

    bool pass() const {
        return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
    }
};

namespace detail {

inline std::string time_tag(const RationalTime& t) { return "t" + std::to_string(t.q) + "_" + std::to_string(t.r); }
inline std::string time_label(const RationalTime& t) {
    return "t = 2pi*" + std::to_string(t.q) + "/" + std::to_string(t.r);
}

/// Roots of the n-th eigenfunction of each problem.
inline int expected_roots(Boundary bc, int n) {
    switch (bc) {
        case Boundary::periodic: return n == 0 ? 0 : 2 * ((n + 1) / 2);
        case Boundary::semiperiodic: return 2 * (n / 2) + 1;
        case Boundary::dirichlet: return n;
    }
    return -1;
}

inline std::vector<double> real_parts(const WaveField& u) {
    std::vector<double> v(u.samples.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = u.samples[j].real();
    return v;
}

inline std::vector<double> imag_parts(const WaveField& u) {
    std::vector<double> v(u.samples.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = u.samples[j].imag();
    return v;
}

inline json complex_json(cplx z) { return {{"re", z.real()}, {"im", z.imag()}, {"abs", std::abs(z)}}; }

inline std::string field_header(const RunConfig& c, const RationalTime& t, std::size_t n) {
    return "t=" + io::num(t.value()) + ",q=" + std::to_string(t.q) + ",r=" + std::to_string(t.r) +
           ",N=" + std::to_string(n) + ",potential_hash=" + io::content_hash(c.potential);
}

}  // namespace detail

/// Shared state of one run: the eigenbasis and expansion are built once and
/// reused by every command that needs them.
class Session {
public:
    explicit Session(RunConfig cfg) : cfg_(std::move(cfg)) {}

    const RunConfig& config() const { return cfg_; }

    const EvolutionSetup& setup() {
        if (!setup_)
            setup_ = std::make_unique<EvolutionSetup>(make_setup(cfg_.potential, cfg_.initial, cfg_.n_eigs, cfg_.grid(),
                                                                 cfg_.remove_mean, cfg_.spectrum_options()));
        return *setup_;
    }

private:
    RunConfig cfg_;
    std::unique_ptr<EvolutionSetup> setup_;
};

// ---------------------------------------------------------------------------
// Commands

/// Three spectra with root counts of every eigenfunction; verdicts on the
/// interlacing chains and the oscillation counts.
inline void run_spectrum(Session& s, RunResult& out) {
    const auto& c = s.config();
    const auto opts = c.spectrum_options();
    const Grid grid = c.grid();
    struct Part {
        SpectrumTable table;
        std::vector<RootCount> roots;
    };
    auto work = [&](Boundary bc) {
        Part p;
        p.table = eigenvalues(c.potential, bc, c.n_eigs, opts);
        const auto eps = eigenfunctions(c.potential, p.table, grid, opts);
        for (const auto& e : eps) p.roots.push_back(count_roots_detailed(e));
        return p;
    };
    const std::array<Boundary, 3> bcs{Boundary::periodic, Boundary::semiperiodic, Boundary::dirichlet};
    std::array<std::future<Part>, 3> futs;
    for (std::size_t i = 0; i < 3; ++i) futs[i] = std::async(std::launch::async, work, bcs[i]);
    std::array<Part, 3> parts;
    for (std::size_t i = 0; i < 3; ++i) parts[i] = futs[i].get();

    io::Csv csv({"bc", "n", "lambda", "multiplicity", "discriminant_residual", "root_count"});
    int mismatches = 0;
    std::string first;
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& p = parts[i];
        for (std::size_t n = 0; n < p.table.size(); ++n) {
            const auto& e = p.table.entries[n];
            const auto& r = p.roots[n];
            csv.row({to_string(bcs[i]), io::num(e.index), io::num(e.lambda), io::num(e.multiplicity),
                     io::num(e.residual), io::num(r.sign_changes)});
            const int want = detail::expected_roots(bcs[i], e.index);
            if (r.sign_changes != want || r.phase_count != want) {
                if (mismatches++ == 0)
                    first = to_string(bcs[i]) + " n=" + std::to_string(e.index) + ": " +
                            std::to_string(r.sign_changes) + " sign changes, " + std::to_string(r.phase_count) +
                            " from the phase, expected " + std::to_string(want);
            }
        }
    }
    out.artifacts.push_back({"spectrum.csv", csv.str()});

    const auto rep = verify_interlacing(parts[0].table, parts[1].table, parts[2].table, c.tol.interlacing_tol);
    int violations = 0;
    for (const auto& ch : rep.checks) violations += ch.pass ? 0 : 1;
    const auto* bad = rep.first_violation();
    out.verdicts.push_back(at_most("interlacing", violations, 0,
                                   std::to_string(rep.checks.size()) + " relations" +
                                       (bad ? ", first violation " + bad->relation : std::string())));
    out.verdicts.push_back(at_most("root counts", mismatches, 0, mismatches ? first : "all eigenfunctions"));
}

/// Orthonormality of the eigenbasis.
inline void orthonormality_verdict(Session& s, RunResult& out) {
    const auto& g = s.setup().basis->gram();
    out.verdicts.push_back(at_most("orthonormality", std::max(g.max_diagonal_defect, g.max_off_diagonal),
                                   s.config().tol.gram_tol, std::to_string(g.size) + " eigenfunctions"));
}

/// Spectral solution at each time: field CSVs, optional plots and checks of
/// Bessel's inequality and norm conservation.
inline void run_evolve(Session& s, RunResult& out) {
    const auto& c = s.config();
    const auto& setup = s.setup();
    orthonormality_verdict(s, out);
    const double excess = setup.coefficients.energy() - setup.datum_norm * setup.datum_norm;
    out.verdicts.push_back(at_most("bessel", excess, c.tol.bessel_tol, "sum |c_n|^2 - ||f||^2"));

    const auto g = gram_matrix(setup.basis->potential(), setup.basis->functions());
    auto norm_of = [&](const SpectralCoefficients& cf) {
        const Eigen::Map<const Eigen::VectorXcd> v(cf.values.data(), static_cast<Eigen::Index>(cf.values.size()));
        return std::sqrt(std::max(0.0, (v.adjoint() * g.cast<cplx>() * v).value().real()));
    };
    const double n0 = norm_of(setup.coefficients);
    const auto lambdas = setup.basis->eigenvalues();
    double drift = 0.0;
    const auto xs = setup.grid().nodes();
    for (const auto& t : c.times) {
        drift = std::max(drift, std::abs(norm_of(propagate_coefficients(setup.coefficients, lambdas, t.value())) - n0));
        const auto u = solution(setup, t.value());
        io::Csv csv({"x", "re_u", "im_u", "abs_u"});
        csv.comment(detail::field_header(c, t, setup.size()));
        for (std::size_t j = 0; j < xs.size(); ++j)
            csv.row({io::num(xs[j]), io::num(u.samples[j].real()), io::num(u.samples[j].imag()),
                     io::num(std::abs(u.samples[j]))});
        const auto tag = detail::time_tag(t);
        out.artifacts.push_back({"field_" + tag + ".csv", csv.str()});
        if (c.plots)
            out.artifacts.push_back(
                {"field_" + tag + ".svg",
                 io::svg_panels("u at " + detail::time_label(t) + ", N = " + std::to_string(setup.size()), xs,
                                {{"Re u", detail::real_parts(u), "#1f77b4"},
                                 {"Im u", detail::imag_parts(u), "#ff7f0e"}})});
    }
    out.verdicts.push_back(at_most("unitarity", drift, c.tol.unitarity_tol, "max | ||u(t)|| - ||u(0)|| |"));
}

/// Decomposition u = w + psi_rev at each time, with jump diagnostics.
inline void run_revival(Session& s, RunResult& out) {
    const auto& c = s.config();
    const auto& setup = s.setup();
    const auto jo = c.jump_options();
    orthonormality_verdict(s, out);
    std::vector<std::future<RevivalDecomposition>> futs;
    for (const auto& t : c.times)
        futs.push_back(std::async(std::launch::async, [&setup, &c, jo, t] { return revival_at(setup, c.initial, t, jo); }));
    const auto xs = setup.grid().nodes();
    const double dx = setup.grid().dx();
    const bool ratio_applies = !c.initial.jump_points().empty();
    for (std::size_t i = 0; i < c.times.size(); ++i) {
        const auto& t = c.times[i];
        const auto d = futs[i].get();
        const auto tag = detail::time_tag(t);

        double split = 0.0, umax = 0.0;
        io::Csv csv({"x", "re_u", "im_u", "re_psi", "im_psi", "re_w", "im_w"});
        csv.comment(detail::field_header(c, t, setup.size()));
        for (std::size_t j = 0; j < xs.size(); ++j) {
            const cplx u = d.u.samples[j], p = d.psi_rev.samples[j], w = d.w.samples[j];
            split = std::max(split, std::abs(u - (w + p)));
            umax = std::max(umax, std::abs(u));
            csv.row({io::num(xs[j]), io::num(u.real()), io::num(u.imag()), io::num(p.real()), io::num(p.imag()),
                     io::num(w.real()), io::num(w.imag())});
        }
        out.artifacts.push_back({"decomposition_" + tag + ".csv", csv.str()});

        // exact psi_rev jumps gathered onto the (possibly merged) candidates
        const auto exact = revival_jumps(c.initial, t, setup.mean);
        std::vector<cplx> exact_at(d.candidate_jumps.size(), cplx{0.0, 0.0});
        for (const auto& e : exact) {
            std::size_t best = 0;
            double dist = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < d.candidate_jumps.size(); ++k) {
                const double dd = std::abs(std::remainder(e.location - d.candidate_jumps[k], two_pi));
                if (dd < dist) {
                    dist = dd;
                    best = k;
                }
            }
            if (!d.candidate_jumps.empty()) exact_at[best] += e.size;
        }
        json cands = json::array();
        for (std::size_t k = 0; k < d.jump_table.size(); ++k) {
            const auto& row = d.jump_table[k];
            cands.push_back({{"x", row.x},
                             {"jump_u", detail::complex_json(row.u.jump)},
                             {"jump_psi", detail::complex_json(row.psi.jump)},
                             {"jump_psi_exact", detail::complex_json(exact_at[k])},
                             {"jump_w", detail::complex_json(row.w.jump)},
                             {"samples", {row.u.samples_left, row.u.samples_right}}});
        }
        json diag = {{"t", time_json(t)},
                     {"t_value", t.value()},
                     {"N", setup.size()},
                     {"delta", jo.core_cells * dx},
                     {"window", (jo.core_cells + jo.window_cells) * dx},
                     {"candidates", cands},
                     {"max_jump_u", d.max_jump_u},
                     {"max_jump_w", d.max_jump_w},
                     {"ratio", d.ratio},
                     {"ratio_applies", ratio_applies}};
        out.artifacts.push_back({"diagnostics_" + tag + ".json", diag.dump(2) + "\n"});
        if (c.plots)
            out.artifacts.push_back(
                {"revival_" + tag + ".svg",
                 io::svg_panels("revival decomposition at " + detail::time_label(t) + ", N = " +
                                    std::to_string(setup.size()),
                                xs,
                                {{"Re u", detail::real_parts(d.u), "#1f77b4"},
                                 {"Im u", detail::imag_parts(d.u), "#ff7f0e"},
                                 {"Re w", detail::real_parts(d.w), "#2ca02c"},
                                 {"Im w", detail::imag_parts(d.w), "#9467bd"}},
                                d.candidate_jumps)});

        const auto label = std::to_string(t.q) + "/" + std::to_string(t.r);
        out.verdicts.push_back(at_most("revival split " + label, split / std::max(1.0, umax), c.tol.split_tol,
                                       "max |u - w - psi_rev| / max(1, max |u|)"));
        // a continuous datum has no revival jumps, so the ratio compares
        // Gibbs residue with Gibbs residue and is not a verdict
        if (ratio_applies)
            out.verdicts.push_back(at_most("revival jump ratio " + label, d.ratio, c.tol.jump_ratio,
                                           "max |jump w| / max |jump u| over " +
                                               std::to_string(d.candidate_jumps.size()) + " candidates"));
    }
}

/// Eigenvalue residuals against m + A1/m, coefficient fits of the
/// eigenfunction pairs and the one-iteration fundamental solutions.
inline void run_asymptotics(Session& s, RunResult& out) {
    const auto& c = s.config();
    const auto opts = c.spectrum_options();
    const Potential v = c.remove_mean ? mean_removed(c.potential) : c.potential;
    const double a1 = mean_and_A1(v).A1;
    const int count = 2 * c.asym_m_hi + 1;
    const auto table = eigenvalues(v, Boundary::periodic, count, opts);
    const auto rep = asymptotic_residuals(table, a1);
    const Grid grid = c.grid();
    const auto eps = eigenfunctions(v, table, grid, opts);

    io::Csv csv({"m", "lambda_lo", "lambda_hi", "model", "resid_lo", "resid_hi", "scaled_lo", "scaled_hi", "alpha1",
                 "beta1", "alpha2", "beta2", "y_m"});
    double fit_worst = 0.0;
    int fit_worst_m = 0;
    for (const auto& r : rep.rows) {
        std::vector<std::string> cells{io::num(r.m),        io::num(r.lambda_lo), io::num(r.lambda_hi),
                                       io::num(r.model),    io::num(r.resid_lo),  io::num(r.resid_hi),
                                       io::num(r.scaled_lo), io::num(r.scaled_hi)};
        try {
            const auto f = fit_coefficients(eps[static_cast<std::size_t>(2 * r.m - 1)],
                                            eps[static_cast<std::size_t>(2 * r.m)], r.m);
            for (double x : {f.alpha1, f.beta1, f.alpha2, f.beta2, f.y_m}) cells.push_back(io::num(x));
            if (r.m >= c.fit_m_lo && r.m <= c.fit_m_hi) {
                const double worst = r.m * std::max({f.norm_defect1, f.norm_defect2, f.angle_offset});
                if (worst > fit_worst) {
                    fit_worst = worst;
                    fit_worst_m = r.m;
                }
            }
        } catch (const FitDegenerate&) {
            for (int k = 0; k < 5; ++k) cells.emplace_back();
            if (r.m >= c.fit_m_lo && r.m <= c.fit_m_hi) {
                fit_worst = std::numeric_limits<double>::infinity();
                fit_worst_m = r.m;
            }
        }
        csv.row(cells);
    }
    out.artifacts.push_back({"asymptotics.csv", csv.str()});

    const auto trend = residual_trend(rep, c.asym_m_lo, c.asym_m_hi);
    const int mid = (c.asym_m_lo + c.asym_m_hi) / 2;
    const auto lower = residual_trend(rep, c.asym_m_lo, mid), upper = residual_trend(rep, mid + 1, c.asym_m_hi);
    const double growth = lower.max_scaled > 0.0 ? upper.max_scaled / lower.max_scaled
                                                 : (upper.max_scaled > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    const std::string window = "m in [" + std::to_string(c.asym_m_lo) + ", " + std::to_string(c.asym_m_hi) + "]";
    // residuals at rounding level carry no trend: a slope is only demanded
    // when at least two of them stand above the floor
    const double slope = trend.points >= 2 ? trend.slope : -std::numeric_limits<double>::infinity();
    out.verdicts.push_back(at_most("asymptotic slope", slope, c.tol.slope_limit,
                                   window + ", A1 = " + io::num(a1) + ", " + std::to_string(trend.points) +
                                       " residuals above the floor"));
    out.verdicts.push_back(at_most("asymptotic boundedness", growth, c.tol.growth_limit,
                                   "max |resid| m^3 on the upper half-window over the lower; lower max " +
                                       io::num(lower.max_scaled) + ", upper max " + io::num(upper.max_scaled)));
    out.verdicts.push_back(at_most("coefficient fits", fit_worst, c.tol.fit_constant,
                                   "max m * (norm defect, angle offset) for m in [" + std::to_string(c.fit_m_lo) + ", " +
                                       std::to_string(c.fit_m_hi) + "], worst at m = " + std::to_string(fit_worst_m)));

    io::Csv fcsv({"m", "lambda", "gap_phi1", "gap_phi2"});
    std::vector<double> g1, g2;
    auto ms = c.fundamental_m;
    std::sort(ms.begin(), ms.end());
    for (int m : ms) {
        const double lam = table[static_cast<std::size_t>(2 * m)];
        const Trajectory tr(v, lam, two_pi, opts.integration);
        const auto a1s = fundamental_asymptotic(v, m, Fundamental::phi1, grid);
        const auto a2s = fundamental_asymptotic(v, m, Fundamental::phi2, grid);
        double e1 = 0.0, e2 = 0.0;
        for (std::size_t j = 0; j < grid.size(); ++j) {
            const auto p = tr.at(grid.x(j));
            e1 = std::max(e1, std::abs(p.phi1 - a1s[j]));
            e2 = std::max(e2, std::abs(p.phi2 - a2s[j]));
        }
        g1.push_back(e1);
        g2.push_back(e2);
        fcsv.row({io::num(m), io::num(lam), io::num(e1), io::num(e2)});
    }
    out.artifacts.push_back({"fundamental.csv", fcsv.str()});
    if (ms.size() >= 2) {
        // each step is a doubling of m, so the reduction factor is rescaled
        // to a per-doubling rate
        double r1 = std::numeric_limits<double>::infinity(), r2 = r1;
        for (std::size_t i = 1; i < ms.size(); ++i) {
            const double doublings = std::log2(static_cast<double>(ms[i]) / ms[i - 1]);
            if (!(doublings > 0.0)) continue;
            r1 = std::min(r1, std::pow(g1[i - 1] / g1[i], 1.0 / doublings));
            r2 = std::min(r2, std::pow(g2[i - 1] / g2[i], 1.0 / doublings));
        }
        out.verdicts.push_back(at_least("phi1 asymptotics", r1, c.tol.phi1_doubling, "min gap reduction per doubling of m"));
        out.verdicts.push_back(at_least("phi2 asymptotics", r2, c.tol.phi2_doubling, "min gap reduction per doubling of m"));
    }
}

// ---------------------------------------------------------------------------
// Execution

inline json verdicts_json(const std::vector<Verdict>& vs) {
    json arr = json::array();
    for (const auto& v : vs) {
        json o = {{"name", v.name}, {"pass", v.pass}, {"relation", v.relation}, {"limit", v.limit}};
        // non-finite values are not representable in JSON
        if (std::isfinite(v.value)) o["value"] = v.value;
        else o["value"] = v.value > 0 ? "inf" : (v.value < 0 ? "-inf" : "nan");
        o["detail"] = v.detail;
        arr.push_back(std::move(o));
    }
    return arr;
}

/// Runs the configured command. Artifacts are kept in memory; see
/// write_result.
inline RunResult execute(const RunConfig& cfg) {
    validate(cfg);
    const auto start = std::chrono::steady_clock::now();
    Session s(cfg);
    RunResult out;
    switch (cfg.command) {
        case Command::spectrum: run_spectrum(s, out); break;
        case Command::evolve: run_evolve(s, out); break;
        case Command::revival: run_revival(s, out); break;
        case Command::asymptotics: run_asymptotics(s, out); break;
        case Command::verify:
            run_spectrum(s, out);
            run_asymptotics(s, out);
            run_revival(s, out);
            break;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json files = json::array();
    for (const auto& a : out.artifacts) files.push_back(a.name);
    const auto so = cfg.spectrum_options();
    out.manifest = {{"tool", "revival"},
                    {"version", REVIVAL_VERSION},
                    {"command", to_string(cfg.command)},
                    {"config", config_json(cfg)},
                    {"potential_hash", io::content_hash(cfg.potential)},
                    {"tolerances", tolerances_json(cfg.tol)},
                    {"numerics",
                     {{"gauss_order", gauss_order},
                      {"exact_constant_segments", so.integration.exact_constant_segments}}},
                    {"wall_time_seconds", wall},
                    {"verdicts", verdicts_json(out.verdicts)},
                    {"pass", out.pass()},
                    {"artifacts", files}};
    return out;
}

/// Writes every artifact and the manifest under dir.
inline void write_result(const RunResult& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& a : r.artifacts) io::write_file(dir / a.name, a.content);
    io::write_file(dir / "manifest.json", r.manifest.dump(2) + "\n");
}

}  // namespace revival::cli
