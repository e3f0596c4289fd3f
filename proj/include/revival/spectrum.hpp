#pragma once

// Eigenvalues and eigenfunctions of -psi'' + V psi = lambda psi under
// periodic, semi-periodic and Dirichlet boundary conditions.
//
// The Dirichlet ladder is found first from the monotone counting phase. The
// periodic and semi-periodic eigenvalues sit in the closed gaps that contain
// the Dirichlet eigenvalues, so each pair is searched on the arc of the
// discriminant between two neighbouring band centres, where sigma*Delta - 2
// is unimodal.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "revival/core.hpp"
#include "revival/ode.hpp"

namespace revival {

enum class Boundary { periodic, semiperiodic, dirichlet };

inline std::string to_string(Boundary bc) {
    switch (bc) {
        case Boundary::periodic: return "periodic";
        case Boundary::semiperiodic: return "semiperiodic";
        case Boundary::dirichlet: return "dirichlet";
    }
    return "unknown";
}

inline Boundary parse_boundary(const std::string& s) {
    if (s == "periodic") return Boundary::periodic;
    if (s == "semiperiodic" || s == "semi-periodic" || s == "antiperiodic") return Boundary::semiperiodic;
    if (s == "dirichlet") return Boundary::dirichlet;
    throw InvalidInput("unknown boundary condition '" + s + "'");
}

/// Delta(lambda) = phi1(2pi) + phi2'(2pi).
inline double discriminant(const Potential& v, double lambda, IntegrationOptions opts = {}) {
    const auto p = integrate_fundamental(v, lambda, two_pi, opts);
    return p.phi1 + p.dphi2;
}

struct SpectrumOptions {
    /// Half-width of the double-eigenvalue band on the extremum of sigma*Delta - 2.
    double double_tol = 1e-7;
    /// Required accuracy of the Dirichlet phase condition.
    double phase_tol = 1e-10;
    IntegrationOptions integration{};
};

struct SpectrumEntry {
    int index = 0;
    double lambda = 0.0;
    int multiplicity = 1;
    /// Reported as a double because the gap could not be resolved, not
    /// because the discriminant is exactly tangent.
    bool degenerate = false;
    /// |Delta - 2|, |Delta + 2| or |phi2(2pi)|.
    double residual = 0.0;
};

struct SpectrumTable {
    Boundary bc = Boundary::periodic;
    std::vector<SpectrumEntry> entries;

    std::size_t size() const { return entries.size(); }
    double operator[](std::size_t n) const { return entries[n].lambda; }
    std::vector<double> values() const {
        std::vector<double> out;
        out.reserve(entries.size());
        for (const auto& e : entries) out.push_back(e.lambda);
        return out;
    }
};

namespace detail {

/// Root of f on [lo, hi] given endpoint values, refined to a few ulps; the
/// final bracket end with the smaller |f| is returned. An endpoint that is
/// within endpoint_tol of zero without a sign change is accepted as the root.
template <class F>
double bracketed_root(F&& f, double lo, double hi, double flo, double fhi, int index, double endpoint_tol) {
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) {
        if (std::abs(flo) <= endpoint_tol && std::abs(flo) <= std::abs(fhi)) return lo;
        if (std::abs(fhi) <= endpoint_tol) return hi;
        throw BracketError("no sign change in eigenvalue bracket [" + std::to_string(lo) + ", " +
                               std::to_string(hi) + "]",
                           index);
    }
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                                     boost::math::tools::eps_tolerance<double>(), iters);
    if (r.first == r.second) return r.first;
    return std::abs(f(r.first)) <= std::abs(f(r.second)) ? r.first : r.second;
}

}  // namespace detail

/// Dirichlet eigenvalue Lambda_n from dirichlet_phase = (n+1) pi.
inline double dirichlet_eigenvalue(const Potential& v, int n, const SpectrumOptions& opts = {}) {
    if (n < 0) throw InvalidInput("eigenvalue index must be non-negative");
    const auto b = v.bounds();
    const double base = std::pow(0.5 * (n + 1), 2);
    const double target = (n + 1) * pi;
    auto f = [&](double lambda) { return dirichlet_phase(v, lambda, opts.integration) - target; };
    const double lo = b.min + base, hi = b.max + base;
    if (hi <= lo) return lo;  // constant potential: comparison is an equality
    const double r = detail::bracketed_root(f, lo, hi, f(lo), f(hi), n, opts.phase_tol);
    // Where the solution tunnels through a classically forbidden stretch the
    // phase can move by far more than phase_tol per ulp of lambda; there the
    // root is accepted once the bracket has collapsed to a few ulps.
    const double ulp_step = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(r));
    if (std::abs(f(r)) > opts.phase_tol) {
        const double fl = f(r - ulp_step), fh = f(r + ulp_step);
        if ((fl > 0.0) == (fh > 0.0))
            throw InconsistentEigenvalue("Dirichlet phase condition not met for index " + std::to_string(n));
    }
    return r;
}

namespace detail {

/// Balancing for the 2x2 boundary problems: columns scale by diag(1, s),
/// derivative rows by 1/s, with s = max(1, sqrt|lambda|).
inline double balance_scale(double lambda) { return std::max(1.0, std::sqrt(std::abs(lambda))); }

struct PencilStep {
    Eigen::Vector2d delta;    // lambda shifts to the two nearby eigenvalues
    Eigen::Matrix2d vectors;  // matching coefficient vectors (columns), unscaled
    bool real = true;
};

/// Linearised monodromy condition (M(l) - sigma I + d M'(l)) c = 0 at l.
inline PencilStep pencil_step(const Potential& v, double sigma, double lambda, const IntegrationOptions& io) {
    const double s = balance_scale(lambda);
    const Eigen::Matrix2d col = Eigen::Vector2d(1.0, s).asDiagonal();
    const Eigen::Matrix2d row = Eigen::Vector2d(1.0, 1.0 / s).asDiagonal();
    const double h = 1e-3 * s;
    auto mono = [&](double l) { return Trajectory(v, l, two_pi, io).nodes().back().m; };
    const Mat2 m0 = mono(lambda);
    const Mat2 dm = (mono(lambda + h) - mono(lambda - h)) / (2.0 * h);
    const Eigen::Matrix2d a = row * (m0 - sigma * Eigen::Matrix2d::Identity()) * col;
    const Eigen::Matrix2d b = -(row * dm * col);
    Eigen::EigenSolver<Eigen::Matrix2d> es(b.inverse() * a);
    PencilStep st;
    const auto ev = es.eigenvalues();
    st.real = std::abs(ev(0).imag()) <= 1e-12 * (std::abs(ev(0).real()) + std::abs(ev(1).real()) + 1e-300) ||
              std::abs(ev(0).imag()) == 0.0;
    st.delta = Eigen::Vector2d(ev(0).real(), ev(1).real());
    const auto vec = es.eigenvectors();
    for (int k = 0; k < 2; ++k) {
        Eigen::Vector2d c(vec(0, k).real(), vec(1, k).real());
        if (c.norm() == 0.0) c = Eigen::Vector2d(vec(0, k).imag(), vec(1, k).imag());
        st.vectors.col(k) = col * c.normalized();
    }
    return st;
}

/// Newton iteration on the pencil for the two edges of a gap narrower than the
/// discriminant can resolve, started inside the gap. Empty when the pencil
/// has no real solutions there (a tangency within noise) or the iteration
/// leaves (lo, hi).
inline std::optional<std::pair<double, double>> refine_narrow_gap(const Potential& v, double sigma, double start,
                                                                  double lo, double hi, const SpectrumOptions& opts) {
    const auto first = pencil_step(v, sigma, start, opts.integration);
    if (!first.real) return std::nullopt;
    double edge[2];
    for (int k = 0; k < 2; ++k) {
        double l = start + first.delta(k);
        for (int it = 0; it < 40; ++it) {
            if (!(l > lo && l < hi)) return std::nullopt;
            const auto st = pencil_step(v, sigma, l, opts.integration);
            const double d = std::abs(st.delta(0)) <= std::abs(st.delta(1)) ? st.delta(0) : st.delta(1);
            l += d;
            if (std::abs(d) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(l))) break;
        }
        edge[k] = l;
    }
    return std::pair{std::min(edge[0], edge[1]), std::max(edge[0], edge[1])};
}

/// Pair of eigenvalues of sigma*Delta = 2 in the gap around the Dirichlet
/// eigenvalue `centre`, searched on [lo, hi] where sigma*Delta <= -2 at both
/// ends.
struct GapPair {
    double first;
    double second;
    bool is_double;
    bool degenerate;
};

inline GapPair gap_pair(const Potential& v, double sigma, double lo, double centre, double hi, int index,
                        const SpectrumOptions& opts) {
    auto delta = [&](double l) { return sigma * discriminant(v, l, opts.integration); };
    auto g = [&](double l) { return delta(l) - 2.0; };
    const double gc = g(centre);

    // Band centres (Delta = 0) on either side; between them g is unimodal.
    const double dlo = delta(lo), dhi = delta(hi), dc = gc + 2.0;
    const double blo = bracketed_root(delta, lo, centre, dlo, dc, index, 0.0);
    const double bhi = bracketed_root(delta, centre, hi, dc, dhi, index, 0.0);

    if (gc >= opts.double_tol) {
        const double a = bracketed_root(g, blo, centre, -2.0, gc, index, 0.0);
        const double b = bracketed_root(g, centre, bhi, gc, -2.0, index, 0.0);
        return {a, b, false, false};
    }
    auto neg = [&](double l) { return -g(l); };
    std::uintmax_t iters = 200;
    const auto mx = boost::math::tools::brent_find_minima(neg, blo, bhi, std::numeric_limits<double>::digits / 2,
                                                          iters);
    const double arg = mx.first, gmax = -mx.second;
    if (gmax < -opts.double_tol)
        throw BracketError("discriminant does not reach the eigenvalue level near " + std::to_string(centre), index);
    if (gmax >= opts.double_tol) {
        const double a = bracketed_root(g, blo, arg, -2.0, gmax, index, 0.0);
        const double b = bracketed_root(g, arg, bhi, gmax, -2.0, index, 0.0);
        return {a, b, false, false};
    }
    // Delta - 2 is quadratic across a narrow gap, so its roots carry only the
    // square root of the working precision. The monodromy pencil is linear in
    // lambda and resolves the gap edges to full precision.
    const bool tangent = std::abs(gc) <= 1e-12 * std::max(1.0, std::abs(centre));
    const auto ends = refine_narrow_gap(v, sigma, centre, blo, bhi, opts);
    if (!ends) return {centre, centre, true, !tangent};
    const auto [a, b] = *ends;
    if (b - a < opts.double_tol) {
        const double mid = 0.5 * (a + b);
        const bool exact = b - a <= 1e-12 * std::max(1.0, std::abs(mid));
        return {mid, mid, true, !exact};
    }
    return {a, b, false, false};
}

inline void push_pair(SpectrumTable& t, const GapPair& p, int index, double residual_a, double residual_b) {
    const int mult = p.is_double ? 2 : 1;
    t.entries.push_back({index, p.first, mult, p.degenerate, residual_a});
    t.entries.push_back({index + 1, p.second, mult, p.degenerate, residual_b});
}

}  // namespace detail

/// First N eigenvalues for the given boundary condition, with multiplicity.
inline SpectrumTable eigenvalues(const Potential& v, Boundary bc, int n_eigs, const SpectrumOptions& opts = {}) {
    if (n_eigs < 1) throw InvalidInput("eigenvalue count must be at least 1");
    SpectrumTable t;
    t.bc = bc;
    if (bc == Boundary::dirichlet) {
        for (int n = 0; n < n_eigs; ++n) {
            const double l = dirichlet_eigenvalue(v, n, opts);
            const double res = std::abs(integrate_fundamental(v, l, two_pi, opts.integration).phi2);
            t.entries.push_back({n, l, 1, false, res});
        }
        return t;
    }

    std::vector<double> ladder;
    for (int n = 0; n <= n_eigs + 1; ++n) ladder.push_back(dirichlet_eigenvalue(v, n, opts));
    const double min_v = v.bounds().min;
    const double sigma = bc == Boundary::periodic ? 1.0 : -1.0;
    auto residual = [&](double l) { return std::abs(discriminant(v, l, opts.integration) - 2.0 * sigma); };

    if (bc == Boundary::periodic) {
        auto g = [&](double l) { return discriminant(v, l, opts.integration) - 2.0; };
        const double l0 = detail::bracketed_root(g, min_v, ladder[0], g(min_v), g(ladder[0]), 0, opts.double_tol);
        t.entries.push_back({0, l0, 1, false, residual(l0)});
        for (int m = 0; static_cast<int>(t.entries.size()) < n_eigs; ++m) {
            const auto p = detail::gap_pair(v, sigma, ladder[2 * m], ladder[2 * m + 1], ladder[2 * m + 2], 2 * m + 1,
                                            opts);
            detail::push_pair(t, p, 2 * m + 1, residual(p.first), residual(p.second));
        }
    } else {
        for (int m = 0; static_cast<int>(t.entries.size()) < n_eigs; ++m) {
            const double lo = m == 0 ? min_v : ladder[2 * m - 1];
            const auto p = detail::gap_pair(v, sigma, lo, ladder[2 * m], ladder[2 * m + 1], 2 * m, opts);
            detail::push_pair(t, p, 2 * m, residual(p.first), residual(p.second));
        }
    }
    t.entries.resize(static_cast<std::size_t>(n_eigs));
    return t;
}

// ---------------------------------------------------------------------------
// Eigenfunctions

/// psi = c1 phi1 + c2 phi2, normalised in L2[0, 2pi], sampled on a grid.
struct Eigenpair {
    int index = 0;
    double lambda = 0.0;
    Boundary bc = Boundary::periodic;
    int multiplicity = 1;
    bool degenerate = false;
    std::shared_ptr<const Trajectory> trajectory;
    Eigen::Vector2d coef = Eigen::Vector2d::Zero();
    Grid grid;
    std::vector<double> samples;
    std::vector<double> dsamples;
    /// L2 norm measured after normalisation.
    double norm = 1.0;

    /// Value on [0, 2pi]; outside, extended periodically or antiperiodically.
    double value(double x) const { return state(x).first; }
    double derivative(double x) const { return state(x).second; }

    std::pair<double, double> state(double x) const {
        double sign = 1.0;
        if (x < 0.0 || x > two_pi) {
            const double k = std::floor(x / two_pi);
            x -= k * two_pi;
            if (bc == Boundary::semiperiodic && std::fmod(std::abs(k), 2.0) == 1.0) sign = -1.0;
        }
        const Eigen::Vector2d w = trajectory->matrix_at(x) * coef;
        return {sign * w(0), sign * w(1)};
    }

    std::vector<double> breakpoints() const { return trajectory->potential().breakpoints(); }
    double max_frequency() const { return std::sqrt(std::max(1.0, std::abs(lambda))); }
};

namespace detail {

inline QuadratureRule eigen_rule(const Potential& v, double freq) {
    return periodic_rule(v.breakpoints(), panel_for_frequency(freq));
}

inline double inner_of(const Trajectory& tr, const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                       const QuadratureRule& rule) {
    return integrate(
        [&](double x) {
            const Mat2 m = tr.matrix_at(x);
            return (m.row(0) * a).value() * (m.row(0) * b).value();
        },
        rule);
}

inline void finish(Eigenpair& ep, const QuadratureRule& rule) {
    const auto& tr = *ep.trajectory;
    const double nrm = std::sqrt(inner_of(tr, ep.coef, ep.coef, rule));
    if (!(nrm > 0.0)) throw InconsistentEigenvalue("eigenfunction vanishes identically");
    ep.coef /= nrm;
    const std::size_t n = ep.grid.size();
    ep.samples.resize(n);
    ep.dsamples.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const Eigen::Vector2d w = tr.matrix_at(ep.grid.x(j)) * ep.coef;
        ep.samples[j] = w(0);
        ep.dsamples[j] = w(1);
    }
    double peak = 0.0;
    for (double s : ep.samples) peak = std::max(peak, std::abs(s));
    for (double s : ep.samples) {
        if (std::abs(s) > 1e-10 * peak) {
            if (s < 0.0) {
                ep.coef = -ep.coef;
                for (auto& u : ep.samples) u = -u;
                for (auto& u : ep.dsamples) u = -u;
            }
            break;
        }
    }
    ep.norm = std::sqrt(inner_of(tr, ep.coef, ep.coef, rule));
}

}  // namespace detail

/// Eigenfunction(s) for one table entry. Doubles return both orthonormal
/// members of the eigenspace, indexed entry.index and entry.index + 1.
inline std::vector<Eigenpair> eigenfunction(const Potential& v, const SpectrumEntry& entry, Boundary bc,
                                            const Grid& grid, const SpectrumOptions& opts = {}) {
    auto tr = std::make_shared<const Trajectory>(v, entry.lambda, two_pi, opts.integration);
    const Mat2 m = tr->nodes().back().m;
    const double s = std::max(1.0, std::sqrt(std::abs(entry.lambda)));
    const Eigen::Matrix2d col = Eigen::Vector2d(1.0, s).asDiagonal();
    const auto rule = detail::eigen_rule(v, 2.0 * s);

    Eigenpair base;
    base.lambda = entry.lambda;
    base.bc = bc;
    base.multiplicity = entry.multiplicity;
    base.degenerate = entry.degenerate;
    base.trajectory = tr;
    base.grid = grid;

    if (entry.multiplicity == 2) {
        if (bc == Boundary::dirichlet) throw InvalidInput("Dirichlet eigenvalues are simple");
        // M = +-I on the eigenspace: phi1 and s*phi2 span it; orthonormalise.
        const Eigen::Vector2d c1(1.0, 0.0), c2(0.0, 1.0 / s);
        const double g11 = detail::inner_of(*tr, c1, c1, rule);
        const double g12 = detail::inner_of(*tr, c1, c2, rule);
        const double g22 = detail::inner_of(*tr, c2, c2, rule);
        Eigenpair a = base, b = base;
        a.index = entry.index;
        a.coef = c1 / std::sqrt(g11);
        b.index = entry.index + 1;
        b.coef = (c2 - (g12 / g11) * c1) / std::sqrt(g22 - g12 * g12 / g11);
        detail::finish(a, rule);
        detail::finish(b, rule);
        return {a, b};
    }

    // Rows are value or derivative conditions; derivative rows scale by 1/s.
    Eigen::Matrix2d bmat;
    Eigen::Matrix2d rowsc = Eigen::Matrix2d::Identity();
    if (bc == Boundary::dirichlet) {
        bmat << 1.0, 0.0, m(0, 0), m(0, 1);
    } else {
        const double sigma = bc == Boundary::periodic ? 1.0 : -1.0;
        bmat = m - sigma * Eigen::Matrix2d::Identity();
        rowsc(1, 1) = 1.0 / s;
    }
    const Eigen::Matrix2d balanced = rowsc * bmat * col;
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(balanced, Eigen::ComputeFullV);
    const auto sv = svd.singularValues();
    if (sv(1) > 1e-6 * std::max(1.0, sv(0)))
        throw InconsistentEigenvalue("boundary matrix has no null vector at lambda = " + std::to_string(entry.lambda) +
                                     " (smallest singular value " + std::to_string(sv(1)) + ")");
    Eigenpair a = base;
    a.index = entry.index;
    a.coef = col * svd.matrixV().col(1);
    if (bc == Boundary::dirichlet) a.coef(0) = 0.0;  // psi(0) = 0 holds exactly
    detail::finish(a, rule);
    return {a};
}

/// Eigenfunctions for every entry of a table, in index order.
inline std::vector<Eigenpair> eigenfunctions(const Potential& v, const SpectrumTable& table, const Grid& grid,
                                             const SpectrumOptions& opts = {}) {
    std::vector<Eigenpair> out;
    for (std::size_t n = 0; n < table.size(); ++n) {
        const auto& e = table.entries[n];
        auto eps = eigenfunction(v, e, table.bc, grid, opts);
        for (auto& ep : eps)
            if (out.size() < table.size()) out.push_back(std::move(ep));
        if (eps.size() == 2) ++n;
    }
    return out;
}

/// L2 inner product of two functions exposing value(x), breakpoints() and
/// max_frequency().
template <class F, class G>
double inner_product(const F& f, const G& g) {
    const auto nodes = merge_nodes({f.breakpoints(), g.breakpoints()});
    return quadrature([&](double x) { return f.value(x) * g.value(x); }, 0.0, two_pi, nodes,
                      panel_for_frequency(f.max_frequency() + g.max_frequency()));
}

/// Dirichlet form J(f, g) = int f' g' + V f g.
template <class F, class G>
double dirichlet_form(const Potential& v, const F& f, const G& g) {
    const auto nodes = merge_nodes({v.breakpoints(), f.breakpoints(), g.breakpoints()});
    const double freq = f.max_frequency() + g.max_frequency() + v.max_frequency();
    return quadrature([&](double x) { return f.derivative(x) * g.derivative(x) + v.value(x) * f.value(x) * g.value(x); },
                      0.0, two_pi, nodes, panel_for_frequency(freq));
}

// ---------------------------------------------------------------------------
// Roots

struct RootCount {
    int sign_changes = 0;
    int phase_count = 0;
    double spacing = 0.0;
};

/// Roots on [0, 2pi) (periodic, semi-periodic) or (0, 2pi) (Dirichlet).
/// Sign changes are counted on a sampling at least as fine as the grid and
/// at 32 points per wavelength; changes closer than two samples are merged.
/// The result is cross-checked against the lifted phase atan2(psi, psi').
inline RootCount count_roots_detailed(const Eigenpair& ep) {
    const double wavelength = two_pi / std::sqrt(std::max(1.0, std::abs(ep.lambda)));
    const double dx = std::min(ep.grid.dx(), wavelength / 32.0);
    const auto n = static_cast<std::size_t>(std::ceil(two_pi / dx));
    const double h = two_pi / static_cast<double>(n);
    std::vector<double> u(n);
    for (std::size_t j = 0; j < n; ++j) u[j] = ep.value(static_cast<double>(j) * h);
    double peak = 0.0;
    for (double s : u) peak = std::max(peak, std::abs(s));
    const double zero = 1e-12 * peak;

    // Positions of sign changes between consecutive nonzero samples.
    std::vector<double> changes;
    const bool cyclic = ep.bc != Boundary::dirichlet;
    const double wrap_sign = ep.bc == Boundary::semiperiodic ? -1.0 : 1.0;
    double prev_v = 0.0, prev_x = 0.0;
    bool have_prev = false;
    const std::size_t first = cyclic ? 0 : 1;
    for (std::size_t j = first; j < n; ++j) {
        if (std::abs(u[j]) <= zero) continue;
        const double x = static_cast<double>(j) * h;
        if (have_prev && (u[j] > 0.0) != (prev_v > 0.0)) changes.push_back(0.5 * (x + prev_x));
        prev_v = u[j];
        prev_x = x;
        have_prev = true;
    }
    if (cyclic && have_prev) {
        // close the loop through x = 2pi, which maps to the first nonzero sample
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(u[j]) <= zero) continue;
            const double x = two_pi + static_cast<double>(j) * h;
            if ((wrap_sign * u[j] > 0.0) != (prev_v > 0.0)) changes.push_back(0.5 * (x + prev_x));
            break;
        }
    }
    std::sort(changes.begin(), changes.end());
    int count = 0;
    double last = -1e300;
    for (double c : changes) {
        if (c - last > 2.0 * h) ++count;
        last = c;
    }
    if (cyclic && count > 1 && changes.front() + two_pi - changes.back() <= 2.0 * h) --count;

    // Phase count, starting from the lift of the initial angle in [0, pi);
    // flipping the sign of psi moves the angle by pi without moving roots.
    Eigen::Vector2d c = ep.coef;
    double th0 = std::atan2(c(0), c(1));
    if (th0 < 0.0) {
        th0 += pi;
        c = -c;
    }
    if (th0 >= pi) {
        th0 -= pi;
        c = -c;
    }
    const double theta = counting_phase(*ep.trajectory, c, th0);
    int phase_count;
    if (ep.bc == Boundary::dirichlet) {
        phase_count = static_cast<int>(std::lround((theta - th0) / pi)) - 1;
    } else {
        phase_count = static_cast<int>(std::lround((theta - th0) / pi));
    }
    return {count, phase_count, h};
}

inline int count_roots(const Eigenpair& ep) {
    const auto r = count_roots_detailed(ep);
    if (r.sign_changes != r.phase_count)
        throw ResolutionError("root count mismatch for index " + std::to_string(ep.index) + ": " +
                              std::to_string(r.sign_changes) + " sign changes vs " + std::to_string(r.phase_count) +
                              " from the phase");
    return r.sign_changes;
}

// ---------------------------------------------------------------------------
// Interlacing and comparison

struct InequalityCheck {
    std::string family;  // "periodic-semiperiodic", "periodic-dirichlet", ...
    std::string relation;
    int index = 0;  // position of the left-hand quantity in its own sequence
    double lhs = 0.0;
    double rhs = 0.0;
    bool strict = false;
    double margin = 0.0;  // rhs - lhs
    bool pass = true;
};

struct InterlacingReport {
    std::vector<InequalityCheck> checks;
    bool all_pass() const {
        return std::all_of(checks.begin(), checks.end(), [](const InequalityCheck& c) { return c.pass; });
    }
    const InequalityCheck* first_violation() const {
        for (const auto& c : checks)
            if (!c.pass) return &c;
        return nullptr;
    }
};

namespace detail {

struct Labelled {
    std::string name;
    int index;
    double value;
};

inline void add_check(InterlacingReport& rep, const std::string& family, const Labelled& a, const Labelled& b,
                      bool strict, double tol) {
    InequalityCheck c;
    c.family = family;
    c.relation = a.name + "_" + std::to_string(a.index) + (strict ? " < " : " <= ") + b.name + "_" +
                 std::to_string(b.index);
    c.index = a.index;
    c.lhs = a.value;
    c.rhs = b.value;
    c.strict = strict;
    c.margin = b.value - a.value;
    c.pass = strict ? (c.margin > tol) : (c.margin >= -tol);
    rep.checks.push_back(std::move(c));
}

}  // namespace detail

/// Checks the ordering chains between the three spectra:
///   l0 < m0 <= m1 < l1 <= l2 < m2 <= m3 < ...
///   l_{2k+1} <= D_{2k+1} <= l_{2k+2}
///   m_{2k} <= D_{2k} <= m_{2k+1}
///   l0 < D0 < l1 <= D1 <= l2 < D2 < ...
/// Non-strict relations pass with slack tol; strict ones need a margin above tol.
inline InterlacingReport verify_interlacing(const SpectrumTable& periodic, const SpectrumTable& semiperiodic,
                                            const SpectrumTable& dirichlet, double tol) {
    using detail::Labelled;
    const auto np = static_cast<int>(periodic.size());
    const auto ns = static_cast<int>(semiperiodic.size());
    const auto nd = static_cast<int>(dirichlet.size());
    auto L = [&](int n) { return Labelled{"lambda", n, periodic[static_cast<std::size_t>(n)]}; };
    auto M = [&](int n) { return Labelled{"mu", n, semiperiodic[static_cast<std::size_t>(n)]}; };
    auto D = [&](int n) { return Labelled{"Lambda", n, dirichlet[static_cast<std::size_t>(n)]}; };
    InterlacingReport rep;

    // periodic vs semi-periodic chain
    {
        std::vector<std::pair<Labelled, bool>> chain;  // element, strict relation to the next
        chain.push_back({L(0), true});
        for (int k = 0;; ++k) {
            if (2 * k + 1 >= ns) break;
            chain.push_back({M(2 * k), false});
            chain.push_back({M(2 * k + 1), true});
            if (2 * k + 2 >= np) break;
            chain.push_back({L(2 * k + 1), false});
            chain.push_back({L(2 * k + 2), true});
        }
        for (std::size_t i = 0; i + 1 < chain.size(); ++i)
            detail::add_check(rep, "periodic-semiperiodic", chain[i].first, chain[i + 1].first, chain[i].second, tol);
    }
    for (int m = 0; 2 * m + 2 < np && 2 * m + 1 < nd; ++m) {
        detail::add_check(rep, "periodic-dirichlet-gap", L(2 * m + 1), D(2 * m + 1), false, tol);
        detail::add_check(rep, "periodic-dirichlet-gap", D(2 * m + 1), L(2 * m + 2), false, tol);
    }
    for (int m = 0; 2 * m + 1 < ns && 2 * m < nd; ++m) {
        detail::add_check(rep, "semiperiodic-dirichlet-gap", M(2 * m), D(2 * m), false, tol);
        detail::add_check(rep, "semiperiodic-dirichlet-gap", D(2 * m), M(2 * m + 1), false, tol);
    }
    // periodic vs Dirichlet chain
    {
        std::vector<std::pair<Labelled, bool>> chain;
        for (int k = 0;; ++k) {
            if (2 * k >= np) break;
            chain.push_back({L(2 * k), true});
            if (2 * k >= nd) break;
            chain.push_back({D(2 * k), true});
            if (2 * k + 1 >= np) break;
            chain.push_back({L(2 * k + 1), false});
            if (2 * k + 1 >= nd) break;
            chain.push_back({D(2 * k + 1), false});
        }
        for (std::size_t i = 0; i + 1 < chain.size(); ++i)
            detail::add_check(rep, "periodic-dirichlet", chain[i].first, chain[i + 1].first, chain[i].second, tol);
    }
    return rep;
}

struct ComparisonReport {
    std::vector<double> base;
    std::vector<double> raised;
    std::vector<double> shift;  // raised - base
    bool pass = true;
};

/// Periodic spectra of V <= V1 are ordered entrywise.
inline ComparisonReport compare_spectra(const Potential& v, const Potential& v1, int n_eigs, double tol = 1e-8,
                                        const SpectrumOptions& opts = {}) {
    constexpr double slack = 1e-12;
    auto pts = merge_nodes({v.breakpoints(), v1.breakpoints()});
    for (int j = 0; j < 10000; ++j) pts.push_back(two_pi * (j + 0.5) / 10000.0);
    for (double x : pts) {
        if (v1.value(x) < v.value(x) - slack || v1.left_limit(x) < v.left_limit(x) - slack)
            throw OrderingError("V1 < V at x = " + std::to_string(x));
    }
    ComparisonReport rep;
    rep.base = eigenvalues(v, Boundary::periodic, n_eigs, opts).values();
    rep.raised = eigenvalues(v1, Boundary::periodic, n_eigs, opts).values();
    for (std::size_t n = 0; n < rep.base.size(); ++n) {
        rep.shift.push_back(rep.raised[n] - rep.base[n]);
        if (rep.raised[n] < rep.base[n] - tol) rep.pass = false;
    }
    return rep;
}

}  // namespace revival
