#pragma once

// Domain types shared by every module: piecewise functions on the circle
// [0, 2pi), uniform grids, rational times, wave fields and the composite
// Gauss-Legendre quadrature used for every inner product in the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "revival/error.hpp"

namespace revival {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

using cplx = std::complex<double>;

/// Reduces x into [0, 2pi).
inline double wrap_period(double x) {
    double r = std::fmod(x, two_pi);
    if (r < 0.0) r += two_pi;
    if (r >= two_pi) r = 0.0;
    return r;
}

/// Polynomial of degree <= 3 on [lo, hi), written in the local coordinate
/// s = x - lo.
struct PolySegment {
    double lo = 0.0;
    double hi = two_pi;
    std::array<double, 4> coeffs{};

    double width() const { return hi - lo; }

    double value_local(double s) const {
        return ((coeffs[3] * s + coeffs[2]) * s + coeffs[1]) * s + coeffs[0];
    }
    double derivative_local(double s) const {
        return (3.0 * coeffs[3] * s + 2.0 * coeffs[2]) * s + coeffs[1];
    }
    bool is_constant() const { return coeffs[1] == 0.0 && coeffs[2] == 0.0 && coeffs[3] == 0.0; }

    /// Same polynomial re-expanded about lo + d.
    std::array<double, 4> shifted_coeffs(double d) const {
        const auto& c = coeffs;
        return {c[0] + d * (c[1] + d * (c[2] + d * c[3])),
                c[1] + d * (2.0 * c[2] + 3.0 * d * c[3]),
                c[2] + 3.0 * d * c[3],
                c[3]};
    }
};

/// Global smooth term cos_coef*cos(kx) + sin_coef*sin(kx).
struct TrigTerm {
    int k = 1;
    double cos_coef = 0.0;
    double sin_coef = 0.0;
};

/// A real 2pi-periodic function given by polynomial pieces on a tiling of
/// [0, 2pi) plus an optional trigonometric polynomial. Segments are half-open,
/// so evaluation at a breakpoint returns the right limit.
class PiecewiseFunction {
public:
    struct Bounds {
        double min;
        double max;
    };

    PiecewiseFunction() : PiecewiseFunction(std::vector<PolySegment>{PolySegment{}}) {}

    explicit PiecewiseFunction(std::vector<PolySegment> segments, std::vector<TrigTerm> trig = {})
        : segs_(std::move(segments)), trig_(std::move(trig)) {
        constexpr double snap = 1e-12;
        if (segs_.empty()) throw InvalidInput("piecewise function needs at least one segment");
        if (std::abs(segs_.front().lo) > snap)
            throw InvalidInput("first segment must start at 0");
        if (std::abs(segs_.back().hi - two_pi) > snap * two_pi)
            throw InvalidInput("last segment must end at 2*pi");
        segs_.front().lo = 0.0;
        segs_.back().hi = two_pi;
        for (std::size_t i = 0; i + 1 < segs_.size(); ++i) {
            if (std::abs(segs_[i].hi - segs_[i + 1].lo) > snap)
                throw InvalidInput("segments " + std::to_string(i) + " and " + std::to_string(i + 1) +
                                   " do not abut");
            segs_[i + 1].lo = segs_[i].hi;
        }
        for (std::size_t i = 0; i < segs_.size(); ++i) {
            if (!(segs_[i].hi > segs_[i].lo))
                throw InvalidInput("segment " + std::to_string(i) + " has non-positive width");
            for (double c : segs_[i].coeffs)
                if (!std::isfinite(c)) throw InvalidInput("non-finite polynomial coefficient");
        }
        for (const auto& t : trig_) {
            if (t.k < 1) throw InvalidInput("trigonometric terms need k >= 1");
            if (!std::isfinite(t.cos_coef) || !std::isfinite(t.sin_coef))
                throw InvalidInput("non-finite trigonometric coefficient");
        }
    }

    static PiecewiseFunction constant(double c) {
        return PiecewiseFunction({PolySegment{0.0, two_pi, {c, 0.0, 0.0, 0.0}}});
    }

    static PiecewiseFunction trigonometric(int k, double cos_coef, double sin_coef) {
        return PiecewiseFunction({PolySegment{}}, {TrigTerm{k, cos_coef, sin_coef}});
    }

    /// V = 0 on [0, pi/2), 9 on [pi/2, 2pi).
    static PiecewiseFunction section5_potential() {
        return PiecewiseFunction({PolySegment{0.0, pi / 2.0, {0.0, 0.0, 0.0, 0.0}},
                                  PolySegment{pi / 2.0, two_pi, {9.0, 0.0, 0.0, 0.0}}});
    }

    /// f = -x/2pi on [0, pi), 1 - x/2pi on [pi, 2pi).
    static PiecewiseFunction section5_sawtooth() {
        const double slope = -1.0 / two_pi;
        return PiecewiseFunction({PolySegment{0.0, pi, {0.0, slope, 0.0, 0.0}},
                                  PolySegment{pi, two_pi, {0.5, slope, 0.0, 0.0}}});
    }

    const std::vector<PolySegment>& segments() const { return segs_; }
    const std::vector<TrigTerm>& trig() const { return trig_; }
    std::size_t size() const { return segs_.size(); }

    /// Index of the segment containing wrap_period(x).
    std::size_t segment_index(double x) const {
        const double xr = wrap_period(x);
        auto it = std::upper_bound(segs_.begin(), segs_.end(), xr,
                                   [](double v, const PolySegment& s) { return v < s.lo; });
        return static_cast<std::size_t>(std::distance(segs_.begin(), it)) - 1;
    }

    double value(double x) const {
        const double xr = wrap_period(x);
        const auto& s = segs_[segment_index(xr)];
        return s.value_local(xr - s.lo) + trig_value(xr);
    }

    double derivative(double x) const {
        const double xr = wrap_period(x);
        const auto& s = segs_[segment_index(xr)];
        return s.derivative_local(xr - s.lo) + trig_derivative(xr);
    }

    /// Value inside segment i at x (x may equal segment i's hi: left limit).
    double value_in(std::size_t i, double x) const {
        const auto& s = segs_[i];
        return s.value_local(x - s.lo) + trig_value(x);
    }
    double derivative_in(std::size_t i, double x) const {
        const auto& s = segs_[i];
        return s.derivative_local(x - s.lo) + trig_derivative(x);
    }

    double left_limit(double x) const {
        const double xr = wrap_period(x);
        std::size_t i = segment_index(xr);
        if (xr == segs_[i].lo) {
            const std::size_t prev = (i == 0) ? segs_.size() - 1 : i - 1;
            return value_in(prev, segs_[prev].hi);
        }
        return value_in(i, xr);
    }

    /// Left ends of all segments (always contains 0).
    std::vector<double> breakpoints() const {
        std::vector<double> out;
        out.reserve(segs_.size());
        for (const auto& s : segs_) out.push_back(s.lo);
        return out;
    }

    /// Breakpoints where the periodic extension is discontinuous.
    std::vector<double> jump_points(double tol = 1e-12) const {
        std::vector<double> out;
        for (const auto& s : segs_)
            if (std::abs(value(s.lo) - left_limit(s.lo)) > tol) out.push_back(s.lo);
        return out;
    }

    bool is_constant_on(std::size_t i) const { return trig_.empty() && segs_[i].is_constant(); }

    double max_frequency() const {
        int k = 0;
        for (const auto& t : trig_) k = std::max(k, t.k);
        return static_cast<double>(k);
    }

    /// Coefficients v_j of f(x0 + h) = sum_j v_j h^j for x0 in segment i.
    std::vector<double> taylor(std::size_t i, double x0, int order) const {
        std::vector<double> v(static_cast<std::size_t>(order) + 1, 0.0);
        const auto c = segs_[i].shifted_coeffs(x0 - segs_[i].lo);
        for (int j = 0; j <= std::min(order, 3); ++j) v[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j)];
        for (const auto& t : trig_) {
            const double k = t.k;
            double fac = 1.0;
            for (int j = 0; j <= order; ++j) {
                const double ph = k * x0 + 0.5 * pi * j;
                v[static_cast<std::size_t>(j)] += fac * (t.cos_coef * std::cos(ph) + t.sin_coef * std::sin(ph));
                fac *= k / (j + 1);
            }
        }
        return v;
    }

    Bounds segment_bounds(std::size_t i) const {
        const auto& s = segs_[i];
        const double w = s.width();
        std::vector<double> pts{0.0, w};
        // critical points of the cubic
        const double a = 3.0 * s.coeffs[3], b = 2.0 * s.coeffs[2], c = s.coeffs[1];
        if (a != 0.0) {
            const double disc = b * b - 4.0 * a * c;
            if (disc >= 0.0) {
                const double sq = std::sqrt(disc);
                pts.push_back((-b + sq) / (2.0 * a));
                pts.push_back((-b - sq) / (2.0 * a));
            }
        } else if (b != 0.0) {
            pts.push_back(-c / b);
        }
        Bounds bd{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
        if (trig_.empty()) {
            for (double p : pts) {
                if (p < 0.0 || p > w) continue;
                const double v = s.value_local(p);
                bd.min = std::min(bd.min, v);
                bd.max = std::max(bd.max, v);
            }
            return bd;
        }
        // Sampled bound widened by a Lipschitz margin.
        double lip = 0.0;
        for (double p : {0.0, w}) lip = std::max(lip, std::abs(s.derivative_local(p)));
        if (a != 0.0) {
            const double sc = -b / (2.0 * a);
            if (sc > 0.0 && sc < w) lip = std::max(lip, std::abs(s.derivative_local(sc)));
        }
        for (const auto& t : trig_) lip += t.k * (std::abs(t.cos_coef) + std::abs(t.sin_coef));
        const int n = 64 * (1 + static_cast<int>(std::ceil(max_frequency() * w)));
        const double h = w / n;
        for (int j = 0; j <= n; ++j) {
            const double v = value_in(i, s.lo + j * h);
            bd.min = std::min(bd.min, v);
            bd.max = std::max(bd.max, v);
        }
        bd.min -= 0.5 * lip * h;
        bd.max += 0.5 * lip * h;
        return bd;
    }

    Bounds bounds() const {
        Bounds bd{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
        for (std::size_t i = 0; i < segs_.size(); ++i) {
            const auto sb = segment_bounds(i);
            bd.min = std::min(bd.min, sb.min);
            bd.max = std::max(bd.max, sb.max);
        }
        return bd;
    }

    PiecewiseFunction shifted(double c) const {
        auto segs = segs_;
        for (auto& s : segs) s.coeffs[0] += c;
        return PiecewiseFunction(std::move(segs), trig_);
    }

    PiecewiseFunction scaled(double a) const {
        auto segs = segs_;
        for (auto& s : segs)
            for (auto& c : s.coeffs) c *= a;
        auto trig = trig_;
        for (auto& t : trig) {
            t.cos_coef *= a;
            t.sin_coef *= a;
        }
        return PiecewiseFunction(std::move(segs), std::move(trig));
    }

    /// Pointwise sum on the merged breakpoint set.
    PiecewiseFunction operator+(const PiecewiseFunction& other) const {
        std::vector<double> cuts = breakpoints();
        for (double b : other.breakpoints()) cuts.push_back(b);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        std::vector<PolySegment> segs;
        for (std::size_t j = 0; j < cuts.size(); ++j) {
            const double lo = cuts[j];
            const double hi = (j + 1 < cuts.size()) ? cuts[j + 1] : two_pi;
            const auto& a = segs_[segment_index(lo)];
            const auto& b = other.segs_[other.segment_index(lo)];
            const auto ca = a.shifted_coeffs(lo - a.lo);
            const auto cb = b.shifted_coeffs(lo - b.lo);
            PolySegment s{lo, hi, {}};
            for (std::size_t k = 0; k < 4; ++k) s.coeffs[k] = ca[k] + cb[k];
            segs.push_back(s);
        }
        auto trig = trig_;
        for (const auto& t : other.trig_) {
            auto it = std::find_if(trig.begin(), trig.end(), [&](const TrigTerm& u) { return u.k == t.k; });
            if (it == trig.end()) {
                trig.push_back(t);
            } else {
                it->cos_coef += t.cos_coef;
                it->sin_coef += t.sin_coef;
            }
        }
        return PiecewiseFunction(std::move(segs), std::move(trig));
    }

private:
    double trig_value(double x) const {
        double v = 0.0;
        for (const auto& t : trig_) v += t.cos_coef * std::cos(t.k * x) + t.sin_coef * std::sin(t.k * x);
        return v;
    }
    double trig_derivative(double x) const {
        double v = 0.0;
        for (const auto& t : trig_) v += t.k * (t.sin_coef * std::cos(t.k * x) - t.cos_coef * std::sin(t.k * x));
        return v;
    }

    std::vector<PolySegment> segs_;
    std::vector<TrigTerm> trig_;
};

using Potential = PiecewiseFunction;
using InitialDatum = PiecewiseFunction;

inline double evaluate_piecewise(const PiecewiseFunction& p, double x) { return p.value(x); }

/// Complex initial data as a pair of real piecewise functions.
struct ComplexDatum {
    PiecewiseFunction re;
    std::optional<PiecewiseFunction> im;

    ComplexDatum() = default;
    ComplexDatum(PiecewiseFunction r) : re(std::move(r)) {}  // NOLINT: implicit on purpose
    ComplexDatum(PiecewiseFunction r, PiecewiseFunction i) : re(std::move(r)), im(std::move(i)) {}

    cplx value(double x) const { return {re.value(x), im ? im->value(x) : 0.0}; }

    std::vector<double> breakpoints() const {
        auto b = re.breakpoints();
        if (im) {
            auto bi = im->breakpoints();
            b.insert(b.end(), bi.begin(), bi.end());
        }
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
        return b;
    }

    std::vector<double> jump_points(double tol = 1e-12) const {
        auto b = re.jump_points(tol);
        if (im) {
            auto bi = im->jump_points(tol);
            b.insert(b.end(), bi.begin(), bi.end());
        }
        std::sort(b.begin(), b.end());
        b.erase(std::unique(b.begin(), b.end()), b.end());
        return b;
    }

    double max_frequency() const { return std::max(re.max_frequency(), im ? im->max_frequency() : 0.0); }
};

// ---------------------------------------------------------------------------
// Quadrature

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline constexpr int gauss_order = 20;

/// Composite 20-point Gauss-Legendre rule on [a, b]: one block per interval
/// between consecutive forced nodes, each split into panels no wider than
/// max_panel.
inline QuadratureRule gauss_rule(double a, double b, std::span<const double> forced = {},
                                 double max_panel = std::numeric_limits<double>::infinity()) {
    if (!(a < b)) throw InvalidInput("quadrature needs a < b");
    using gl = boost::math::quadrature::gauss<double, gauss_order>;
    const auto& xs = gl::abscissa();
    const auto& ws = gl::weights();

    std::vector<double> cuts{a};
    for (double f : forced)
        if (f > a && f < b) cuts.push_back(f);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    QuadratureRule rule;
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
        const double lo = cuts[j], hi = cuts[j + 1];
        const auto panels = static_cast<std::size_t>(
            std::max(1.0, std::ceil((hi - lo) / std::max(max_panel, 1e-300))));
        const double w = (hi - lo) / static_cast<double>(panels);
        for (std::size_t p = 0; p < panels; ++p) {
            const double pl = lo + static_cast<double>(p) * w;
            const double mid = pl + 0.5 * w, half = 0.5 * w;
            for (std::size_t i = 0; i < xs.size(); ++i) {
                rule.nodes.push_back(mid - half * xs[i]);
                rule.weights.push_back(half * ws[i]);
                rule.nodes.push_back(mid + half * xs[i]);
                rule.weights.push_back(half * ws[i]);
            }
        }
    }
    return rule;
}

/// Rule over the full period [0, 2pi].
inline QuadratureRule periodic_rule(std::span<const double> forced = {},
                                    double max_panel = std::numeric_limits<double>::infinity()) {
    return gauss_rule(0.0, two_pi, forced, max_panel);
}

/// Panel width resolving oscillations up to the given angular frequency.
inline double panel_for_frequency(double freq) { return 4.0 / std::max(1.0, freq); }

template <class F>
double integrate(F&& g, const QuadratureRule& rule) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double v = g(rule.nodes[i]);
        if (!std::isfinite(v)) throw InvalidInput("non-finite integrand at x = " + std::to_string(rule.nodes[i]));
        acc += rule.weights[i] * v;
    }
    return acc;
}

template <class F>
double quadrature(F&& g, double a, double b, std::span<const double> forced = {},
                  double max_panel = std::numeric_limits<double>::infinity()) {
    return integrate(std::forward<F>(g), gauss_rule(a, b, forced, max_panel));
}

inline std::vector<double> merge_nodes(std::initializer_list<std::vector<double>> lists) {
    std::vector<double> out;
    for (const auto& l : lists) out.insert(out.end(), l.begin(), l.end());
    for (auto& v : out) v = wrap_period(v);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline double integral(const PiecewiseFunction& f) {
    const auto bp = f.breakpoints();
    return quadrature([&](double x) { return f.value(x); }, 0.0, two_pi, bp,
                      panel_for_frequency(f.max_frequency()));
}

inline double mean_value(const PiecewiseFunction& f) { return integral(f) / two_pi; }

inline double l2_norm(const ComplexDatum& f) {
    const auto bp = f.breakpoints();
    const double s = quadrature([&](double x) { return std::norm(f.value(x)); }, 0.0, two_pi, bp,
                                panel_for_frequency(2.0 * f.max_frequency()));
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Grid, times, fields

class Grid {
public:
    explicit Grid(std::size_t n_points = 4000) : n_(n_points), dx_(two_pi / static_cast<double>(n_points)) {
        if (n_points < 2) throw InvalidInput("grid needs at least 2 points");
    }
    std::size_t size() const { return n_; }
    double dx() const { return dx_; }
    double x(std::size_t j) const { return static_cast<double>(j) * dx_; }
    std::vector<double> nodes() const {
        std::vector<double> v(n_);
        for (std::size_t j = 0; j < n_; ++j) v[j] = x(j);
        return v;
    }
    bool operator==(const Grid& o) const { return n_ == o.n_; }

private:
    std::size_t n_;
    double dx_;
};

/// t = 2pi q / r with gcd(q, r) = 1.
struct RationalTime {
    long q = 1;
    long r = 1;

    RationalTime() = default;
    RationalTime(long q_, long r_) : q(q_), r(r_) {
        if (q < 1 || r < 1) throw InvalidInput("rational time needs positive q and r");
        if (std::gcd(q, r) != 1)
            throw InvalidInput("rational time " + std::to_string(q) + "/" + std::to_string(r) + " is not reduced");
    }

    /// t = pi * a / b, reduced to the q/r form of t/(2pi).
    static RationalTime from_pi_fraction(long a, long b) {
        if (a < 1 || b < 1) throw InvalidInput("pi multiple needs positive numerator and denominator");
        long q = a, r = 2 * b;
        const long g = std::gcd(q, r);
        return RationalTime(q / g, r / g);
    }

    double value() const { return two_pi * static_cast<double>(q) / static_cast<double>(r); }
    bool operator==(const RationalTime&) const = default;
};

struct WaveField {
    Grid grid;
    std::vector<cplx> samples;
    double time = 0.0;

    WaveField() = default;
    WaveField(Grid g, std::vector<cplx> s, double t) : grid(g), samples(std::move(s)), time(t) {
        if (samples.size() != grid.size()) throw InvalidInput("wave field length does not match grid");
    }

    /// Discrete L2 norm (rectangle rule on the periodic grid).
    double l2_norm() const {
        double s = 0.0;
        for (const auto& v : samples) s += std::norm(v);
        return std::sqrt(s * grid.dx());
    }
};

inline double l2_distance(const WaveField& a, const WaveField& b) {
    if (!(a.grid == b.grid)) throw InvalidInput("wave fields live on different grids");
    double s = 0.0;
    for (std::size_t j = 0; j < a.samples.size(); ++j) s += std::norm(a.samples[j] - b.samples[j]);
    return std::sqrt(s * a.grid.dx());
}

enum class Basis { eigenfunction, fourier };

struct SpectralCoefficients {
    std::vector<cplx> values;
    Basis basis = Basis::eigenfunction;

    double energy() const {
        double s = 0.0;
        for (const auto& c : values) s += std::norm(c);
        return s;
    }
};

}  // namespace revival
