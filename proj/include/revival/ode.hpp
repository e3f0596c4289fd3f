#pragma once

// Integration of -u'' + V u = lambda u across the segments of a piecewise
// potential. Constant segments use the exact 2x2 transfer matrix; all other
// segments use a Taylor-series stepper whose recurrence is exact for
// polynomial and trigonometric coefficients. Pruefer phases are provided in
// two independent forms: a lifted angle read off the (u, u') trajectory, and
// direct integration of the phase equation.

#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "revival/core.hpp"

namespace revival {

/// Columns are the fundamental solutions; rows are (value, derivative).
using Mat2 = Eigen::Matrix2d;

struct FundamentalPair {
    double phi1 = 1.0;
    double dphi1 = 0.0;
    double phi2 = 0.0;
    double dphi2 = 1.0;
    double x = 0.0;
    double lambda = 0.0;

    static FundamentalPair from_matrix(const Mat2& m, double x, double lambda) {
        return {m(0, 0), m(1, 0), m(0, 1), m(1, 1), x, lambda};
    }
    double wronskian() const { return phi1 * dphi2 - dphi1 * phi2; }
    Mat2 matrix() const {
        Mat2 m;
        m << phi1, phi2, dphi1, dphi2;
        return m;
    }
};

/// Exact propagator over a width-h interval on which lambda - V = k2 is constant.
inline Mat2 constant_transfer(double k2, double h) {
    Mat2 t;
    if (std::abs(k2) * h * h < 1e-14) {
        // series through the linear case
        const double h2 = h * h;
        t << 1.0 - 0.5 * k2 * h2, h - k2 * h2 * h / 6.0, -k2 * h, 1.0 - 0.5 * k2 * h2;
    } else if (k2 > 0.0) {
        const double k = std::sqrt(k2), c = std::cos(k * h), s = std::sin(k * h);
        t << c, s / k, -k * s, c;
    } else {
        const double k = std::sqrt(-k2), c = std::cosh(k * h), s = std::sinh(k * h);
        t << c, s / k, k * s, c;
    }
    return t;
}

namespace detail {

inline constexpr int max_taylor_order = 80;

/// One Taylor step of u'' = (V - lambda) u applied to both columns of m.
/// v holds the Taylor coefficients of V about the step origin. Returns
/// nullopt when the series does not reach roundoff within max_taylor_order.
inline std::optional<Mat2> taylor_step(const std::vector<double>& v, double lambda, const Mat2& m, double h) {
    std::array<Eigen::RowVector2d, max_taylor_order + 3> a;
    a[0] = m.row(0);
    a[1] = m.row(1);
    Eigen::RowVector2d u = a[0] + a[1] * h;
    Eigen::RowVector2d du = a[1];
    double mag = a[0].cwiseAbs().maxCoeff() + a[1].cwiseAbs().maxCoeff() * std::abs(h);
    double hp = h;  // h^(n+1)
    int small_terms = 0;
    for (int n = 0; n <= max_taylor_order; ++n) {
        Eigen::RowVector2d acc = -lambda * a[static_cast<std::size_t>(n)];
        const int jmax = std::min<int>(n, static_cast<int>(v.size()) - 1);
        for (int j = 0; j <= jmax; ++j) acc += v[static_cast<std::size_t>(j)] * a[static_cast<std::size_t>(n - j)];
        const auto next = static_cast<std::size_t>(n + 2);
        a[next] = acc / static_cast<double>((n + 1) * (n + 2));
        const Eigen::RowVector2d dterm = a[next] * (static_cast<double>(n + 2) * hp);
        hp *= h;
        const Eigen::RowVector2d term = a[next] * hp;
        u += term;
        du += dterm;
        const double t = std::max(term.cwiseAbs().maxCoeff(), std::abs(h) * dterm.cwiseAbs().maxCoeff());
        mag += term.cwiseAbs().maxCoeff();
        if (t <= 1e-17 * mag) {
            if (++small_terms == 3) {
                Mat2 out;
                out.row(0) = u;
                out.row(1) = du;
                return out;
            }
        } else {
            small_terms = 0;
        }
    }
    return std::nullopt;
}

inline double nearest_lift(double angle, double ref) {
    return angle + two_pi * std::round((ref - angle) / two_pi);
}

}  // namespace detail

struct IntegrationOptions {
    /// Use exact transfer matrices on constant segments instead of stepping.
    bool exact_constant_segments = true;
};

/// Fundamental matrix of the eigenvalue ODE on [0, x_end] with dense access.
/// Nodes are stored at every step end; evaluation between nodes re-runs the
/// step from the preceding node, so any x is reached with step accuracy.
class Trajectory {
public:
    struct Node {
        double x;
        Mat2 m;
        std::size_t seg;  // segment of the step that ends at this node
    };

    Trajectory(std::shared_ptr<const Potential> potential, double lambda, double x_end = two_pi,
               IntegrationOptions opts = {})
        : v_(std::move(potential)), lambda_(lambda), x_end_(x_end), opts_(opts) {
        if (!(x_end > 0.0 && x_end <= two_pi)) throw InvalidInput("integration end must lie in (0, 2pi]");
        if (!std::isfinite(lambda)) throw InvalidInput("non-finite lambda");
        build();
    }

    Trajectory(const Potential& potential, double lambda, double x_end = two_pi, IntegrationOptions opts = {})
        : Trajectory(std::make_shared<const Potential>(potential), lambda, x_end, opts) {}

    double lambda() const { return lambda_; }
    double x_end() const { return x_end_; }
    const Potential& potential() const { return *v_; }
    std::shared_ptr<const Potential> potential_ptr() const { return v_; }
    const std::vector<Node>& nodes() const { return nodes_; }

    bool exact_on(std::size_t seg) const { return opts_.exact_constant_segments && v_->is_constant_on(seg); }

    /// Step cap 0.1 * 2pi / max(1, sqrt(max |lambda - V|, |lambda|)) on a segment.
    /// Trigonometric terms further limit the step to keep their Taylor tails short.
    double step_cap(std::size_t seg) const {
        return std::min(0.1 * two_pi / oscillation_scale(seg), 1.0 / std::max(1.0, v_->max_frequency()));
    }

    double oscillation_scale(std::size_t seg) const {
        const auto b = v_->segment_bounds(seg);
        const double w = std::max({std::abs(lambda_), std::abs(lambda_ - b.min), std::abs(lambda_ - b.max)});
        return std::max(1.0, std::sqrt(w));
    }

    Mat2 matrix_at(double x) const {
        if (x <= 0.0) return Mat2::Identity();
        if (x >= x_end_) return nodes_.back().m;
        auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x, [](double v, const Node& n) { return v < n.x; });
        const Node& from = *(it - 1);
        if (from.x == x) return from.m;
        return advance(it->seg, from.x, from.m, x - from.x);
    }

    FundamentalPair at(double x) const { return FundamentalPair::from_matrix(matrix_at(x), x, lambda_); }
    FundamentalPair end() const { return FundamentalPair::from_matrix(nodes_.back().m, x_end_, lambda_); }

private:
    Mat2 advance(std::size_t seg, double x0, const Mat2& m, double h) const {
        if (exact_on(seg)) return constant_transfer(lambda_ - v_->segments()[seg].coeffs[0], h) * m;
        const int order = v_->trig().empty() ? 3 : detail::max_taylor_order;
        auto r = detail::taylor_step(v_->taylor(seg, x0, order), lambda_, m, h);
        if (r) return *r;
        // split until the series converges
        const Mat2 mid = advance(seg, x0, m, 0.5 * h);
        return advance(seg, x0 + 0.5 * h, mid, 0.5 * h);
    }

    void build() {
        nodes_.push_back({0.0, Mat2::Identity(), 0});
        Mat2 m = Mat2::Identity();
        const auto& segs = v_->segments();
        for (std::size_t i = 0; i < segs.size() && segs[i].lo < x_end_; ++i) {
            const double b = std::min(segs[i].hi, x_end_);
            double x = segs[i].lo;
            if (exact_on(i)) {
                m = constant_transfer(lambda_ - segs[i].coeffs[0], b - x) * m;
                check(m, b);
                nodes_.push_back({b, m, i});
                continue;
            }
            const double cap = step_cap(i);
            const int order = v_->trig().empty() ? 3 : detail::max_taylor_order;
            double h = cap;
            while (x < b) {
                const bool last = (b - x) <= h * (1.0 + 1e-12);
                const double step = last ? b - x : h;
                auto r = detail::taylor_step(v_->taylor(i, x, order), lambda_, m, step);
                if (!r) {
                    h *= 0.5;
                    if (h < 1e-12 * cap) throw IntegrationError("Taylor step failed to converge", x);
                    continue;
                }
                m = *r;
                x = last ? b : x + step;
                check(m, x);
                nodes_.push_back({x, m, i});
                h = std::min(cap, 2.0 * h);
            }
        }
    }

    static void check(const Mat2& m, double x) {
        if (!m.allFinite()) throw IntegrationError("non-finite fundamental solution", x);
    }

    std::shared_ptr<const Potential> v_;
    double lambda_;
    double x_end_;
    IntegrationOptions opts_;
    std::vector<Node> nodes_;
};

inline FundamentalPair integrate_fundamental(const Potential& v, double lambda, double x_end = two_pi,
                                             IntegrationOptions opts = {}) {
    return Trajectory(v, lambda, x_end, opts).end();
}

// ---------------------------------------------------------------------------
// Phases

/// Lifted phase atan2(u, u') of u = m * coef along a trajectory, starting from
/// the lift of the initial angle closest to theta0. Zeros of u sit exactly at
/// multiples of pi and are crossed upward, for any lambda.
inline double counting_phase(const Trajectory& tr, const Eigen::Vector2d& coef, double theta0) {
    const auto& nodes = tr.nodes();
    const double lambda = tr.lambda();
    const auto& v = tr.potential();
    Eigen::Vector2d w = nodes.front().m * coef;
    double theta = detail::nearest_lift(std::atan2(w(0), w(1)), theta0);
    for (std::size_t k = 1; k < nodes.size(); ++k) {
        const double x0 = nodes[k - 1].x, x1 = nodes[k].x;
        const std::size_t seg = nodes[k].seg;
        const Eigen::Vector2d w0 = nodes[k - 1].m * coef;
        const Eigen::Vector2d w1 = nodes[k].m * coef;
        if (tr.exact_on(seg)) {
            const double k2 = lambda - v.segments()[seg].coeffs[0];
            if (k2 > 0.0) {
                const double kk = std::sqrt(k2);
                double th = detail::nearest_lift(std::atan2(kk * w0(0), w0(1)), theta);
                th += kk * (x1 - x0);
                theta = detail::nearest_lift(std::atan2(w1(0), w1(1)), th);
            } else {
                const double s = std::max(1.0, std::sqrt(-k2));
                const int nsub = std::max(1, static_cast<int>(std::ceil((x1 - x0) * s / 0.5)));
                double th = detail::nearest_lift(std::atan2(s * w0(0), w0(1)), theta);
                const double hs = (x1 - x0) / nsub;
                for (int j = 1; j <= nsub; ++j) {
                    const Eigen::Vector2d wj = constant_transfer(k2, j * hs) * w0;
                    th = detail::nearest_lift(std::atan2(s * wj(0), wj(1)), th);
                }
                theta = detail::nearest_lift(std::atan2(w1(0), w1(1)), th);
            }
        } else {
            // Per-step rotation in this scale is bounded by 0.1 * 2pi.
            const double s = tr.oscillation_scale(seg);
            double th = detail::nearest_lift(std::atan2(s * w0(0), w0(1)), theta);
            th = detail::nearest_lift(std::atan2(s * w1(0), w1(1)), th);
            theta = detail::nearest_lift(std::atan2(w1(0), w1(1)), th);
        }
    }
    return theta;
}

/// Counting phase of phi2 at 2pi; equals (n+1)pi exactly at the n-th
/// Dirichlet eigenvalue and is strictly increasing in lambda.
inline double dirichlet_phase(const Potential& v, double lambda, IntegrationOptions opts = {}) {
    Trajectory tr(v, lambda, two_pi, opts);
    return counting_phase(tr, Eigen::Vector2d(0.0, 1.0), 0.0);
}

struct PruferState {
    double theta = 0.0;
    double rho = 1.0;
    double x = 0.0;
    double lambda = 0.0;
};

namespace detail {

struct PruferRhs {
    const Potential* v;
    std::size_t seg;
    double lambda;

    void operator()(const std::array<double, 2>& s, std::array<double, 2>& ds, double x) const {
        const double d = lambda - v->value_in(seg, x);
        const double dv = v->derivative_in(seg, x);
        const double sn = std::sin(s[0]);
        ds[0] = std::sqrt(d) - dv * std::sin(2.0 * s[0]) / (4.0 * d);
        ds[1] = -dv / (2.0 * d) * sn * sn;
    }
};

}  // namespace detail

/// Pruefer phase with R = sqrt(lambda - V): R u = rho sin(theta), u' = rho cos(theta).
/// The phase equation is integrated inside each segment; at breakpoints theta
/// is re-initialised from the continuous (u, u') so the solution stays C^1.
/// Returns theta at each of the ascending sample points xs (all in [0, 2pi]).
inline std::vector<PruferState> prufer_phase_samples(const Potential& v, double lambda, double theta0,
                                                     const std::vector<double>& xs) {
    namespace odeint = boost::numeric::odeint;
    if (!(lambda > v.bounds().max)) throw DomainError("Pruefer phase needs lambda > max V");
    if (!(theta0 >= 0.0 && theta0 < pi)) throw DomainError("Pruefer phase needs 0 <= theta0 < pi");
    using state_t = std::array<double, 2>;
    auto stepper = odeint::make_controlled(1e-12, 1e-12, odeint::runge_kutta_dopri5<state_t>());
    const double dt0 = 0.05 / std::sqrt(lambda);

    std::vector<PruferState> out;
    out.reserve(xs.size());
    state_t st{theta0, 0.0};
    double x = 0.0;
    std::size_t seg = 0;
    const auto& segs = v.segments();
    for (double target : xs) {
        if (target < x || target > two_pi) throw InvalidInput("sample points must be ascending within [0, 2pi]");
        while (x < target) {
            const double b = std::min(segs[seg].hi, target);
            if (b > x) {
                detail::PruferRhs rhs{&v, seg, lambda};
                odeint::integrate_adaptive(stepper, rhs, st, x, b, std::min(dt0, b - x));
                x = b;
            }
            if (x == segs[seg].hi && seg + 1 < segs.size() && x < target) {
                const double r_old = std::sqrt(lambda - v.value_in(seg, x));
                const double r_new = std::sqrt(lambda - v.value_in(seg + 1, x));
                const double ratio = r_new / r_old;
                const double sn = std::sin(st[0]), cs = std::cos(st[0]);
                st[0] = detail::nearest_lift(std::atan2(ratio * sn, cs), st[0]);
                st[1] += 0.5 * std::log(ratio * ratio * sn * sn + cs * cs);
                ++seg;
            }
        }
        out.push_back({st[0], std::exp(st[1]), target, lambda});
    }
    return out;
}

inline PruferState prufer_phase(const Potential& v, double lambda, double theta0, double x_end = two_pi) {
    return prufer_phase_samples(v, lambda, theta0, {x_end}).front();
}

}  // namespace revival
