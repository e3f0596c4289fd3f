#pragma once

// Large-eigenvalue behaviour: the A1 coefficient, residuals of sqrt(lambda)
// against m + A1/m, one-iteration asymptotics of the fundamental solutions,
// projections of eigenfunction pairs onto cos(mx), sin(mx), and integrals
// against the oscillating Pruefer phase.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "revival/core.hpp"
#include "revival/ode.hpp"
#include "revival/spectrum.hpp"

namespace revival {

struct MeanA1 {
    double mean;
    double A1;
};

/// <V> = (1/2pi) int V and A1 = (1/4pi) int V.
inline MeanA1 mean_and_A1(const Potential& v) {
    const double total = integral(v);
    return {total / two_pi, total / (2.0 * two_pi)};
}

/// V - <V>.
inline Potential mean_removed(const Potential& v) { return v.shifted(-mean_value(v)); }

struct AsymptoticRow {
    int m = 0;
    double lambda_lo = 0.0;  // lambda_{2m-1}
    double lambda_hi = 0.0;  // lambda_{2m}
    double model = 0.0;      // m + A1/m
    double resid_lo = 0.0;
    double resid_hi = 0.0;
    double scaled_lo = 0.0;  // resid * m^3
    double scaled_hi = 0.0;

    double resid() const { return std::max(std::abs(resid_lo), std::abs(resid_hi)); }
    double scaled() const { return std::max(std::abs(scaled_lo), std::abs(scaled_hi)); }
};

struct AsymptoticReport {
    double A1 = 0.0;
    std::vector<AsymptoticRow> rows;  // rows[k].m == k + 1
};

/// Residuals sqrt(lambda) - (m + A1/m) for the pairs (lambda_{2m-1}, lambda_{2m}).
inline AsymptoticReport asymptotic_residuals(const SpectrumTable& periodic, double A1) {
    if (periodic.bc != Boundary::periodic) throw InvalidInput("asymptotic residuals need the periodic spectrum");
    AsymptoticReport rep;
    rep.A1 = A1;
    for (int m = 1; 2 * m < static_cast<int>(periodic.size()); ++m) {
        AsymptoticRow r;
        r.m = m;
        r.lambda_lo = periodic[static_cast<std::size_t>(2 * m - 1)];
        r.lambda_hi = periodic[static_cast<std::size_t>(2 * m)];
        if (r.lambda_lo < 0.0 || r.lambda_hi < 0.0)
            throw DomainError("negative eigenvalue at pair index " + std::to_string(m));
        r.model = m + A1 / m;
        r.resid_lo = std::sqrt(r.lambda_lo) - r.model;
        r.resid_hi = std::sqrt(r.lambda_hi) - r.model;
        const double m3 = std::pow(static_cast<double>(m), 3);
        r.scaled_lo = r.resid_lo * m3;
        r.scaled_hi = r.resid_hi * m3;
        rep.rows.push_back(r);
    }
    return rep;
}

struct ResidualTrend {
    double max_scaled = 0.0;  // max |resid| m^3 over the window
    double slope = -std::numeric_limits<double>::infinity();  // of log|resid| against log m
    int points = 0;           // residuals above the floor used in the fit
};

/// Window statistics over m in [m_lo, m_hi]. Residuals at or below `floor`
/// carry no trend information and are left out of the slope fit.
inline ResidualTrend residual_trend(const AsymptoticReport& rep, int m_lo, int m_hi, double floor = 1e-13) {
    ResidualTrend t;
    std::vector<double> lx, ly;
    for (const auto& r : rep.rows) {
        if (r.m < m_lo || r.m > m_hi) continue;
        t.max_scaled = std::max(t.max_scaled, r.scaled());
        if (r.resid() > floor) {
            lx.push_back(std::log(static_cast<double>(r.m)));
            ly.push_back(std::log(r.resid()));
        }
    }
    t.points = static_cast<int>(lx.size());
    if (t.points >= 2) {
        const double n = static_cast<double>(lx.size());
        const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
        const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxy += (lx[i] - mx) * (ly[i] - my);
            sxx += (lx[i] - mx) * (lx[i] - mx);
        }
        t.slope = sxy / sxx;
    }
    return t;
}

// ---------------------------------------------------------------------------
// Fundamental-solution asymptotics

enum class Fundamental { phi1, phi2 };

/// One-iteration asymptotic form of phi1 or phi2 at frequency m, sampled on
/// the grid:
///   phi1 ~ cos(mx) + (1/m) int_0^x sin(m(x-y)) cos(my) V(y) dy
///   phi2 ~ sin(mx)/m + (1/m^2) int_0^x sin(m(x-y)) sin(my) V(y) dy
/// The integral is split as sin(mx) I_c(x) - cos(mx) I_s(x) with cumulative
/// quadratures of cos(my) g(y) V(y) and sin(my) g(y) V(y).
inline std::vector<double> fundamental_asymptotic(const Potential& v, int m, Fundamental which, const Grid& grid) {
    if (m < 1) throw InvalidInput("asymptotic frequency must be at least 1");
    const double k = m;
    auto g = [&](double y) { return which == Fundamental::phi1 ? std::cos(k * y) : std::sin(k * y); };
    const auto bp = v.breakpoints();
    const double panel = panel_for_frequency(2.0 * k + v.max_frequency());
    std::vector<double> out(grid.size());
    double ic = 0.0, is = 0.0, x0 = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double x = grid.x(j);
        if (x > x0) {
            ic += quadrature([&](double y) { return std::cos(k * y) * g(y) * v.value(y); }, x0, x, bp, panel);
            is += quadrature([&](double y) { return std::sin(k * y) * g(y) * v.value(y); }, x0, x, bp, panel);
            x0 = x;
        }
        const double conv = std::sin(k * x) * ic - std::cos(k * x) * is;
        out[j] = which == Fundamental::phi1 ? std::cos(k * x) + conv / k : std::sin(k * x) / k + conv / (k * k);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Coefficient fits

struct CoefficientFit {
    int m = 0;
    double alpha1 = 0.0, beta1 = 0.0;  // psi_{2m-1}
    double alpha2 = 0.0, beta2 = 0.0;  // psi_{2m}
    double y_m = 0.0;                  // atan2(beta1, alpha1)
    double norm_defect1 = 0.0;         // |alpha^2 + beta^2 - 1|
    double norm_defect2 = 0.0;
    double angle_offset = 0.0;         // |angle(alpha2, beta2) - (y_m + pi/2)| mod pi, in [0, pi/2]
    double residual_norm = 0.0;        // max L2 norm of psi minus its (a_m, b_m) projection
};

/// (<f, a_m>, <f, b_m>) with a_m = cos(mx)/sqrt(pi), b_m = sin(mx)/sqrt(pi).
template <class F>
std::pair<double, double> fourier_projection(const F& f, int m) {
    const double k = m, c = 1.0 / std::sqrt(pi);
    const auto nodes = f.breakpoints();
    const double panel = panel_for_frequency(k + f.max_frequency());
    const double a = quadrature([&](double x) { return f.value(x) * c * std::cos(k * x); }, 0.0, two_pi, nodes, panel);
    const double b = quadrature([&](double x) { return f.value(x) * c * std::sin(k * x); }, 0.0, two_pi, nodes, panel);
    return {a, b};
}

/// The same two-dimensional projection written in the basis rotated by y:
/// (cos y a + sin y b, sin y a - cos y b).
inline std::pair<double, double> rotated_coefficients(std::pair<double, double> ab, double y) {
    const double c = std::cos(y), s = std::sin(y);
    return {c * ab.first + s * ab.second, s * ab.first - c * ab.second};
}

/// Evaluates sum of coefficient times basis function at x, standard basis.
inline double projection_value(std::pair<double, double> ab, int m, double x) {
    const double c = 1.0 / std::sqrt(pi);
    return ab.first * c * std::cos(m * x) + ab.second * c * std::sin(m * x);
}

/// Same, rotated basis.
inline double rotated_projection_value(std::pair<double, double> rot, int m, double y, double x) {
    const double c = 1.0 / std::sqrt(pi);
    const double am = c * std::cos(m * x), bm = c * std::sin(m * x);
    return rot.first * (std::cos(y) * am + std::sin(y) * bm) + rot.second * (std::sin(y) * am - std::cos(y) * bm);
}

inline CoefficientFit fit_coefficients(const Eigenpair& lo, const Eigenpair& hi, int m) {
    if (m < 1) throw InvalidInput("pair index must be at least 1");
    const auto p1 = fourier_projection(lo, m);
    const auto p2 = fourier_projection(hi, m);
    for (const auto& p : {p1, p2})
        if (std::abs(p.first) < 1e-3 && std::abs(p.second) < 1e-3)
            throw FitDegenerate("eigenfunction has no weight on frequency " + std::to_string(m));
    CoefficientFit fit;
    fit.m = m;
    fit.alpha1 = p1.first;
    fit.beta1 = p1.second;
    fit.alpha2 = p2.first;
    fit.beta2 = p2.second;
    fit.y_m = std::atan2(fit.beta1, fit.alpha1);
    const double e1 = fit.alpha1 * fit.alpha1 + fit.beta1 * fit.beta1;
    const double e2 = fit.alpha2 * fit.alpha2 + fit.beta2 * fit.beta2;
    fit.norm_defect1 = std::abs(e1 - 1.0);
    fit.norm_defect2 = std::abs(e2 - 1.0);
    double d = std::atan2(fit.beta2, fit.alpha2) - fit.y_m - 0.5 * pi;
    d = std::remainder(d, pi);
    fit.angle_offset = std::abs(d);
    const double n1 = inner_product(lo, lo), n2 = inner_product(hi, hi);
    fit.residual_norm = std::sqrt(std::max({0.0, n1 - e1, n2 - e2}));
    return fit;
}

// ---------------------------------------------------------------------------
// Oscillatory integrals

/// int_0^{2pi} f(x) sin(c theta(x, lambda)) dx with theta the Pruefer phase
/// started at 0, sampled at the quadrature nodes.
template <class F>
double oscillatory_integral(const Potential& v, const F& f, double c, double lambda) {
    const auto nodes = merge_nodes({v.breakpoints(), f.breakpoints()});
    const double freq = std::abs(c) * std::sqrt(std::max(lambda, 1.0)) + f.max_frequency();
    const auto rule = periodic_rule(nodes, panel_for_frequency(freq));
    std::vector<std::size_t> order(rule.nodes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rule.nodes[a] < rule.nodes[b]; });
    std::vector<double> xs(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) xs[i] = rule.nodes[order[i]];
    const auto states = prufer_phase_samples(v, lambda, 0.0, xs);
    double acc = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) acc += rule.weights[order[i]] * f.value(xs[i]) * std::sin(c * states[i].theta);
    return acc;
}

}  // namespace revival
