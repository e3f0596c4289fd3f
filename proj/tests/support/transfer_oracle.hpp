#pragma once

// Closed-form propagation through piecewise-constant potentials, written
// independently of the library's transfer matrices.

#include <cmath>
#include <vector>

#include "revival/core.hpp"

namespace oracle {

struct M2 {
    double a, b, c, d;  // [[a, b], [c, d]] acting on (u, u')
};

inline M2 mul(const M2& x, const M2& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}

inline M2 step(double lambda, double v, double h) {
    const double k2 = lambda - v;
    if (k2 > 0) {
        const double k = std::sqrt(k2);
        return {std::cos(k * h), std::sin(k * h) / k, -k * std::sin(k * h), std::cos(k * h)};
    }
    if (k2 < 0) {
        const double k = std::sqrt(-k2);
        return {std::cosh(k * h), std::sinh(k * h) / k, k * std::sinh(k * h), std::cosh(k * h)};
    }
    return {1.0, h, 0.0, 1.0};
}

/// Fundamental matrix at x for a piecewise-constant potential.
inline M2 propagate(const revival::PiecewiseFunction& v, double lambda, double x) {
    M2 m{1, 0, 0, 1};
    for (const auto& s : v.segments()) {
        if (s.lo >= x) break;
        m = mul(step(lambda, s.coeffs[0], std::min(s.hi, x) - s.lo), m);
    }
    return m;
}

}  // namespace oracle
