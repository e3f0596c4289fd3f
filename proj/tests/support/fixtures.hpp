#pragma once

// Shared, lazily computed data for the test suites.

#include <vector>

#include "revival/spectrum.hpp"
#include "support/fourier_oracle.hpp"

namespace fixtures {

inline constexpr int oracle_modes = 4097;

/// Lowest 20 periodic eigenvalues of the two-level potential from the
/// 4097-function Galerkin oracle.
inline const std::vector<double>& two_level_periodic_oracle() {
    static const std::vector<double> ev = oracle::FourierOracle(revival::Potential::section5_potential())
                                              .eigenvalues(oracle::Family::periodic, oracle_modes, 20);
    return ev;
}

/// Real roots of an eigenfunction on (0, 2pi) from sign changes on a fine
/// sampling, refined by bisection.
inline std::vector<double> roots_of(const revival::Eigenpair& ep, int samples = 20000) {
    std::vector<double> out;
    const double h = revival::two_pi / samples;
    double xa = h, ua = ep.value(xa);
    for (int j = 2; j < samples; ++j) {
        const double xb = j * h, ub = ep.value(xb);
        if ((ua > 0) != (ub > 0)) {
            double lo = xa, hi = xb, flo = ua;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi), fm = ep.value(mid);
                if ((fm > 0) == (flo > 0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            out.push_back(0.5 * (lo + hi));
        }
        xa = xb;
        ua = ub;
    }
    return out;
}

}  // namespace fixtures
