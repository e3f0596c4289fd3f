#pragma once

// Galerkin discretisation of -d^2/dx^2 + V in a trigonometric basis, for
// piecewise-constant V. Matrix entries come from closed-form integrals of
// V cos(px) and V sin(px), so the only error is basis truncation.

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "revival/core.hpp"

namespace oracle {

enum class Family { periodic, semiperiodic, dirichlet };

class FourierOracle {
public:
    FourierOracle(const revival::PiecewiseFunction& v) : v_(v) {
        if (!v.trig().empty()) throw std::invalid_argument("oracle needs a piecewise-constant potential");
        for (const auto& s : v.segments())
            if (!s.is_constant()) throw std::invalid_argument("oracle needs a piecewise-constant potential");
    }

    /// int_0^{2pi} V cos(p x) dx
    double c(double p) const {
        double acc = 0.0;
        for (const auto& s : v_.segments()) {
            const double k = s.coeffs[0];
            acc += p == 0.0 ? k * (s.hi - s.lo) : k * (std::sin(p * s.hi) - std::sin(p * s.lo)) / p;
        }
        return acc;
    }
    /// int_0^{2pi} V sin(p x) dx
    double s(double p) const {
        double acc = 0.0;
        for (const auto& seg : v_.segments()) {
            const double k = seg.coeffs[0];
            if (p != 0.0) acc += k * (std::cos(p * seg.lo) - std::cos(p * seg.hi)) / p;
        }
        return acc;
    }

    /// Lowest `count` eigenvalues using `modes` basis functions.
    std::vector<double> eigenvalues(Family fam, int modes, int count) const {
        // basis: cos(p_j x) and sin(p_j x) with frequencies p_j
        struct Fn {
            double p;
            bool is_sin;
            double norm2;
        };
        std::vector<Fn> basis;
        const double pi = revival::pi;
        if (fam == Family::periodic) {
            basis.push_back({0.0, false, 2.0 * pi});
            for (int k = 1; static_cast<int>(basis.size()) < modes; ++k) {
                basis.push_back({static_cast<double>(k), false, pi});
                basis.push_back({static_cast<double>(k), true, pi});
            }
        } else if (fam == Family::semiperiodic) {
            for (int k = 0; static_cast<int>(basis.size()) < modes; ++k) {
                basis.push_back({k + 0.5, false, pi});
                basis.push_back({k + 0.5, true, pi});
            }
        } else {
            for (int k = 1; static_cast<int>(basis.size()) < modes; ++k) basis.push_back({0.5 * k, true, pi});
        }
        const auto n = static_cast<Eigen::Index>(basis.size());
        Eigen::MatrixXd h(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j <= i; ++j) {
                const auto& a = basis[static_cast<std::size_t>(i)];
                const auto& b = basis[static_cast<std::size_t>(j)];
                const double dm = a.p - b.p, dp = a.p + b.p;
                double e;
                if (!a.is_sin && !b.is_sin) e = 0.5 * (c(dm) + c(dp));
                else if (a.is_sin && b.is_sin) e = 0.5 * (c(dm) - c(dp));
                else if (a.is_sin) e = 0.5 * (s(dp) + s(dm));  // sin(a) cos(b)
                else e = 0.5 * (s(dp) - s(dm));                // cos(a) sin(b)
                e /= std::sqrt(a.norm2 * b.norm2);
                if (i == j) e += a.p * a.p;
                h(i, j) = e;
                h(j, i) = e;
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h, Eigen::EigenvaluesOnly);
        std::vector<double> out(static_cast<std::size_t>(count));
        for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = es.eigenvalues()(k);
        return out;
    }

private:
    revival::PiecewiseFunction v_;
};

}  // namespace oracle
