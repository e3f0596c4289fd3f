#pragma once

// Expansion of initial data in the periodic eigenbasis and exact diagonal
// time propagation.

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "revival/core.hpp"
#include "revival/spectrum.hpp"

namespace revival {

struct GramReport {
    std::size_t size = 0;
    double max_diagonal_defect = 0.0;  // max |<psi_n, psi_n> - 1|
    double max_off_diagonal = 0.0;     // max |<psi_n, psi_k>|, n != k
    double tol = 1e-6;
    bool pass = false;
};

namespace detail {

/// Column n holds psi_n at the rule nodes.
inline Eigen::MatrixXd sample_matrix(const std::vector<Eigenpair>& eigs, const std::vector<double>& nodes,
                                     std::size_t row0, std::size_t rows) {
    Eigen::MatrixXd a(rows, eigs.size());
    for (std::size_t n = 0; n < eigs.size(); ++n)
        for (std::size_t i = 0; i < rows; ++i) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n)) =
            eigs[n].value(nodes[row0 + i]);
    return a;
}

inline double top_frequency(const std::vector<Eigenpair>& eigs) {
    double f = 1.0;
    for (const auto& e : eigs) f = std::max(f, e.max_frequency());
    return f;
}

inline constexpr std::size_t gram_block = 2048;

}  // namespace detail

/// <psi_n, psi_k> for all pairs, accumulated over blocks of quadrature nodes
/// so the sample matrix never has to be held in full.
inline Eigen::MatrixXd gram_matrix(const Potential& v, const std::vector<Eigenpair>& eigs) {
    const auto rule = periodic_rule(v.breakpoints(), panel_for_frequency(2.0 * detail::top_frequency(eigs)));
    const auto n = static_cast<Eigen::Index>(eigs.size());
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t r0 = 0; r0 < rule.nodes.size(); r0 += detail::gram_block) {
        const std::size_t rows = std::min(detail::gram_block, rule.nodes.size() - r0);
        const Eigen::MatrixXd a = detail::sample_matrix(eigs, rule.nodes, r0, rows);
        const Eigen::Map<const Eigen::VectorXd> w(rule.weights.data() + r0, static_cast<Eigen::Index>(rows));
        const Eigen::MatrixXd wa = w.cwiseSqrt().asDiagonal() * a;
        g.selfadjointView<Eigen::Lower>().rankUpdate(wa.transpose());
    }
    return g.selfadjointView<Eigen::Lower>();
}

inline GramReport check_gram(const Eigen::MatrixXd& g, double tol = 1e-6) {
    GramReport rep;
    rep.size = static_cast<std::size_t>(g.rows());
    rep.tol = tol;
    for (Eigen::Index i = 0; i < g.rows(); ++i)
        for (Eigen::Index k = 0; k < g.cols(); ++k) {
            if (i == k) rep.max_diagonal_defect = std::max(rep.max_diagonal_defect, std::abs(g(i, k) - 1.0));
            else rep.max_off_diagonal = std::max(rep.max_off_diagonal, std::abs(g(i, k)));
        }
    rep.pass = rep.max_diagonal_defect <= tol && rep.max_off_diagonal <= tol;
    return rep;
}

/// Periodic eigenfunctions of one potential together with their Gram check.
class Eigenbasis {
public:
    Eigenbasis(Potential v, SpectrumTable table, std::vector<Eigenpair> eigs, double gram_tol = 1e-6)
        : v_(std::move(v)), table_(std::move(table)), eigs_(std::move(eigs)) {
        if (eigs_.empty()) throw InvalidInput("empty eigenbasis");
        for (const auto& e : eigs_)
            if (!(e.grid == eigs_.front().grid)) throw InvalidInput("eigenfunctions sampled on different grids");
        gram_ = check_gram(gram_matrix(v_, eigs_), gram_tol);
    }

    /// First n periodic eigenpairs of v sampled on grid.
    static Eigenbasis compute(const Potential& v, int n, const Grid& grid, const SpectrumOptions& opts = {},
                              double gram_tol = 1e-6) {
        auto table = revival::eigenvalues(v, Boundary::periodic, n, opts);
        auto eigs = eigenfunctions(v, table, grid, opts);
        return Eigenbasis(v, std::move(table), std::move(eigs), gram_tol);
    }

    const Potential& potential() const { return v_; }
    const SpectrumTable& table() const { return table_; }
    const std::vector<Eigenpair>& functions() const { return eigs_; }
    const Eigenpair& operator[](std::size_t n) const { return eigs_[n]; }
    std::size_t size() const { return eigs_.size(); }
    const Grid& grid() const { return eigs_.front().grid; }
    const GramReport& gram() const { return gram_; }

    std::vector<double> eigenvalues() const {
        std::vector<double> out;
        out.reserve(eigs_.size());
        for (const auto& e : eigs_) out.push_back(e.lambda);
        return out;
    }

private:
    Potential v_;
    SpectrumTable table_;
    std::vector<Eigenpair> eigs_;
    GramReport gram_;
};

struct Expansion {
    SpectralCoefficients coefficients;
    double datum_norm = 0.0;      // ||f||
    double residual_norm = 0.0;   // ||sum c_n psi_n - f|| by quadrature
};

/// c_n = <f, psi_n> for real and imaginary parts separately, together with the
/// L2 distance between f and its truncated expansion.
inline Expansion expand_with_residual(const ComplexDatum& f, const Eigenbasis& basis) {
    if (!basis.gram().pass)
        throw GramCheckError("eigenbasis failed its Gram check (diagonal " +
                             std::to_string(basis.gram().max_diagonal_defect) + ", off-diagonal " +
                             std::to_string(basis.gram().max_off_diagonal) + ")");
    const auto& eigs = basis.functions();
    const auto nodes = merge_nodes({basis.potential().breakpoints(), f.breakpoints()});
    const double freq = detail::top_frequency(eigs) + f.max_frequency();
    const auto rule = periodic_rule(nodes, panel_for_frequency(freq));
    const auto n = static_cast<Eigen::Index>(eigs.size());
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(n);
    std::vector<Eigen::MatrixXd> blocks;
    std::vector<Eigen::VectorXcd> fvals;
    double fnorm2 = 0.0;
    for (std::size_t r0 = 0; r0 < rule.nodes.size(); r0 += detail::gram_block) {
        const std::size_t rows = std::min(detail::gram_block, rule.nodes.size() - r0);
        Eigen::MatrixXd a = detail::sample_matrix(eigs, rule.nodes, r0, rows);
        Eigen::VectorXcd fw(static_cast<Eigen::Index>(rows));
        for (std::size_t i = 0; i < rows; ++i) {
            const cplx fx = f.value(rule.nodes[r0 + i]);
            if (!std::isfinite(fx.real()) || !std::isfinite(fx.imag()))
                throw InvalidInput("initial datum is not finite at x = " + std::to_string(rule.nodes[r0 + i]));
            fw(static_cast<Eigen::Index>(i)) = fx;
            fnorm2 += rule.weights[r0 + i] * std::norm(fx);
        }
        const Eigen::Map<const Eigen::VectorXd> w(rule.weights.data() + r0, static_cast<Eigen::Index>(rows));
        c += a.transpose() * (w.cast<cplx>().cwiseProduct(fw));
        blocks.push_back(std::move(a));
        fvals.push_back(std::move(fw));
    }
    double res2 = 0.0;
    std::size_t r0 = 0;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const Eigen::VectorXcd r = blocks[b].cast<cplx>() * c - fvals[b];
        for (Eigen::Index i = 0; i < r.size(); ++i) res2 += rule.weights[r0 + static_cast<std::size_t>(i)] * std::norm(r(i));
        r0 += static_cast<std::size_t>(r.size());
    }
    Expansion ex;
    ex.coefficients.basis = Basis::eigenfunction;
    ex.coefficients.values.assign(c.data(), c.data() + c.size());
    ex.datum_norm = std::sqrt(fnorm2);
    ex.residual_norm = std::sqrt(res2);
    return ex;
}

inline SpectralCoefficients expand_initial(const ComplexDatum& f, const Eigenbasis& basis) {
    return expand_with_residual(f, basis).coefficients;
}

/// c_n e^{-i lambda_n t}.
inline SpectralCoefficients propagate_coefficients(const SpectralCoefficients& c, const std::vector<double>& lambdas,
                                                   double t) {
    if (c.values.size() != lambdas.size()) throw InvalidInput("coefficient count does not match eigenvalue count");
    SpectralCoefficients out = c;
    for (std::size_t n = 0; n < lambdas.size(); ++n) out.values[n] *= std::polar(1.0, -lambdas[n] * t);
    return out;
}

struct EvolutionSetup {
    std::shared_ptr<const Eigenbasis> basis;
    SpectralCoefficients coefficients;
    bool mean_removed = false;
    double mean = 0.0;            // <V> of the potential before any removal
    double datum_norm = 0.0;
    double truncation_error = 0.0;  // ||sum c_n psi_n - f||

    std::size_t size() const { return coefficients.values.size(); }
    const Grid& grid() const { return basis->grid(); }
};

/// Eigenbasis of V (or V - <V> when remove_mean) and the expansion of f.
inline EvolutionSetup make_setup(const Potential& v, const ComplexDatum& f, int n_eigs, const Grid& grid,
                                 bool remove_mean, const SpectrumOptions& opts = {}) {
    EvolutionSetup s;
    s.mean = mean_value(v);
    s.mean_removed = remove_mean;
    s.basis = std::make_shared<const Eigenbasis>(
        Eigenbasis::compute(remove_mean ? v.shifted(-s.mean) : v, n_eigs, grid, opts));
    auto ex = expand_with_residual(f, *s.basis);
    s.coefficients = std::move(ex.coefficients);
    s.datum_norm = ex.datum_norm;
    s.truncation_error = ex.residual_norm;
    return s;
}

/// Samples of sum c_n psi_n on the basis grid.
inline WaveField synthesize(const Eigenbasis& basis, const SpectralCoefficients& c, double t) {
    if (c.values.size() != basis.size()) throw InvalidInput("coefficient count does not match eigenbasis size");
    const Grid& g = basis.grid();
    std::vector<cplx> u(g.size(), cplx{0.0, 0.0});
    for (std::size_t n = 0; n < basis.size(); ++n) {
        const cplx cn = c.values[n];
        const auto& s = basis[n].samples;
        for (std::size_t j = 0; j < u.size(); ++j) u[j] += cn * s[j];
    }
    return WaveField(g, std::move(u), t);
}

/// u_N(t, x) = sum c_n e^{-i lambda_n t} psi_n(x) for the basis potential
/// (no gauge factor).
inline WaveField evolve(const EvolutionSetup& setup, double t) {
    return synthesize(*setup.basis, propagate_coefficients(setup.coefficients, setup.basis->eigenvalues(), t), t);
}

/// L2 norm of sum c_n psi_n, using the quadrature Gram matrix.
inline double series_norm(const Eigenbasis& basis, const SpectralCoefficients& c) {
    const auto g = gram_matrix(basis.potential(), basis.functions());
    const Eigen::Map<const Eigen::VectorXcd> v(c.values.data(), static_cast<Eigen::Index>(c.values.size()));
    return std::sqrt(std::max(0.0, (v.adjoint() * g.cast<cplx>() * v).value().real()));
}

/// u = e^{-i meanV t} u*.
inline WaveField gauge_transform(const WaveField& u_star, double meanV, double t) {
    WaveField out = u_star;
    const cplx ph = std::polar(1.0, -meanV * t);
    for (auto& s : out.samples) s *= ph;
    return out;
}

/// Solution of the full problem at t: gauge factor included when the basis
/// was built for the mean-removed potential.
inline WaveField solution(const EvolutionSetup& setup, double t) {
    auto u = evolve(setup, t);
    return setup.mean_removed ? gauge_transform(u, setup.mean, t) : u;
}

}  // namespace revival
