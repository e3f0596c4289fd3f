#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "revival/spectrum.hpp"
#include "support/fixtures.hpp"
#include "support/transfer_oracle.hpp"

using namespace revival;

namespace {

const Potential& sec5() {
    static const Potential v = Potential::section5_potential();
    return v;
}

const SpectrumTable& sec5_table(Boundary bc) {
    static const SpectrumTable p = eigenvalues(sec5(), Boundary::periodic, 40);
    static const SpectrumTable s = eigenvalues(sec5(), Boundary::semiperiodic, 40);
    static const SpectrumTable d = eigenvalues(sec5(), Boundary::dirichlet, 40);
    return bc == Boundary::periodic ? p : bc == Boundary::semiperiodic ? s : d;
}

const std::vector<Eigenpair>& sec5_periodic_functions() {
    static const std::vector<Eigenpair> eps = [] {
        SpectrumTable t = sec5_table(Boundary::periodic);
        t.entries.resize(30);
        return eigenfunctions(sec5(), t, Grid(4000));
    }();
    return eps;
}

}  // namespace

TEST(Discriminant, FreeValues) {
    EXPECT_NEAR(discriminant(Potential::constant(0.0), 4.0), 2.0, 1e-12);
    EXPECT_NEAR(discriminant(Potential::constant(0.0), 2.25), -2.0, 1e-12);
}

TEST(Discriminant, TwoLevelMatchesTransferOracle) {
    const auto m = oracle::propagate(sec5(), 10.0, two_pi);
    EXPECT_NEAR(discriminant(sec5(), 10.0), m.a + m.d, 1e-10);
}

TEST(Eigenvalues, FreePeriodic) {
    const auto t = eigenvalues(Potential::constant(0.0), Boundary::periodic, 7);
    const std::vector<double> expect{0, 1, 1, 4, 4, 9, 9};
    ASSERT_EQ(t.size(), 7u);
    for (std::size_t n = 0; n < 7; ++n) EXPECT_NEAR(t[n], expect[n], 1e-12);
    EXPECT_EQ(t.entries[0].multiplicity, 1);
    for (std::size_t n = 1; n < 7; ++n) {
        EXPECT_EQ(t.entries[n].multiplicity, 2);
        EXPECT_FALSE(t.entries[n].degenerate);
    }
}

TEST(Eigenvalues, FreeSemiperiodic) {
    const auto t = eigenvalues(Potential::constant(0.0), Boundary::semiperiodic, 4);
    const std::vector<double> expect{0.25, 0.25, 2.25, 2.25};
    for (std::size_t n = 0; n < 4; ++n) EXPECT_NEAR(t[n], expect[n], 1e-12);
}

TEST(Eigenvalues, FreeDirichlet) {
    const auto t = eigenvalues(Potential::constant(0.0), Boundary::dirichlet, 10);
    for (std::size_t n = 0; n < 10; ++n) EXPECT_NEAR(t[n], std::pow((n + 1) / 2.0, 2), 1e-12);
}

TEST(Eigenvalues, TwoLevelMatchesGalerkinOracle) {
    const auto t = eigenvalues(sec5(), Boundary::periodic, 8);
    const auto& ref = fixtures::two_level_periodic_oracle();
    for (std::size_t n = 0; n < 8; ++n) EXPECT_NEAR(t[n] / ref[n], 1.0, 1e-6) << n;
}

TEST(Eigenvalues, ResidualsAtEigenvalues) {
    for (const auto& e : sec5_table(Boundary::periodic).entries)
        EXPECT_LE(std::abs(discriminant(sec5(), e.lambda) - 2.0), 1e-7) << e.index;
    for (const auto& e : sec5_table(Boundary::semiperiodic).entries)
        EXPECT_LE(std::abs(discriminant(sec5(), e.lambda) + 2.0), 1e-7) << e.index;
    for (const auto& e : sec5_table(Boundary::dirichlet).entries)
        EXPECT_LE(std::abs(integrate_fundamental(sec5(), e.lambda).phi2), 1e-7) << e.index;
}

TEST(Eigenvalues, SmoothPotentialAgainstShiftedDirichletPhase) {
    // Mathieu-type potential: even, so Dirichlet eigenvalues coincide with
    // band edges and every gap search runs through the tangent branch.
    const auto v = PiecewiseFunction::trigonometric(1, 1.5, 0.0);
    const auto p = eigenvalues(v, Boundary::periodic, 9);
    const auto s = eigenvalues(v, Boundary::semiperiodic, 9);
    const auto d = eigenvalues(v, Boundary::dirichlet, 9);
    for (const auto& e : p.entries) EXPECT_LE(std::abs(discriminant(v, e.lambda) - 2.0), 1e-7) << e.index;
    for (const auto& e : s.entries) EXPECT_LE(std::abs(discriminant(v, e.lambda) + 2.0), 1e-7) << e.index;
    for (std::size_t n = 1; n < 9; ++n) EXPECT_GT(p[n] - p[n - 1], -1e-12);
    EXPECT_TRUE(verify_interlacing(p, s, d, 1e-7).all_pass());
}

TEST(Eigenvalues, ConstantPotentialShift) {
    const auto a = eigenvalues(Potential::constant(0.0), Boundary::periodic, 21);
    const auto b = eigenvalues(Potential::constant(9.0), Boundary::periodic, 21);
    for (std::size_t n = 0; n < 21; ++n) EXPECT_NEAR(b[n] - a[n], 9.0, 1e-8);
}

TEST(Eigenvalues, RejectsBadCount) {
    EXPECT_THROW(eigenvalues(sec5(), Boundary::periodic, 0), InvalidInput);
}

TEST(Eigenfunction, FreeGroundStates) {
    const Grid g(256);
    const auto p0 = eigenfunction(Potential::constant(0.0), {0, 0.0, 1, false, 0.0}, Boundary::periodic, g);
    ASSERT_EQ(p0.size(), 1u);
    for (double x : {0.0, 1.0, 4.0}) EXPECT_NEAR(p0[0].value(x), 1.0 / std::sqrt(two_pi), 1e-12);
    const auto d0 = eigenfunction(Potential::constant(0.0), {0, 0.25, 1, false, 0.0}, Boundary::dirichlet, g);
    for (double x : {0.3, 1.0, 4.0, 6.0}) EXPECT_NEAR(d0[0].value(x), std::sin(x / 2.0) / std::sqrt(pi), 1e-12);
    EXPECT_NEAR(d0[0].norm, 1.0, 1e-12);
}

TEST(Eigenfunction, FreeDoubleGivesCosSin) {
    const auto t = eigenvalues(Potential::constant(0.0), Boundary::periodic, 5);
    const auto eps = eigenfunctions(Potential::constant(0.0), t, Grid(512));
    ASSERT_EQ(eps.size(), 5u);
    for (double x : {0.2, 1.7, 5.0}) {
        EXPECT_NEAR(eps[3].value(x), std::cos(2 * x) / std::sqrt(pi), 1e-12);
        EXPECT_NEAR(eps[4].value(x), std::sin(2 * x) / std::sqrt(pi), 1e-12);
    }
}

TEST(Eigenfunction, BoundaryResidualsAndNorm) {
    for (const auto& ep : sec5_periodic_functions()) {
        EXPECT_NEAR(ep.norm, 1.0, 1e-8);
        EXPECT_LE(std::abs(ep.value(two_pi) - ep.value(0.0)), 1e-7);
        EXPECT_LE(std::abs(ep.derivative(two_pi) - ep.derivative(0.0)) / std::sqrt(ep.lambda), 1e-7);
    }
    SpectrumTable s = sec5_table(Boundary::semiperiodic);
    s.entries.resize(10);
    for (const auto& ep : eigenfunctions(sec5(), s, Grid(1000))) {
        EXPECT_NEAR(ep.norm, 1.0, 1e-8);
        EXPECT_LE(std::abs(ep.value(two_pi) + ep.value(0.0)), 1e-7);
    }
    SpectrumTable d = sec5_table(Boundary::dirichlet);
    d.entries.resize(10);
    for (const auto& ep : eigenfunctions(sec5(), d, Grid(1000))) {
        EXPECT_LE(std::abs(ep.value(two_pi)), 1e-7);
        EXPECT_EQ(ep.value(0.0), 0.0);
    }
}

TEST(Eigenfunction, SignConvention) {
    for (const auto& ep : sec5_periodic_functions()) {
        double peak = 0.0;
        for (double s : ep.samples) peak = std::max(peak, std::abs(s));
        for (double s : ep.samples) {
            if (std::abs(s) > 1e-10 * peak) {
                EXPECT_GT(s, 0.0) << ep.index;
                break;
            }
        }
    }
}

TEST(Eigenfunction, GramMatrixIsIdentity) {
    const auto& eps = sec5_periodic_functions();
    for (std::size_t i = 0; i < eps.size(); ++i)
        for (std::size_t j = 0; j <= i; ++j)
            EXPECT_NEAR(inner_product(eps[i], eps[j]), i == j ? 1.0 : 0.0, 1e-6) << i << "," << j;
}

TEST(Eigenfunction, SatisfiesTheEquation) {
    const auto& eps = sec5_periodic_functions();
    const double h = 1e-4;
    for (std::size_t n = 0; n < 10; ++n) {
        const auto& ep = eps[n];
        for (double x : {0.4, 1.1, 2.5, 3.9, 5.2, 6.0}) {
            const double d2 = (ep.derivative(x + h) - ep.derivative(x - h)) / (2 * h);
            const double r = -d2 + sec5().value(x) * ep.value(x) - ep.lambda * ep.value(x);
            EXPECT_LE(std::abs(r), 1e-5 * (1 + ep.lambda)) << n << " " << x;
        }
    }
}

TEST(Roots, Examples) {
    const auto& eps = sec5_periodic_functions();
    EXPECT_EQ(count_roots(eps[0]), 0);
    EXPECT_EQ(count_roots(eps[1]), 2);
    EXPECT_EQ(count_roots(eps[2]), 2);
    const auto d = eigenvalues(Potential::constant(0.0), Boundary::dirichlet, 4);
    const auto psi3 = eigenfunction(Potential::constant(0.0), d.entries[3], Boundary::dirichlet, Grid(400));
    EXPECT_EQ(count_roots(psi3[0]), 3);
}

TEST(Roots, CountsFollowIndex) {
    const auto& eps = sec5_periodic_functions();
    EXPECT_EQ(count_roots(eps[0]), 0);
    for (int m = 0; m <= 4; ++m) {
        EXPECT_EQ(count_roots(eps[static_cast<std::size_t>(2 * m + 1)]), 2 * m + 2);
        EXPECT_EQ(count_roots(eps[static_cast<std::size_t>(2 * m + 2)]), 2 * m + 2);
    }
    SpectrumTable d = sec5_table(Boundary::dirichlet);
    d.entries.resize(11);
    const auto dfs = eigenfunctions(sec5(), d, Grid(4000));
    for (int n = 0; n <= 10; ++n) {
        const auto r = count_roots_detailed(dfs[static_cast<std::size_t>(n)]);
        EXPECT_EQ(r.sign_changes, n);
        EXPECT_EQ(r.phase_count, n);
    }
    SpectrumTable s = sec5_table(Boundary::semiperiodic);
    s.entries.resize(10);
    const auto sfs = eigenfunctions(sec5(), s, Grid(4000));
    for (int n = 0; n < 10; ++n) EXPECT_EQ(count_roots(sfs[static_cast<std::size_t>(n)]), 2 * (n / 2) + 1) << n;
}

TEST(Roots, DirichletRootsInterlace) {
    SpectrumTable d = sec5_table(Boundary::dirichlet);
    d.entries.resize(11);
    const auto dfs = eigenfunctions(sec5(), d, Grid(2000));
    for (int n = 0; n <= 9; ++n) {
        const auto a = fixtures::roots_of(dfs[static_cast<std::size_t>(n)]);
        const auto b = fixtures::roots_of(dfs[static_cast<std::size_t>(n + 1)]);
        ASSERT_EQ(static_cast<int>(a.size()), n);
        ASSERT_EQ(static_cast<int>(b.size()), n + 1);
        // with the endpoints, roots of Psi_n cut (0, 2pi) into n+1 pieces,
        // each containing one root of Psi_{n+1}
        std::vector<double> cuts{0.0};
        cuts.insert(cuts.end(), a.begin(), a.end());
        cuts.push_back(two_pi);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            int inside = 0;
            for (double r : b) inside += (r > cuts[i] && r < cuts[i + 1]) ? 1 : 0;
            EXPECT_EQ(inside, 1) << n << " piece " << i;
        }
    }
}

TEST(Interlacing, FreeTablesHold) {
    const auto v = Potential::constant(0.0);
    const auto rep = verify_interlacing(eigenvalues(v, Boundary::periodic, 20), eigenvalues(v, Boundary::semiperiodic, 20),
                                        eigenvalues(v, Boundary::dirichlet, 20), 1e-9);
    EXPECT_TRUE(rep.all_pass());
    EXPECT_GT(rep.checks.size(), 40u);
}

TEST(Interlacing, TwoLevelHolds) {
    SpectrumTable p = sec5_table(Boundary::periodic), s = sec5_table(Boundary::semiperiodic),
                  d = sec5_table(Boundary::dirichlet);
    p.entries.resize(20);
    s.entries.resize(20);
    d.entries.resize(20);
    const auto rep = verify_interlacing(p, s, d, 1e-7);
    for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.family << ": " << c.relation << " margin " << c.margin;
}

TEST(Interlacing, SwappedEntriesAreFlagged) {
    SpectrumTable p = sec5_table(Boundary::periodic), s = sec5_table(Boundary::semiperiodic),
                  d = sec5_table(Boundary::dirichlet);
    std::swap(p.entries[1].lambda, d.entries[0].lambda);
    const auto rep = verify_interlacing(p, s, d, 1e-7);
    ASSERT_FALSE(rep.all_pass());
    const auto* v = rep.first_violation();
    ASSERT_NE(v, nullptr);
    bool saw = false;
    for (const auto& c : rep.checks)
        if (!c.pass && c.relation == "Lambda_0 < lambda_1") saw = true;
    EXPECT_TRUE(saw);
}

TEST(DirichletForm, FreeSine) {
    const auto f = PiecewiseFunction::trigonometric(1, 0.0, 1.0 / std::sqrt(pi));
    EXPECT_NEAR(dirichlet_form(Potential::constant(0.0), f, f), 1.0, 1e-12);
}

TEST(DirichletForm, EigenfunctionsDiagonalise) {
    const auto& eps = sec5_periodic_functions();
    EXPECT_NEAR(dirichlet_form(sec5(), eps[1], eps[2]), 0.0, 1e-6);
    EXPECT_NEAR(dirichlet_form(sec5(), eps[1], eps[1]), eps[1].lambda, 1e-6);
    for (std::size_t n = 0; n < 12; ++n) EXPECT_NEAR(dirichlet_form(sec5(), eps[n], eps[n]), eps[n].lambda, 1e-6);
}

TEST(CompareSpectra, ConstantShift) {
    const auto rep = compare_spectra(Potential::constant(0.0), Potential::constant(1.0), 15);
    EXPECT_TRUE(rep.pass);
    for (double s : rep.shift) EXPECT_NEAR(s, 1.0, 1e-9);
    const auto same = compare_spectra(sec5(), sec5(), 10);
    for (double s : same.shift) EXPECT_EQ(s, 0.0);
}

TEST(CompareSpectra, RaisedWell) {
    const Potential bump({PolySegment{0.0, pi / 2.0, {0.5, 0, 0, 0}}, PolySegment{pi / 2.0, two_pi, {0.0, 0, 0, 0}}});
    const auto raised = sec5() + bump;
    const auto rep = compare_spectra(sec5(), raised, 20);
    EXPECT_TRUE(rep.pass);
    for (double s : rep.shift) {
        EXPECT_GT(s, 0.0);
        EXPECT_LT(s, 0.5 + 1e-9);
    }
    // spot check against the oracle
    const auto ref = oracle::FourierOracle(raised).eigenvalues(oracle::Family::periodic, 1025, 5);
    for (std::size_t n = 0; n < 5; ++n) EXPECT_NEAR(rep.raised[n] / ref[n], 1.0, 1e-6);
    EXPECT_THROW(compare_spectra(raised, sec5(), 3), OrderingError);
}
