#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "revival/revival.hpp"

using namespace revival;

namespace {

const ComplexDatum& sawtooth() {
    static const ComplexDatum f(PiecewiseFunction::section5_sawtooth());
    return f;
}

// Direct floating-point Gauss sum, no modular reduction.
cplx gauss_direct(long q, long r, long k) {
    cplx acc{0.0, 0.0};
    for (long m = 0; m < r; ++m) {
        const double a = 2.0 * pi * (static_cast<double>(m * k) / r - static_cast<double>(m * m) * q / r);
        acc += cplx(std::cos(a), std::sin(a));
    }
    return acc / static_cast<double>(r);
}

}  // namespace

TEST(Gauss, MatchesDirectSum) {
    for (long r = 1; r <= 12; ++r)
        for (long q = 1; q <= 2 * r; ++q) {
            if (std::gcd(q, r) != 1) continue;
            const auto g = gauss_coefficients(RationalTime(q, r));
            for (long k = 0; k < r; ++k) EXPECT_NEAR(std::abs(g[k] - gauss_direct(q, r, k)), 0.0, 1e-12);
        }
}

TEST(Gauss, OddModulusMagnitude) {
    for (long r : {1L, 3L, 5L, 7L, 9L, 15L, 21L, 61L})
        for (long q = 1; q < std::max(2L, r); ++q) {
            if (std::gcd(q, r) != 1) continue;
            for (const auto& g : gauss_coefficients(RationalTime(q, r)))
                EXPECT_NEAR(std::abs(g), 1.0 / std::sqrt(static_cast<double>(r)), 1e-12) << q << "/" << r;
        }
}

TEST(Gauss, CoefficientsSumToOne) {
    // sum_k G_k = 1 (only m = 0 survives the sum over k)
    for (long r : {2L, 4L, 10L, 60L}) {
        const auto g = gauss_coefficients(RationalTime(1, r));
        const cplx s = std::accumulate(g.begin(), g.end(), cplx{0.0, 0.0});
        EXPECT_NEAR(std::abs(s - 1.0), 0.0, 1e-12);
    }
}

TEST(Translate, IdentityAtFullPeriod) {
    const Grid g(512);
    const auto u = free_translate_solution(sawtooth(), RationalTime(1, 1), g);
    for (std::size_t j = 0; j < g.size(); ++j) EXPECT_EQ(u.samples[j], sawtooth().value(g.x(j)));
}

TEST(Translate, CosineHalfPeriod) {
    const Grid g(360);
    const ComplexDatum f(PiecewiseFunction::trigonometric(1, 1.0, 0.0));
    const auto u = free_translate_solution(f, RationalTime(1, 2), g);
    for (std::size_t j = 0; j < g.size(); ++j)
        EXPECT_NEAR(std::abs(u.samples[j] + std::cos(g.x(j))), 0.0, 1e-14);
}

TEST(Translate, MatchesFreeSpectralEvolution) {
    const Grid g(4000);
    const auto s = make_setup(Potential::constant(0.0), sawtooth(), 400, g, false);
    for (long r = 2; r <= 8; ++r)
        for (long q = 1; q < r; ++q) {
            if (std::gcd(q, r) != 1) continue;
            const RationalTime t(q, r);
            const double d = l2_distance(evolve(s, t.value()), free_translate_solution(sawtooth(), t, g));
            EXPECT_LE(d, 2.0 * s.truncation_error) << q << "/" << r;
        }
}

TEST(RevivalComponent, PhaseFactor) {
    const Grid g(256);
    const auto a = revival_component(sawtooth(), RationalTime(1, 1), 0.3, g);
    const auto b = revival_component(sawtooth(), RationalTime(1, 10), 0.0, g);
    const auto c = free_translate_solution(sawtooth(), RationalTime(1, 10), g);
    for (std::size_t j = 0; j < g.size(); ++j) {
        EXPECT_NEAR(std::abs(a.samples[j] - std::polar(1.0, -two_pi * 0.3) * sawtooth().value(g.x(j))), 0.0, 1e-15);
        EXPECT_EQ(b.samples[j], c.samples[j]);
    }
}

TEST(RevivalComponent, TwoLevelJumpSet) {
    // f* jumps only at pi (it is continuous across 0), so psi_rev jumps at
    // pi + 2 pi k/10 for the k whose Gauss coefficient is nonzero. For r = 10
    // that is every other k, each with |G_k| = sqrt(2/10).
    const auto t = RationalTime::from_pi_fraction(1, 5);
    ASSERT_EQ(t, RationalTime(1, 10));
    const auto jumps = revival_jumps(sawtooth(), t, 6.75);
    std::vector<double> expect;
    for (long k = 0; k < 10; ++k)
        if (std::abs(gauss_direct(1, 10, k)) > 1e-9) expect.push_back(wrap_period(pi + two_pi * k / 10.0));
    std::sort(expect.begin(), expect.end());
    ASSERT_EQ(jumps.size(), 5u);
    ASSERT_EQ(expect.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_NEAR(jumps[i].location, expect[i], 1e-12);
        EXPECT_NEAR(std::abs(jumps[i].size), std::sqrt(0.2), 1e-12);
    }
    // the sampled component shows exactly these jumps and no others
    const Grid g(4000);
    const auto psi = revival_component(sawtooth(), t, 6.75, g);
    const auto cands = candidate_jumps(jump_sources(sawtooth(), Potential::section5_potential()), t, g);
    EXPECT_EQ(cands.size(), 20u);
    for (double x : cands) {
        cplx exact{0.0, 0.0};
        for (const auto& j : jumps)
            if (std::abs(j.location - x) < 1e-9) exact = j.size;
        const auto e = estimate_jump(psi, x, two_pi, two_pi);
        EXPECT_NEAR(std::abs(e.jump - exact), 0.0, 1e-9) << x;
    }
}

TEST(Candidates, MergeAndWrap) {
    const Grid g(4000);
    const std::vector<double> src = {0.0, pi / 2, pi};
    EXPECT_EQ(candidate_jumps(src, RationalTime(1, 10), g).size(), 20u);
    EXPECT_EQ(candidate_jumps(src, RationalTime(1, 60), g).size(), 60u);
    EXPECT_EQ(candidate_jumps(src, RationalTime(1, 1), g).size(), 3u);
    // points inside one Gibbs core collapse to their mean, across 0 as well
    const auto c = candidate_jumps({1.0, 1.0 + 5 * g.dx(), two_pi - 2 * g.dx(), 3 * g.dx()}, RationalTime(1, 1), g);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_NEAR(c[0], 0.5 * g.dx(), 1e-12);
    EXPECT_NEAR(c[1], 1.0 + 2.5 * g.dx(), 1e-12);
}

TEST(JumpEstimate, LinearDataIsExactAcrossTheSeam) {
    const Grid g(1000);
    std::vector<cplx> s(g.size());
    for (std::size_t j = 0; j < s.size(); ++j) s[j] = cplx(g.x(j), -2.0 * g.x(j));
    const WaveField u(g, s, 0.0);
    const auto e = estimate_jump(u, 0.0, two_pi, two_pi);
    EXPECT_NEAR(std::abs(e.jump - cplx(-two_pi, 2.0 * two_pi)), 0.0, 1e-9);
    EXPECT_EQ(e.samples_left, 41);
    EXPECT_EQ(e.samples_right, 41);
    const auto mid = estimate_jump(u, 2.0, two_pi, two_pi);
    EXPECT_NEAR(std::abs(mid.jump), 0.0, 1e-9);
    EXPECT_THROW(estimate_jump(u, 2.0, 25 * g.dx(), two_pi), ResolutionError);
}

TEST(Decomposition, ExactSplitAndFreeRatio) {
    const Grid g(4000);
    const auto s = make_setup(Potential::constant(0.0), sawtooth(), 400, g, true);
    const auto d = revival_at(s, sawtooth(), RationalTime(1, 4));
    for (std::size_t j = 0; j < g.size(); ++j)
        EXPECT_LE(std::abs(d.w.samples[j] + d.psi_rev.samples[j] - d.u.samples[j]), 1e-15 * (1.0 + std::abs(d.u.samples[j])));
    for (double x : d.candidate_jumps) {
        EXPECT_GE(x, 0.0);
        EXPECT_LT(x, two_pi);
    }
    EXPECT_LE(d.ratio, 0.05);
    EXPECT_GT(d.max_jump_u, 0.5);
}

TEST(Decomposition, SmoothDatumShowsOnlyTheCurvatureBias) {
    // For continuous data nothing revives discontinuously. A linear fit across
    // the excluded core still turns the jump of u'' = (V - i d/dt) u at a
    // potential breakpoint into an apparent jump of
    //   dV u (a^2 + 4ab + b^2) / 12,   a = delta, b = delta + h.
    const Grid g(4000);
    const auto v = Potential::section5_potential();
    const ComplexDatum f(PiecewiseFunction::trigonometric(1, 0.0, 1.0));
    const auto s = make_setup(v, f, 200, g, true);
    const auto d = revival_at(s, f, RationalTime(1, 10));
    const double a = 20 * g.dx(), b = 60 * g.dx();
    const auto bps = v.breakpoints();
    for (const auto& row : d.jump_table) {
        const bool at_bp = std::any_of(bps.begin(), bps.end(), [&](double p) { return std::abs(p - row.x) < 1e-9; });
        if (at_bp) {
            const double dv = v.value(row.x) - v.left_limit(row.x);
            const double bias = std::abs(dv * row.u.left) * (a * a + 4 * a * b + b * b) / 12.0;
            EXPECT_LE(std::abs(row.u.jump), bias + 0.01) << row.x;
            EXPECT_LE(std::abs(row.w.jump), bias + 0.01) << row.x;
            // where the curvature step dominates the law is sharp
            if (bias > 0.01) {
                EXPECT_NEAR(std::abs(row.u.jump), bias, 0.05 * bias) << row.x;
            }
        } else {
            EXPECT_LE(std::abs(row.u.jump), 0.01) << row.x;
            EXPECT_LE(std::abs(row.w.jump), 0.01) << row.x;
        }
    }
}

TEST(Decomposition, TwoLevelContinuityAtHighTruncation) {
    const Grid g(4000);
    const auto v = Potential::section5_potential();
    const auto lo = make_setup(v, sawtooth(), 200, g, true);
    const auto hi = make_setup(v, sawtooth(), 800, g, true);
    for (long b : {30L, 15L, 10L, 5L}) {
        const auto t = RationalTime::from_pi_fraction(1, b);
        const auto dl = revival_at(lo, sawtooth(), t);
        const auto dh = revival_at(hi, sawtooth(), t);
        EXPECT_LT(dh.max_jump_w, dl.max_jump_w) << b;
        EXPECT_LE(dh.ratio, 0.05) << b;
        EXPECT_GT(dh.max_jump_u, 0.1) << b;
    }
}
