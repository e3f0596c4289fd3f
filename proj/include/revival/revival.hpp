#pragma once

// Revival at rational times: the translate sum of the free evolution, its
// phase-shifted form for a potential, and the decomposition u = w + psi_rev
// with one-sided jump estimates at the candidate discontinuities.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "revival/core.hpp"
#include "revival/evolution.hpp"

namespace revival {

/// G_k = (1/r) sum_m exp(2 pi i (m k - m^2 q) / r), k = 0..r-1. Exponents are
/// reduced mod r in integer arithmetic before the angle is formed.
inline std::vector<cplx> gauss_coefficients(const RationalTime& t) {
    const long long r = t.r, q = t.q % t.r;
    std::vector<cplx> g(static_cast<std::size_t>(r), cplx{0.0, 0.0});
    for (long long k = 0; k < r; ++k) {
        cplx acc{0.0, 0.0};
        for (long long m = 0; m < r; ++m) {
            const long long e = ((m * k - (m * m % r) * q) % r + r) % r;
            acc += std::polar(1.0, two_pi * static_cast<double>(e) / static_cast<double>(r));
        }
        g[static_cast<std::size_t>(k)] = acc / static_cast<double>(r);
    }
    return g;
}

/// Free evolution at t = 2 pi q/r as (1/r) sum_{k,m} e^{2 pi i (mk/r - m^2 q/r)}
/// f*(x - 2 pi k/r), with f* evaluated directly at the translated points.
inline WaveField free_translate_solution(const ComplexDatum& f, const RationalTime& t, const Grid& grid) {
    const auto g = gauss_coefficients(t);
    std::vector<cplx> u(grid.size(), cplx{0.0, 0.0});
    for (std::size_t k = 0; k < g.size(); ++k) {
        if (g[k] == cplx{0.0, 0.0}) continue;
        const double shift = two_pi * static_cast<double>(k) / static_cast<double>(t.r);
        for (std::size_t j = 0; j < u.size(); ++j) u[j] += g[k] * f.value(wrap_period(grid.x(j) - shift));
    }
    return WaveField(grid, std::move(u), t.value());
}

/// psi(2 pi q/r, x) = e^{-2 pi i <V> q/r} times the free translate sum.
inline WaveField revival_component(const ComplexDatum& f, const RationalTime& t, double meanV, const Grid& grid) {
    auto w = free_translate_solution(f, t, grid);
    const cplx ph = std::polar(1.0, -two_pi * meanV * static_cast<double>(t.q) / static_cast<double>(t.r));
    for (auto& s : w.samples) s *= ph;
    return w;
}

struct RevivalJump {
    double location;
    cplx size;  // right limit minus left limit
};

/// Exact discontinuities of psi_rev: each jump of f* is copied to
/// d + 2 pi k/r with weight G_k (and the potential's phase). Copies with a
/// vanishing Gauss coefficient are dropped.
inline std::vector<RevivalJump> revival_jumps(const ComplexDatum& f, const RationalTime& t, double meanV,
                                              double zero_tol = 1e-12) {
    const auto g = gauss_coefficients(t);
    const cplx ph = std::polar(1.0, -two_pi * meanV * static_cast<double>(t.q) / static_cast<double>(t.r));
    std::vector<RevivalJump> out;
    for (double d : f.jump_points()) {
        const cplx right = f.value(d);
        const cplx left{f.re.left_limit(d), f.im ? f.im->left_limit(d) : 0.0};
        for (std::size_t k = 0; k < g.size(); ++k) {
            if (std::abs(g[k]) <= zero_tol) continue;
            out.push_back({wrap_period(d + two_pi * static_cast<double>(k) / static_cast<double>(t.r)),
                           ph * g[k] * (right - left)});
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.location < b.location; });
    return out;
}

struct JumpOptions {
    int core_cells = 20;    // Gibbs exclusion delta, in grid spacings
    int window_cells = 40;  // fit window h beyond the core
    int min_samples = 8;    // per side
};

struct JumpEstimate {
    double location = 0.0;
    double half_width = 0.0;  // outer edge of the fit windows
    double delta = 0.0;       // excluded core half-width
    cplx left{0.0, 0.0};
    cplx right{0.0, 0.0};
    cplx jump{0.0, 0.0};
    int samples_left = 0;
    int samples_right = 0;
};

/// Candidate discontinuities {d + 2 pi k/r mod 2 pi}. Points closer than half
/// a grid spacing are the same point; points whose Gibbs cores overlap are
/// merged into their mean.
inline std::vector<double> candidate_jumps(const std::vector<double>& sources, const RationalTime& t, const Grid& grid,
                                           const JumpOptions& opts = {}) {
    std::vector<double> pts;
    for (double d : sources)
        for (long k = 0; k < t.r; ++k) pts.push_back(wrap_period(d + two_pi * static_cast<double>(k) / t.r));
    std::sort(pts.begin(), pts.end());
    const double core = opts.core_cells * grid.dx();
    std::vector<std::vector<double>> clusters;
    for (double p : pts) {
        if (!clusters.empty() && p - clusters.back().back() < std::max(0.5 * grid.dx(), core))
            clusters.back().push_back(p);
        else
            clusters.push_back({p});
    }
    // the circle closes: last cluster may touch the first
    if (clusters.size() > 1 && clusters.front().front() + two_pi - clusters.back().back() < core) {
        for (double p : clusters.front()) clusters.back().push_back(p + two_pi);
        clusters.erase(clusters.begin());
    }
    std::vector<double> out;
    for (const auto& c : clusters) {
        double s = 0.0;
        for (double p : c) s += p;
        out.push_back(wrap_period(s / static_cast<double>(c.size())));
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace detail {

/// Value at offset 0 of the least-squares line through (s_i, y_i).
inline cplx line_at_zero(const std::vector<double>& s, const std::vector<cplx>& y) {
    const double n = static_cast<double>(s.size());
    double ms = 0.0;
    cplx my{0.0, 0.0};
    for (std::size_t i = 0; i < s.size(); ++i) {
        ms += s[i];
        my += y[i];
    }
    ms /= n;
    my /= n;
    double sss = 0.0;
    cplx ssy{0.0, 0.0};
    for (std::size_t i = 0; i < s.size(); ++i) {
        sss += (s[i] - ms) * (s[i] - ms);
        ssy += (s[i] - ms) * (y[i] - my);
    }
    const cplx slope = ssy / sss;
    return my - slope * ms;
}

}  // namespace detail

/// One-sided linear fits of u over [x0 + delta, x0 + outer] and its mirror,
/// with the outer edge cut back to `room_left` / `room_right` where another
/// candidate's core begins. Windows wrap around the period.
inline JumpEstimate estimate_jump(const WaveField& u, double x0, double room_left, double room_right,
                                  const JumpOptions& opts = {}) {
    const Grid& g = u.grid;
    const double dx = g.dx();
    JumpEstimate e;
    e.location = x0;
    e.delta = opts.core_cells * dx;
    e.half_width = e.delta + opts.window_cells * dx;
    if (!(e.delta < e.half_width)) throw InvalidInput("jump window must extend beyond the Gibbs core");
    const double out_l = std::min(e.half_width, room_left), out_r = std::min(e.half_width, room_right);
    const auto n = static_cast<long>(g.size());
    const auto j0 = static_cast<long>(std::floor(x0 / dx));
    std::vector<double> sl, sr;
    std::vector<cplx> yl, yr;
    const long reach = static_cast<long>(std::ceil(e.half_width / dx)) + 1;
    for (long o = -reach; o <= reach; ++o) {
        const long j = j0 + o;
        const double s = static_cast<double>(j) * dx - x0;
        const cplx y = u.samples[static_cast<std::size_t>(((j % n) + n) % n)];
        if (s >= e.delta && s <= out_r) {
            sr.push_back(s);
            yr.push_back(y);
        } else if (s <= -e.delta && s >= -out_l) {
            sl.push_back(s);
            yl.push_back(y);
        }
    }
    e.samples_left = static_cast<int>(sl.size());
    e.samples_right = static_cast<int>(sr.size());
    if (e.samples_left < opts.min_samples || e.samples_right < opts.min_samples)
        throw ResolutionError("jump window at x = " + std::to_string(x0) + " holds " + std::to_string(e.samples_left) +
                              "/" + std::to_string(e.samples_right) + " samples, need " +
                              std::to_string(opts.min_samples) + " per side");
    e.left = detail::line_at_zero(sl, yl);
    e.right = detail::line_at_zero(sr, yr);
    e.jump = e.right - e.left;
    return e;
}

struct JumpRow {
    double x = 0.0;
    JumpEstimate u, psi, w;
};

struct RevivalDecomposition {
    RationalTime time;
    WaveField u;
    WaveField psi_rev;
    WaveField w;
    std::vector<double> candidate_jumps;
    std::vector<JumpRow> jump_table;
    double max_jump_u = 0.0;
    double max_jump_w = 0.0;
    double ratio = 0.0;  // max |jump(w)| / max |jump(u)|
    JumpOptions options;
};

/// w = u - psi_rev and jump estimates of all three at every candidate.
inline RevivalDecomposition decompose_and_diagnose(const WaveField& u, const WaveField& psi_rev,
                                                   const std::vector<double>& sources, const RationalTime& t,
                                                   const JumpOptions& opts = {}) {
    if (!(u.grid == psi_rev.grid)) throw InvalidInput("u and psi_rev live on different grids");
    RevivalDecomposition d;
    d.time = t;
    d.u = u;
    d.psi_rev = psi_rev;
    d.options = opts;
    std::vector<cplx> w(u.samples.size());
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = u.samples[j] - psi_rev.samples[j];
    d.w = WaveField(u.grid, std::move(w), u.time);
    d.candidate_jumps = candidate_jumps(sources, t, u.grid, opts);
    const auto& c = d.candidate_jumps;
    const double core = opts.core_cells * u.grid.dx();
    for (std::size_t i = 0; i < c.size(); ++i) {
        double room_l = two_pi, room_r = two_pi;
        if (c.size() > 1) {
            const double prev = i == 0 ? c.back() - two_pi : c[i - 1];
            const double next = i + 1 == c.size() ? c.front() + two_pi : c[i + 1];
            room_l = c[i] - prev - core;
            room_r = next - c[i] - core;
        }
        JumpRow row;
        row.x = c[i];
        row.u = estimate_jump(d.u, c[i], room_l, room_r, opts);
        row.psi = estimate_jump(d.psi_rev, c[i], room_l, room_r, opts);
        row.w = estimate_jump(d.w, c[i], room_l, room_r, opts);
        d.max_jump_u = std::max(d.max_jump_u, std::abs(row.u.jump));
        d.max_jump_w = std::max(d.max_jump_w, std::abs(row.w.jump));
        d.jump_table.push_back(row);
    }
    d.ratio = d.max_jump_u > 0.0 ? d.max_jump_w / d.max_jump_u : 0.0;
    return d;
}

/// Jump sources of a scenario: discontinuities of f and breakpoints of V.
inline std::vector<double> jump_sources(const ComplexDatum& f, const Potential& v) {
    return merge_nodes({f.jump_points(), v.breakpoints()});
}

/// Full pipeline at one rational time: spectral solution, revival component
/// and decomposition.
inline RevivalDecomposition revival_at(const EvolutionSetup& setup, const ComplexDatum& f, const RationalTime& t,
                                       const JumpOptions& opts = {}) {
    const auto u = solution(setup, t.value());
    const auto psi = revival_component(f, t, setup.mean, setup.grid());
    return decompose_and_diagnose(u, psi, jump_sources(f, setup.basis->potential()), t, opts);
}

}  // namespace revival
