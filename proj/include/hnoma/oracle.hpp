// SPDX-License-Identifier: Apache-2.0
#pragma once

// Brute-force and search-based verifiers. These deliberately avoid the
// production numerical kernels: quadratic forms and objectives are
// re-implemented with plain loops so that agreement between the two paths
// is evidence, not tautology.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <utility>
#include <vector>

#include "hnoma/bandwidth.hpp"
#include "hnoma/beamforming.hpp"
#include "hnoma/channel.hpp"
#include "hnoma/errors.hpp"
#include "hnoma/rng.hpp"
#include "hnoma/semantic_model.hpp"

namespace hnoma::oracle {

namespace detail {

inline std::complex<double> dot_conj(const ComplexVector& a, const ComplexVector& b) {
    std::complex<double> s{0.0, 0.0};
    for (Eigen::Index i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

inline double norm2(const ComplexVector& a) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) s += std::norm(a[i]);
    return s;
}

inline double gain(const ComplexVector& h, const ComplexVector& dir) {
    return std::norm(dot_conj(h, dir));
}

/// Span parametrization of the two beams: each direction is a complex
/// combination of h_s and h_b. Components orthogonal to both channels
/// enter no constraint and only cost power, so this restriction is
/// lossless.
struct SpanPoint {
    std::array<double, 8> x{}; // re/im of (a1, a2) for w_s, (b1, b2) for w_b
};

struct ProjectedSolution {
    ComplexVector dir_s, dir_b;
    double p_s = 0.0, p_b = 0.0;
    double total = std::numeric_limits<double>::infinity();
    bool feasible = false;
};

/// Maps span coefficients to a feasible solution: semantic power pinned to
/// its SNR target, bit power lifted to the larger of its two decode
/// requirements. Any direction pair with nonzero projections yields a
/// feasible point, so the search runs unconstrained over directions.
inline ProjectedSolution project(const ClusterChannels& ch, const SinrTargets& t,
                                 const SpanPoint& p) {
    const std::complex<double> a1{p.x[0], p.x[1]}, a2{p.x[2], p.x[3]};
    const std::complex<double> b1{p.x[4], p.x[5]}, b2{p.x[6], p.x[7]};

    ProjectedSolution out;
    ComplexVector u = a1 * ch.h_s + a2 * ch.h_b;
    ComplexVector v = b1 * ch.h_s + b2 * ch.h_b;
    const double nu = norm2(u), nv = norm2(v);
    if (!(nu > 1e-300) || !(nv > 1e-300)) return out;
    u /= std::sqrt(nu);
    v /= std::sqrt(nv);

    const double s_on_s = gain(ch.h_s, u);
    if (!(s_on_s > 1e-300)) return out;
    const double p_s = t.gamma_s0 * t.noise_w / s_on_s;

    double p_b = 0.0;
    if (t.gamma_b0 > 0.0) {
        const double b_at_s_gain = gain(ch.h_s, v);
        const double b_at_b_gain = gain(ch.h_b, v);
        if (!(b_at_s_gain > 1e-300) || !(b_at_b_gain > 1e-300)) return out;
        const double need_sic = t.gamma_b0 * (p_s * s_on_s + t.noise_w) / b_at_s_gain;
        const double need_own =
            t.gamma_b0 * (p_s * gain(ch.h_b, u) + t.noise_w) / b_at_b_gain;
        p_b = std::max(need_sic, need_own);
    }

    out.dir_s = std::move(u);
    out.dir_b = std::move(v);
    out.p_s = p_s;
    out.p_b = p_b;
    out.total = p_s + p_b;
    out.feasible = true;
    return out;
}

/// Nelder-Mead on the 8 span coordinates. Plain, bounded, deterministic.
inline SpanPoint nelder_mead(const ClusterChannels& ch, const SinrTargets& t,
                             SpanPoint start, int max_iter, double tol) {
    constexpr int kDim = 8;
    const auto f = [&](const SpanPoint& p) { return project(ch, t, p).total; };

    std::array<SpanPoint, kDim + 1> simplex;
    std::array<double, kDim + 1> value;
    simplex[0] = start;
    value[0] = f(start);
    for (int i = 0; i < kDim; ++i) {
        SpanPoint p = start;
        p.x[i] += 0.25 * std::max(1.0, std::abs(p.x[i]));
        simplex[i + 1] = p;
        value[i + 1] = f(p);
    }

    for (int iter = 0; iter < max_iter; ++iter) {
        // order: best .. worst
        std::array<int, kDim + 1> idx;
        for (int i = 0; i <= kDim; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return value[a] < value[b]; });
        const int best = idx[0], worst = idx[kDim], second = idx[kDim - 1];

        const double spread = value[worst] - value[best];
        if (spread <= tol * std::max(std::abs(value[best]), 1e-300)) break;

        SpanPoint centroid{};
        for (int i = 0; i <= kDim; ++i) {
            if (i == worst) continue;
            for (int d = 0; d < kDim; ++d) centroid.x[d] += simplex[i].x[d];
        }
        for (int d = 0; d < kDim; ++d) centroid.x[d] /= kDim;

        const auto blend = [&](double c) {
            SpanPoint p;
            for (int d = 0; d < kDim; ++d)
                p.x[d] = centroid.x[d] + c * (simplex[worst].x[d] - centroid.x[d]);
            return p;
        };

        SpanPoint reflect = blend(-1.0);
        const double fr = f(reflect);
        if (fr < value[best]) {
            SpanPoint expand = blend(-2.0);
            const double fe = f(expand);
            if (fe < fr) {
                simplex[worst] = expand;
                value[worst] = fe;
            } else {
                simplex[worst] = reflect;
                value[worst] = fr;
            }
        } else if (fr < value[second]) {
            simplex[worst] = reflect;
            value[worst] = fr;
        } else {
            SpanPoint contract = blend(fr < value[worst] ? -0.5 : 0.5);
            const double fc = f(contract);
            if (fc < std::min(fr, value[worst])) {
                simplex[worst] = contract;
                value[worst] = fc;
            } else {
                for (int i = 0; i <= kDim; ++i) {
                    if (i == best) continue;
                    for (int d = 0; d < kDim; ++d)
                        simplex[i].x[d] =
                            simplex[best].x[d] + 0.5 * (simplex[i].x[d] - simplex[best].x[d]);
                    value[i] = f(simplex[i]);
                }
            }
        }
    }

    int best = 0;
    for (int i = 1; i <= kDim; ++i)
        if (value[i] < value[best]) best = i;
    return simplex[best];
}

} // namespace detail

/// Span-restricted power minimizer for one cluster: multi-start local
/// descent over beam directions with powers projected to feasibility.
/// Serves both as the independent check of the closed form and as the
/// fallback for clusters that are not quasi-degraded.
inline BeamSolution solve_beams_span(const ClusterChannels& ch, const SinrTargets& t,
                                     int starts = 16, double tol = 1e-10,
                                     int max_iter = 4000) {
    t.validate();
    if (!(detail::norm2(ch.h_s) > 0.0) || !(detail::norm2(ch.h_b) > 0.0))
        throw std::invalid_argument("zero channel vector");

    std::vector<detail::SpanPoint> seeds;
    {
        detail::SpanPoint mrt{};
        mrt.x = {1, 0, 0, 0, 0, 0, 1, 0}; // w_s along h_s, w_b along h_b
        seeds.push_back(mrt);

        // tilted candidate: w_s along h_s minus the scaled h_b component
        const double g_b = detail::norm2(ch.h_b);
        const std::complex<double> c =
            -(t.gamma_b0 / (1.0 + t.gamma_b0)) * detail::dot_conj(ch.h_b, ch.h_s) / g_b;
        detail::SpanPoint tilt{};
        tilt.x = {1, 0, c.real(), c.imag(), 0, 0, 1, 0};
        seeds.push_back(tilt);

        StreamRng rng(0xb3a91u, 17);
        while (static_cast<int>(seeds.size()) < starts) {
            detail::SpanPoint p{};
            for (double& v : p.x) v = rng.next_uniform(-1.0, 1.0);
            seeds.push_back(p);
        }
    }

    detail::ProjectedSolution best;
    for (const auto& seed : seeds) {
        const auto refined = detail::nelder_mead(ch, t, seed, max_iter, tol);
        const auto sol = detail::project(ch, t, refined);
        if (sol.feasible && sol.total < best.total) best = sol;
    }
    if (!best.feasible)
        throw std::runtime_error("span search found no feasible point"); // unreachable by scaling

    BeamSolution out;
    out.dir_s = best.dir_s;
    out.dir_b = best.dir_b;
    out.p_s = best.p_s;
    out.p_b = best.p_b;
    const double s_on_s = best.p_s * detail::gain(ch.h_s, best.dir_s);
    const double b_on_s = best.p_b * detail::gain(ch.h_s, best.dir_b);
    const double s_on_b = best.p_s * detail::gain(ch.h_b, best.dir_s);
    const double b_on_b = best.p_b * detail::gain(ch.h_b, best.dir_b);
    out.achieved_sinr_b_at_s = b_on_s / (s_on_s + t.noise_w);
    out.achieved_snr_s = s_on_s / t.noise_w;
    out.achieved_sinr_b = b_on_b / (s_on_b + t.noise_w);
    return out;
}

/// Exhaustive grid over the NOMA-period bandwidth region {b >= b_min,
/// sum b <= b0}, nested so the budget-exhausting face is always on-grid.
/// Evaluates the exact power (blocks recomputed per point). Supports up to
/// three clusters; `grid_per_axis` points per axis.
inline std::pair<std::vector<double>, double>
grid_bandwidth_oracle(const std::vector<ClusterChannels>& channels, double gamma_s0,
                      double r0, double n0, double b0, double b_min, int grid_per_axis) {
    const std::size_t m = channels.size();
    if (m == 0 || m > 3)
        throw unsupported_dimension("grid oracle supports 1..3 clusters");
    if (grid_per_axis < 2)
        throw std::invalid_argument("need at least 2 grid points per axis");

    const double lo = std::max(b_min, b0 * 1e-9);
    const int g = grid_per_axis;
    std::vector<double> best_b;
    double best_p = std::numeric_limits<double>::infinity();

    const auto consider = [&](const std::vector<double>& b) {
        const double p = noma_power_of_bandwidth(channels, b, gamma_s0, r0, n0);
        if (p < best_p) {
            best_p = p;
            best_b = b;
        }
    };
    const auto lerp = [](double a, double b, int i, int n) {
        return a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    };

    if (m == 1) {
        for (int i = 0; i < g; ++i) consider({lerp(lo, b0, i, g)});
    } else if (m == 2) {
        for (int i = 0; i < g; ++i) {
            const double b1 = lerp(lo, b0 - lo, i, g);
            for (int j = 0; j < g; ++j) consider({b1, lerp(lo, b0 - b1, j, g)});
        }
    } else {
        for (int i = 0; i < g; ++i) {
            const double b1 = lerp(lo, b0 - 2.0 * lo, i, g);
            for (int j = 0; j < g; ++j) {
                const double b2 = lerp(lo, b0 - b1 - lo, j, g);
                for (int k = 0; k < g; ++k) consider({b1, b2, lerp(lo, b0 - b1 - b2, k, g)});
            }
        }
    }
    return {std::move(best_b), best_p};
}

/// Configuration of the scalar end-to-end recomputation.
struct ScalarPipelineParams {
    double n0 = 1e-17;
    double b0 = 1e6;
    int m = 1;       // identical clusters
    int n_w = 100;   // words per file
    double n_c = 5.0; // characters per word
};

/// Recomputes the whole joint pipeline for collinear channels reduced to
/// gains (g_s >= g_b), using scalar formulas and 1-D golden-section search
/// only. Returns the best average power over the registry.
inline double scalar_pipeline_oracle(double gain_s, double gain_b, double eps0, double s0,
                                     double r0, const SemanticPerfModel& model,
                                     const ScalarPipelineParams& cfg) {
    if (!(gain_s >= gain_b) || !(gain_b > 0.0))
        throw std::invalid_argument("scalar pipeline expects gain_s >= gain_b > 0");
    double best = std::numeric_limits<double>::infinity();
    const double md = static_cast<double>(cfg.m);

    for (int k : model.symbol_factors()) {
        const LogisticParams& p = model.params(k);
        if (!(eps0 > 0.0 && eps0 < p.a_k)) continue;
        if (md * k * s0 > cfg.b0 * (1.0 + 1e-12)) continue;

        const double x_db = p.x0_k - std::log(p.a_k / eps0 - 1.0) / p.l_k;
        const double gamma = std::pow(10.0, x_db / 10.0);

        const auto power_at = [&](double b) {
            const double excess = std::exp2(r0 / b) - 1.0;
            return gamma * cfg.n0 * b / gain_s +
                   cfg.n0 * b * excess / gain_b * (gamma * gain_b / gain_s + 1.0);
        };

        // golden-section over the per-cluster interval (symmetric clusters
        // share bandwidth equally)
        double a = static_cast<double>(k) * s0;
        double b = cfg.b0 / md;
        const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
        double f1 = power_at(x1), f2 = power_at(x2);
        for (int it = 0; it < 200 && (b - a) > 1e-14 * b; ++it) {
            if (f1 < f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - phi * (b - a);
                f1 = power_at(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + phi * (b - a);
                f2 = power_at(x2);
            }
        }
        const double b_no = 0.5 * (a + b);
        const double p_no = md * power_at(b_no);

        const double b_ex = cfg.b0 / md;
        const double p_ex = md * cfg.n0 * b_ex * (std::exp2(r0 / b_ex) - 1.0) / gain_b;

        const double l_no = static_cast<double>(cfg.n_w) * k;
        const double l_ex = std::ceil(8.0 * cfg.n_w * cfg.n_c / 3.0);
        const double avg = (l_no * p_no + l_ex * p_ex) / (l_no + l_ex);
        best = std::min(best, avg);
    }
    if (!std::isfinite(best))
        throw no_feasible_k("no symbol factor admits the targets");
    return best;
}

} // namespace hnoma::oracle
