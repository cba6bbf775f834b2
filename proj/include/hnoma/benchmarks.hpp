// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hnoma/bandwidth.hpp"
#include "hnoma/beamforming.hpp"
#include "hnoma/channel.hpp"
#include "hnoma/oracle.hpp"
#include "hnoma/protocol.hpp"
#include "hnoma/rng.hpp"

namespace hnoma {

enum class Scheme { proposed, oma, zf, mrt, ob_rb, pure_bit };

inline const char* scheme_name(Scheme s) {
    switch (s) {
    case Scheme::proposed: return "proposed";
    case Scheme::oma: return "oma";
    case Scheme::zf: return "zf";
    case Scheme::mrt: return "mrt";
    case Scheme::ob_rb: return "ob_rb";
    case Scheme::pure_bit: return "pure_bit";
    }
    return "?";
}

/// Outcome of one comparison scheme on one channel draw. Schemes reuse the
/// symbol factor the proposed scheme selected, so the comparison isolates
/// beamforming and bandwidth policy.
struct BenchmarkResult {
    Scheme scheme = Scheme::oma;
    bool feasible = false;
    double avg_power_w = std::numeric_limits<double>::quiet_NaN();
    double p_noma_w = std::numeric_limits<double>::quiet_NaN();
    double p_excl_w = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<double, double>> per_cluster; // (p_s, p_b), NOMA period
    double qd_fraction = 0.0;
};

/// Shared benchmark inputs: the physical constants plus the symbol factor
/// chosen by the proposed run.
struct BenchmarkConfig {
    double n0_w_per_hz = 1e-17;
    double b0_hz = 1e6;
    int k = 8;
    ProtocolParams protocol;
    const SemanticPerfModel* model = nullptr;
};

namespace detail {

/// Even-split exclusive period shared by OMA/ZF/MRT; single user per
/// cluster, so all beam rules collapse to the matched filter.
inline double exclusive_power_even(const std::vector<ClusterChannels>& channels,
                                   double r0, double n0, double b0) {
    const double b = b0 / static_cast<double>(channels.size());
    double p = 0.0;
    for (const auto& ch : channels)
        p += solve_exclusive_beam(ch, gamma_of_rate(r0, b), n0 * b).p_b;
    return p;
}

inline double qd_fraction_at(const std::vector<ClusterChannels>& channels,
                             const std::vector<double>& b, double gamma_s0, double r0,
                             double n0) {
    double n = 0.0;
    for (std::size_t i = 0; i < channels.size(); ++i)
        n += classify_quasi_degraded(channels[i], gamma_s0, gamma_of_rate(r0, b[i]),
                                     n0 * b[i])
                 ? 1.0
                 : 0.0;
    return n / static_cast<double>(channels.size());
}

inline BenchmarkResult infeasible_result(Scheme s) {
    BenchmarkResult r;
    r.scheme = s;
    return r;
}

inline void finalize(BenchmarkResult& r, const BenchmarkConfig& cfg, double p_no,
                     double p_ex) {
    ProtocolParams proto = cfg.protocol;
    proto.k = cfg.k;
    const auto [l_no, l_ex] = period_lengths(proto);
    r.feasible = true;
    r.p_noma_w = p_no;
    r.p_excl_w = p_ex;
    r.avg_power_w = average_power(p_no, p_ex, l_no, l_ex);
}

} // namespace detail

/// OMA benchmark: even bandwidth split, matched-filter directions, no SIC
/// anywhere — each user treats the other beam as noise. Powers solve the
/// coupled 2x2 system with both SINRs pinned; the system turns infeasible
/// once the interference product reaches unity.
inline BenchmarkResult solve_oma(const std::vector<ClusterChannels>& channels,
                                 const Targets& targets, const BenchmarkConfig& cfg) {
    BenchmarkResult r;
    r.scheme = Scheme::oma;
    const double m = static_cast<double>(channels.size());
    const double b = cfg.b0_hz / m;
    if (static_cast<double>(cfg.k) * targets.s0 > b * (1.0 + 1e-12))
        return r; // even split cannot carry the word rate at this K
    const double noise = cfg.n0_w_per_hz * b;
    const double gamma_s0 = required_linear_snr(*cfg.model, cfg.k, targets.eps0);
    const double gamma_b0 = detail::gamma_of_rate(targets.r0, b);

    double p_no = 0.0;
    for (const auto& ch : channels) {
        const double g_s = ch.h_s.squaredNorm();
        const double g_b = ch.h_b.squaredNorm();
        const double cross_sb = std::norm(ch.h_s.dot(ch.h_b)) / g_b; // b-beam gain at s
        const double cross_bs = std::norm(ch.h_b.dot(ch.h_s)) / g_s; // s-beam gain at b

        const double rho = gamma_s0 * gamma_b0 * cross_sb * cross_bs / (g_s * g_b);
        if (rho >= 1.0) return detail::infeasible_result(Scheme::oma);

        // [ g_s          -gamma_s0 c_sb ] [p_s]   [gamma_s0 N]
        // [ -gamma_b0 c_bs    g_b       ] [p_b] = [gamma_b0 N]
        const double det = g_s * g_b * (1.0 - rho);
        const double p_s =
            (gamma_s0 * noise * g_b + gamma_s0 * cross_sb * gamma_b0 * noise) / det;
        const double p_b =
            (gamma_b0 * noise * g_s + gamma_b0 * cross_bs * gamma_s0 * noise) / det;
        if (!(p_s >= 0.0) || !(p_b >= 0.0)) return detail::infeasible_result(Scheme::oma);
        r.per_cluster.emplace_back(p_s, p_b);
        p_no += p_s + p_b;
    }
    const double p_ex =
        detail::exclusive_power_even(channels, targets.r0, cfg.n0_w_per_hz, cfg.b0_hz);
    detail::finalize(r, cfg, p_no, p_ex);
    r.qd_fraction = detail::qd_fraction_at(
        channels, std::vector<double>(channels.size(), b), gamma_s0, targets.r0,
        cfg.n0_w_per_hz);
    return r;
}

/// Zero-forcing benchmark: each beam lives in the null space of the other
/// user's channel, so both links are interference-free and powers decouple.
/// Collapses (power diverges) as the channels close their principal angle.
inline BenchmarkResult solve_zf(const std::vector<ClusterChannels>& channels,
                                const Targets& targets, const BenchmarkConfig& cfg) {
    BenchmarkResult r;
    r.scheme = Scheme::zf;
    const double m = static_cast<double>(channels.size());
    const double b = cfg.b0_hz / m;
    if (static_cast<double>(cfg.k) * targets.s0 > b * (1.0 + 1e-12)) return r;
    const double noise = cfg.n0_w_per_hz * b;
    const double gamma_s0 = required_linear_snr(*cfg.model, cfg.k, targets.eps0);
    const double gamma_b0 = detail::gamma_of_rate(targets.r0, b);

    double p_no = 0.0;
    for (const auto& ch : channels) {
        if (ch.h_s.size() < 2) return detail::infeasible_result(Scheme::zf);
        const double g_s = ch.h_s.squaredNorm();
        const double g_b = ch.h_b.squaredNorm();
        // squared norms of the channel components orthogonal to the peer
        const double e_s = g_s - std::norm(ch.h_b.dot(ch.h_s)) / g_b;
        const double e_b = g_b - std::norm(ch.h_s.dot(ch.h_b)) / g_s;
        if (!(e_s > 1e-12 * g_s) || !(e_b > 1e-12 * g_b))
            return detail::infeasible_result(Scheme::zf);
        const double p_s = gamma_s0 * noise / e_s;
        const double p_b = gamma_b0 * noise / e_b;
        r.per_cluster.emplace_back(p_s, p_b);
        p_no += p_s + p_b;
    }
    const double p_ex =
        detail::exclusive_power_even(channels, targets.r0, cfg.n0_w_per_hz, cfg.b0_hz);
    detail::finalize(r, cfg, p_no, p_ex);
    r.qd_fraction = detail::qd_fraction_at(
        channels, std::vector<double>(channels.size(), b), gamma_s0, targets.r0,
        cfg.n0_w_per_hz);
    return r;
}

/// MRT benchmark: matched-filter directions, but the decoding structure of
/// the proposed scheme is kept (semantic user still performs SIC), so the
/// constraint set matches the proposed one at fixed directions. Infeasible
/// when the bit beam has no projection onto the semantic channel.
inline BenchmarkResult solve_mrt(const std::vector<ClusterChannels>& channels,
                                 const Targets& targets, const BenchmarkConfig& cfg) {
    BenchmarkResult r;
    r.scheme = Scheme::mrt;
    const double m = static_cast<double>(channels.size());
    const double b = cfg.b0_hz / m;
    if (static_cast<double>(cfg.k) * targets.s0 > b * (1.0 + 1e-12)) return r;
    const double noise = cfg.n0_w_per_hz * b;
    const double gamma_s0 = required_linear_snr(*cfg.model, cfg.k, targets.eps0);
    const double gamma_b0 = detail::gamma_of_rate(targets.r0, b);

    double p_no = 0.0;
    for (const auto& ch : channels) {
        const double g_s = ch.h_s.squaredNorm();
        const double g_b = ch.h_b.squaredNorm();
        const double cross_sb = std::norm(ch.h_s.dot(ch.h_b)) / g_b; // b-beam at s
        const double cross_bs = std::norm(ch.h_b.dot(ch.h_s)) / g_s; // s-beam at b

        const double p_s = gamma_s0 * noise / g_s;
        double p_b = gamma_b0 * (p_s * cross_bs + noise) / g_b;
        if (gamma_b0 > 0.0) {
            if (!(cross_sb > 1e-12 * g_s)) return detail::infeasible_result(Scheme::mrt);
            p_b = std::max(p_b, gamma_b0 * (p_s * g_s + noise) / cross_sb);
        }
        r.per_cluster.emplace_back(p_s, p_b);
        p_no += p_s + p_b;
    }
    const double p_ex =
        detail::exclusive_power_even(channels, targets.r0, cfg.n0_w_per_hz, cfg.b0_hz);
    detail::finalize(r, cfg, p_no, p_ex);
    r.qd_fraction = detail::qd_fraction_at(
        channels, std::vector<double>(channels.size(), b), gamma_s0, targets.r0,
        cfg.n0_w_per_hz);
    return r;
}

/// OB-RB benchmark: optimal (proposed) beamforming at a random bandwidth
/// split. The split is uniform over the feasible simplex: floors first,
/// the leftover budget divided by a flat Dirichlet draw. The exclusive
/// period re-rolls its own split.
inline BenchmarkResult solve_ob_rb(const std::vector<ClusterChannels>& channels,
                                   const Targets& targets, const BenchmarkConfig& cfg,
                                   StreamRng& rng) {
    BenchmarkResult r;
    r.scheme = Scheme::ob_rb;
    const std::size_t m = channels.size();
    const double floor = static_cast<double>(cfg.k) * targets.s0;
    if (floor * static_cast<double>(m) > cfg.b0_hz * (1.0 + 1e-12)) return r;
    const double gamma_s0 = required_linear_snr(*cfg.model, cfg.k, targets.eps0);

    const auto simplex_split = [&](double budget, double lo) {
        std::vector<double> w(m);
        double sum = 0.0;
        for (double& v : w) {
            v = rng.next_exponential();
            sum += v;
        }
        std::vector<double> b(m);
        for (std::size_t i = 0; i < m; ++i) b[i] = lo + (budget - lo * m) * w[i] / sum;
        return b;
    };

    const std::vector<double> b_no = simplex_split(cfg.b0_hz, floor);
    double p_no = 0.0;
    double qd = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const SinrTargets t{gamma_s0, detail::gamma_of_rate(targets.r0, b_no[i]),
                            cfg.n0_w_per_hz * b_no[i]};
        const bool is_qd =
            classify_quasi_degraded(channels[i], t.gamma_s0, t.gamma_b0, t.noise_w);
        const BeamSolution sol = is_qd ? solve_noma_beams(channels[i], t)
                                       : oracle::solve_beams_span(channels[i], t);
        r.per_cluster.emplace_back(sol.p_s, sol.p_b);
        p_no += sol.p_s + sol.p_b;
        qd += is_qd ? 1.0 : 0.0;
    }

    const std::vector<double> b_ex = simplex_split(cfg.b0_hz, 0.0);
    double p_ex = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        p_ex += solve_exclusive_beam(channels[i],
                                     detail::gamma_of_rate(targets.r0, b_ex[i]),
                                     cfg.n0_w_per_hz * b_ex[i])
                    .p_b;

    detail::finalize(r, cfg, p_no, p_ex);
    r.qd_fraction = qd / static_cast<double>(m);
    return r;
}

} // namespace hnoma
