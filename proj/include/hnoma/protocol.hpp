// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "hnoma/bandwidth.hpp"
#include "hnoma/beamforming.hpp"
#include "hnoma/channel.hpp"
#include "hnoma/errors.hpp"
#include "hnoma/oracle.hpp"
#include "hnoma/semantic_model.hpp"

namespace hnoma {

/// File and framing parameters of the two-period protocol.
struct ProtocolParams {
    int n_w = 100;    // words per file
    double n_c = 5.0; // average characters per word
    int k = 4;        // semantic symbol factor

    void validate() const {
        if (n_w < 1 || !(n_c > 0.0) || k < 1)
            throw std::invalid_argument("protocol requires n_w >= 1, n_c > 0, k >= 1");
    }
};

/// Quality-of-service targets shared by every cluster.
struct Targets {
    double eps0 = 0.9; // BLEU target for semantic users
    double s0 = 2.5e4; // word-rate target, words/s
    double r0 = 1e6;   // bit-user rate target, bit/s

    void validate() const {
        if (!(eps0 > 0.0) || !(eps0 < 1.0) || !(s0 > 0.0) || !(r0 > 0.0))
            throw std::invalid_argument("targets require 0 < eps0 < 1, s0 > 0, r0 > 0");
    }
};

/// Symbol counts of the NOMA period (semantic file length times the symbol
/// factor) and the exclusive period (bit encoding of the same file under
/// ASCII + rate-1/2 coding + 64QAM: ceil(8 n_w n_c / 3) symbols). The 8/3
/// factor and n_c are configurable; other bit stacks would change them.
inline std::pair<long, long> period_lengths(const ProtocolParams& p) {
    p.validate();
    const long l_no = static_cast<long>(p.n_w) * static_cast<long>(p.k);
    const long l_ex =
        static_cast<long>(std::ceil(8.0 * static_cast<double>(p.n_w) * p.n_c / 3.0));
    return {l_no, l_ex};
}

/// Duration-weighted average of the two period powers.
inline double average_power(double p_no, double p_ex, long l_no, long l_ex) {
    if (l_no + l_ex <= 0)
        throw std::invalid_argument("period lengths must sum to a positive count");
    const double total = static_cast<double>(l_no + l_ex);
    return (static_cast<double>(l_no) * p_no + static_cast<double>(l_ex) * p_ex) / total;
}

/// Registry symbol factors that pass both feasibility screens: the word
/// rate floor fits in the budget (m k s0 <= b0) and the BLEU target lies
/// below the curve's asymptote.
inline std::vector<int> feasible_k_range(const Targets& targets, double b0, int m,
                                         const SemanticPerfModel& model) {
    targets.validate();
    std::vector<int> out;
    for (int k : model.symbol_factors()) {
        if (static_cast<double>(m) * k * targets.s0 > b0 * (1.0 + 1e-12)) continue;
        if (!(targets.eps0 < model.params(k).a_k)) continue;
        out.push_back(k);
    }
    return out;
}

/// Per-K entry of the exhaustive-search trace.
struct PerKOutcome {
    int k = 0;
    bool feasible = false;
    double avg_power_w = std::numeric_limits<double>::quiet_NaN();
};

/// Result of the joint optimization: the winning symbol factor with its
/// allocation, beams and power accounting, plus the full per-K trace.
struct JointSolution {
    int k_opt = 0;
    double avg_power_w = 0.0;
    double p_noma_w = 0.0;
    double p_excl_w = 0.0;
    BandwidthAllocation alloc;
    std::vector<BeamSolution> beams;
    std::vector<ExclusiveBeam> excl_beams;
    std::vector<bool> cluster_quasi_degraded;
    std::vector<PerKOutcome> per_k_trace;

    double quasi_degraded_fraction() const {
        if (cluster_quasi_degraded.empty()) return 0.0;
        double n = 0.0;
        for (bool q : cluster_quasi_degraded) n += q ? 1.0 : 0.0;
        return n / static_cast<double>(cluster_quasi_degraded.size());
    }
};

/// Static problem data shared across trials.
struct PipelineConfig {
    double n0_w_per_hz = 1e-17;
    double b0_hz = 1e6;
    ProtocolParams protocol; // `k` field ignored; the search supplies it
    SemanticPerfModel model = SemanticPerfModel::default_registry();
};

namespace detail {

struct PeriodSolution {
    std::vector<BeamSolution> beams;
    std::vector<bool> quasi_degraded;
    double power = 0.0;
};

/// Beams for every cluster at fixed bandwidths: closed form where the
/// channels are quasi-degraded, span search otherwise.
inline PeriodSolution beams_at_bandwidths(const std::vector<ClusterChannels>& channels,
                                          const std::vector<double>& b, double gamma_s0,
                                          double r0, double n0) {
    PeriodSolution out;
    out.beams.reserve(channels.size());
    out.quasi_degraded.reserve(channels.size());
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const SinrTargets t{gamma_s0, gamma_of_rate(r0, b[i]), n0 * b[i]};
        const bool qd = classify_quasi_degraded(channels[i], t.gamma_s0, t.gamma_b0, t.noise_w);
        const BeamSolution sol =
            qd ? solve_noma_beams(channels[i], t) : oracle::solve_beams_span(channels[i], t);
        out.power += sol.p_s + sol.p_b;
        out.beams.push_back(sol);
        out.quasi_degraded.push_back(qd);
    }
    return out;
}

} // namespace detail

/// Exhaustive search over the registry symbol factors. For each feasible K
/// the NOMA-period bandwidths come from block coordinate descent, the
/// exclusive-period bandwidths from the convex allocator, beams from the
/// closed form (span search where quasi-degradation fails), and the score
/// is the duration-weighted average power. The minimizer wins; infeasible
/// K values stay in the trace as markers.
inline JointSolution solve_joint(const std::vector<ClusterChannels>& channels,
                                 const Targets& targets, const PipelineConfig& cfg) {
    targets.validate();
    if (channels.empty())
        throw std::invalid_argument("need at least one cluster");
    const int m = static_cast<int>(channels.size());
    const double n0 = cfg.n0_w_per_hz;
    const double b0 = cfg.b0_hz;

    const std::vector<int> feasible = feasible_k_range(targets, b0, m, cfg.model);

    // K-independent: the exclusive period serves bit users at rate r0.
    std::vector<double> b_ex;
    std::vector<ExclusiveBeam> excl;
    double p_ex = 0.0;
    if (!feasible.empty()) {
        b_ex = allocate_exclusive(channels, targets.r0, n0, b0);
        excl.reserve(channels.size());
        for (std::size_t i = 0; i < channels.size(); ++i) {
            const double gamma_ex = detail::gamma_of_rate(targets.r0, b_ex[i]);
            excl.push_back(solve_exclusive_beam(channels[i], gamma_ex, n0 * b_ex[i]));
            p_ex += excl.back().p_b;
        }
    }

    JointSolution best;
    best.avg_power_w = std::numeric_limits<double>::infinity();
    std::vector<PerKOutcome> trace;

    for (int k : cfg.model.symbol_factors()) {
        PerKOutcome outcome;
        outcome.k = k;
        if (std::find(feasible.begin(), feasible.end(), k) == feasible.end()) {
            trace.push_back(outcome);
            continue;
        }

        const double gamma_s0 = required_linear_snr(cfg.model, k, targets.eps0);
        const double b_min = static_cast<double>(k) * targets.s0;
        auto [b_no, bcd] = bcd_allocate(channels, gamma_s0, targets.r0, n0, b0, b_min);
        auto period = detail::beams_at_bandwidths(channels, b_no, gamma_s0, targets.r0, n0);

        ProtocolParams proto = cfg.protocol;
        proto.k = k;
        const auto [l_no, l_ex] = period_lengths(proto);
        const double avg = average_power(period.power, p_ex, l_no, l_ex);

        outcome.feasible = true;
        outcome.avg_power_w = avg;
        trace.push_back(outcome);

        if (avg < best.avg_power_w) {
            best.k_opt = k;
            best.avg_power_w = avg;
            best.p_noma_w = period.power;
            best.p_excl_w = p_ex;
            best.alloc = {std::move(b_no), b_ex};
            best.beams = std::move(period.beams);
            best.excl_beams = excl;
            best.cluster_quasi_degraded = std::move(period.quasi_degraded);
        }
    }

    if (!std::isfinite(best.avg_power_w))
        throw no_feasible_k("no symbol factor admits the targets");
    best.per_k_trace = std::move(trace);
    return best;
}

} // namespace hnoma
