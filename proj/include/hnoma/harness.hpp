// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "hnoma/bandwidth.hpp"
#include "hnoma/benchmarks.hpp"
#include "hnoma/channel.hpp"
#include "hnoma/errors.hpp"
#include "hnoma/protocol.hpp"
#include "hnoma/rng.hpp"

namespace hnoma {

/// Everything one experiment needs. Defaults follow the reference setup:
/// -140 dBm/Hz noise density, 1 MHz budget, four clusters, Rician factor 1,
/// path loss exponent 0.8, BLEU target 0.9.
struct ExperimentConfig {
    double n0_w_per_hz = 1e-17;
    double b0_hz = 1e6;
    int m = 4;
    int n = 4;
    double rician_factor = 1.0;
    double path_loss_exp = 0.8;
    Targets targets;            // eps0 = 0.9, s0 = 2.5e4 words/s, r0 = 1 Mbit/s
    int n_w = 100;              // words per file
    double n_c = 5.0;           // characters per word
    int trials = 200;
    std::uint64_t seed = 1;
    double bit_user_snr_db = 20.0; // SNR a bit user needs for the same BLEU
    double dist_min_m = 50.0;
    double dist_max_m = 200.0;

    void validate() const {
        targets.validate();
        if (!(n0_w_per_hz > 0.0) || !(b0_hz > 0.0))
            throw config_error("n0 and b0 must be positive");
        if (m < 1 || n < 1 || trials < 1)
            throw config_error("m, n and trials must be at least 1");
        if (!(rician_factor >= 0.0) || !(path_loss_exp > 0.0))
            throw config_error("bad fading parameters");
        if (n_w < 1 || !(n_c > 0.0))
            throw config_error("bad protocol parameters");
        if (!(dist_min_m > 0.0) || !(dist_max_m >= dist_min_m))
            throw config_error("bad distance range");
    }
};

/// `key = value` config file; '#' starts a comment; unknown keys rejected.
inline ExperimentConfig load_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            bool blank = true;
            for (char c : line) blank &= std::isspace(static_cast<unsigned char>(c)) != 0;
            if (blank) continue;
            throw config_error("line " + std::to_string(lineno) + ": expected key = value");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "n0_w_per_hz") cfg.n0_w_per_hz = std::stod(value);
            else if (key == "b0_hz") cfg.b0_hz = std::stod(value);
            else if (key == "m") cfg.m = std::stoi(value);
            else if (key == "n") cfg.n = std::stoi(value);
            else if (key == "rician_factor") cfg.rician_factor = std::stod(value);
            else if (key == "path_loss_exp") cfg.path_loss_exp = std::stod(value);
            else if (key == "eps0") cfg.targets.eps0 = std::stod(value);
            else if (key == "s0") cfg.targets.s0 = std::stod(value);
            else if (key == "r0") cfg.targets.r0 = std::stod(value);
            else if (key == "n_w") cfg.n_w = std::stoi(value);
            else if (key == "n_c") cfg.n_c = std::stod(value);
            else if (key == "trials") cfg.trials = std::stoi(value);
            else if (key == "seed") cfg.seed = std::stoull(value);
            else if (key == "bit_user_snr_db") cfg.bit_user_snr_db = std::stod(value);
            else if (key == "dist_min_m") cfg.dist_min_m = std::stod(value);
            else if (key == "dist_max_m") cfg.dist_max_m = std::stod(value);
            else throw config_error("unknown key '" + key + "'");
        } catch (const config_error&) {
            throw;
        } catch (const std::exception&) {
            throw config_error("bad value for '" + key + "': " + value);
        }
    }
    cfg.validate();
    return cfg;
}

enum class SweepAxis { single, antennas, clusters, k, bit_compare };

struct RunOptions {
    std::vector<Scheme> schemes = {Scheme::proposed, Scheme::oma, Scheme::zf, Scheme::mrt,
                                   Scheme::ob_rb};
    int workers = 1;
};

struct RunSummary {
    long rows = 0;
    long feasible_proposed = 0;
};

namespace detail {

// Sub-stream purposes under one (trial, cluster) coordinate.
inline constexpr std::uint32_t kStreamDistances = 2;
inline constexpr std::uint32_t kStreamObRbSplit = 3;

/// Mirror of the proposed pipeline with the semantic user swapped for a bit
/// user that needs a fixed SNR, and the SIC order picked by channel gain.
/// Protocol, floors and the symbol factor are inherited from the proposed
/// run so the comparison isolates the decode threshold.
inline BenchmarkResult solve_pure_bit(const std::vector<ClusterChannels>& channels,
                                      const Targets& targets, const BenchmarkConfig& cfg,
                                      double bit_user_snr_db) {
    BenchmarkResult r;
    r.scheme = Scheme::pure_bit;
    const std::size_t m = channels.size();
    const double n0 = cfg.n0_w_per_hz;
    const double b0 = cfg.b0_hz;
    const double r0 = targets.r0;
    const double gamma_bit = std::pow(10.0, bit_user_snr_db / 10.0);
    const double floor = static_cast<double>(cfg.k) * targets.s0;
    if (floor * static_cast<double>(m) > b0 * (1.0 + 1e-12)) return r;

    // Role channels: the stronger user performs SIC (s-role). `rate_weak`
    // marks clusters whose weak user carries the rate target (its SINR
    // threshold then varies with bandwidth, like the proposed scheme).
    std::vector<ClusterChannels> roles(m);
    std::vector<bool> rate_weak(m);
    for (std::size_t i = 0; i < m; ++i) {
        const bool fixed_user_strong =
            channels[i].h_s.squaredNorm() >= channels[i].h_b.squaredNorm();
        roles[i].h_s = fixed_user_strong ? channels[i].h_s : channels[i].h_b;
        roles[i].h_b = fixed_user_strong ? channels[i].h_b : channels[i].h_s;
        rate_weak[i] = fixed_user_strong;
    }

    const auto thresholds = [&](std::size_t i, double b) {
        const double rate_thr = gamma_of_rate(r0, b);
        const double gs = rate_weak[i] ? gamma_bit : rate_thr;
        const double gb = rate_weak[i] ? rate_thr : gamma_bit;
        return std::pair<double, double>{gs, gb};
    };
    const auto cluster_power = [&](std::size_t i, double b) {
        const auto [gs, gb] = thresholds(i, b);
        const double g_brole = roles[i].h_b.squaredNorm();
        ComplexVector dir;
        const double g_s = roles[i].h_s.squaredNorm();
        const double cos2 = std::norm(roles[i].h_s.dot(roles[i].h_b)) / (g_s * g_brole);
        if (1.0 - cos2 < 1e-16)
            dir = roles[i].h_b / std::sqrt(g_brole);
        else
            dir = apply_a_inverse_sm(roles[i].h_b, gb, roles[i].h_s).normalized();
        const double zeta = proj_gain(roles[i].h_s, dir);
        const double kappa = proj_gain(roles[i].h_b, dir);
        const double noise = n0 * b;
        return gs * noise / zeta + gb * noise / g_brole * (gs * kappa / zeta + 1.0);
    };
    const auto total_power = [&](const std::vector<double>& b) {
        double p = 0.0;
        for (std::size_t i = 0; i < m; ++i) p += cluster_power(i, b[i]);
        return p;
    };

    // Block coordinate descent, coefficients case-split on which role
    // carries the rate target.
    std::vector<double> b(m, b0 / static_cast<double>(m));
    double p_prev = total_power(b);
    const double delta0 = 1e-6 * p_prev;
    for (int t = 0; t < 50; ++t) {
        std::vector<double> alpha(m), beta(m), floors(m, floor);
        for (std::size_t i = 0; i < m; ++i) {
            const auto [gs, gb] = thresholds(i, b[i]);
            const double g_brole = roles[i].h_b.squaredNorm();
            ComplexVector dir;
            const double g_s = roles[i].h_s.squaredNorm();
            const double cos2 =
                std::norm(roles[i].h_s.dot(roles[i].h_b)) / (g_s * g_brole);
            if (1.0 - cos2 < 1e-16)
                dir = roles[i].h_b / std::sqrt(g_brole);
            else
                dir = apply_a_inverse_sm(roles[i].h_b, gb, roles[i].h_s).normalized();
            const double zeta = proj_gain(roles[i].h_s, dir);
            const double kappa = proj_gain(roles[i].h_b, dir);
            if (rate_weak[i]) {
                alpha[i] = gamma_bit * n0 / zeta;
                beta[i] = n0 * (gamma_bit * kappa / zeta + 1.0) / g_brole;
            } else {
                alpha[i] = gamma_bit * n0 / g_brole;
                beta[i] = n0 * (1.0 + gamma_bit * kappa / g_brole) / zeta;
            }
        }
        b = allocate_separable(alpha, beta, r0, b0, floors);
        const double p = total_power(b);
        if (std::abs(p_prev - p) <= delta0) {
            p_prev = p;
            break;
        }
        p_prev = p;
    }

    double p_no = 0.0;
    double qd = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const auto [gs, gb] = thresholds(i, b[i]);
        const SinrTargets t{gs, gb, n0 * b[i]};
        const bool is_qd = classify_quasi_degraded(roles[i], gs, gb, t.noise_w);
        const BeamSolution sol =
            is_qd ? solve_noma_beams(roles[i], t) : oracle::solve_beams_span(roles[i], t);
        r.per_cluster.emplace_back(sol.p_s, sol.p_b);
        p_no += sol.p_s + sol.p_b;
        qd += is_qd ? 1.0 : 0.0;
    }

    // Exclusive period: the original bit user finishes its file, exactly as
    // in the coexisting network.
    const std::vector<double> b_ex = allocate_exclusive(channels, r0, n0, b0);
    double p_ex = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        p_ex += solve_exclusive_beam(channels[i], gamma_of_rate(r0, b_ex[i]),
                                     n0 * b_ex[i])
                    .p_b;

    finalize(r, cfg, p_no, p_ex);
    r.qd_fraction = qd / static_cast<double>(m);
    return r;
}

inline std::string format_row(double sweep_value, int trial, const char* scheme, int k_opt,
                              double avg, double p_no, double p_ex, double qd,
                              bool feasible) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%g,%d,%s,%d,%.12g,%.12g,%.12g,%g,%d\n", sweep_value,
                  trial, scheme, k_opt, avg, p_no, p_ex, qd, feasible ? 1 : 0);
    return buf;
}

inline std::string benchmark_row(double sweep_value, int trial, const BenchmarkResult& b,
                                 int k_opt) {
    return format_row(sweep_value, trial, scheme_name(b.scheme), k_opt, b.avg_power_w,
                      b.p_noma_w, b.p_excl_w, b.qd_fraction, b.feasible);
}

} // namespace detail

inline constexpr const char* kCsvHeader =
    "sweep_value,trial,scheme,k_opt,avg_power_w,p_noma_w,p_excl_w,qd_fraction,feasible\n";

inline std::vector<double> sweep_values(const ExperimentConfig& cfg, SweepAxis axis) {
    switch (axis) {
    case SweepAxis::antennas: return {2, 4, 6, 8};
    case SweepAxis::clusters: return {2, 3, 4, 5};
    case SweepAxis::k: {
        std::vector<double> ks;
        for (int k : SemanticPerfModel::default_registry().symbol_factors())
            ks.push_back(static_cast<double>(k));
        return ks;
    }
    case SweepAxis::single:
    case SweepAxis::bit_compare: return {0};
    }
    return {0};
}

/// Draws the channels of one trial. Distances and fading share nothing but
/// the seed; every draw is addressed by (sweep index, trial, cluster).
inline std::vector<ClusterChannels> draw_trial_channels(const ExperimentConfig& cfg,
                                                        std::uint64_t trial_key) {
    RicianConfig rc{cfg.rician_factor, cfg.path_loss_exp, cfg.n, cfg.seed};
    std::vector<ClusterChannels> channels;
    channels.reserve(cfg.m);
    for (int c = 0; c < cfg.m; ++c) {
        StreamRng dist(cfg.seed, trial_key, static_cast<std::uint32_t>(c),
                       detail::kStreamDistances);
        const double d_s = dist.next_uniform(cfg.dist_min_m, cfg.dist_max_m);
        const double d_b = dist.next_uniform(cfg.dist_min_m, cfg.dist_max_m);
        channels.push_back(
            draw_cluster(rc, d_s, d_b, trial_key, static_cast<std::uint32_t>(c)));
    }
    return channels;
}

/// Seeded Monte-Carlo sweep. One CSV row per (sweep value, trial, scheme),
/// emitted in that order regardless of the worker count; the output is a
/// pure function of (config, axis, options).
inline RunSummary run_experiment(const ExperimentConfig& cfg, SweepAxis axis,
                                 const RunOptions& opt, std::ostream& out) {
    cfg.validate();
    const std::vector<double> values = sweep_values(cfg, axis);
    const int trials = cfg.trials;
    const long total = static_cast<long>(values.size()) * trials;

    std::vector<std::string> cells(static_cast<std::size_t>(total));
    std::vector<int> feasible_flags(static_cast<std::size_t>(total), 0);

    const auto run_cell = [&](long index) {
        const std::size_t si = static_cast<std::size_t>(index) / trials;
        const int trial = static_cast<int>(index % trials);
        const double sv = values[si];

        ExperimentConfig c = cfg;
        if (axis == SweepAxis::antennas) c.n = static_cast<int>(sv);
        if (axis == SweepAxis::clusters) c.m = static_cast<int>(sv);

        PipelineConfig pc;
        pc.n0_w_per_hz = c.n0_w_per_hz;
        pc.b0_hz = c.b0_hz;
        pc.protocol = {c.n_w, c.n_c, 1};
        pc.model = SemanticPerfModel::default_registry();
        if (axis == SweepAxis::k) {
            SemanticPerfModel one;
            const int k = static_cast<int>(sv);
            if (pc.model.has(k)) one.set(k, pc.model.params(k));
            pc.model = one;
        }

        const std::uint64_t trial_key =
            (static_cast<std::uint64_t>(si) << 40) | static_cast<std::uint64_t>(trial);
        const auto channels = draw_trial_channels(c, trial_key);

        std::string rows;
        bool proposed_ok = false;
        JointSolution joint;
        try {
            joint = solve_joint(channels, c.targets, pc);
            proposed_ok = true;
        } catch (const no_feasible_k&) {
        }

        const bool want_proposed =
            std::find(opt.schemes.begin(), opt.schemes.end(), Scheme::proposed) !=
                opt.schemes.end() ||
            axis == SweepAxis::bit_compare;
        if (want_proposed) {
            if (proposed_ok) {
                rows += detail::format_row(sv, trial, "proposed", joint.k_opt,
                                           joint.avg_power_w, joint.p_noma_w,
                                           joint.p_excl_w, joint.quasi_degraded_fraction(),
                                           true);
            } else {
                rows += detail::format_row(sv, trial, "proposed", 0,
                                           std::numeric_limits<double>::quiet_NaN(),
                                           std::numeric_limits<double>::quiet_NaN(),
                                           std::numeric_limits<double>::quiet_NaN(), 0.0,
                                           false);
            }
        }

        BenchmarkConfig bc;
        bc.n0_w_per_hz = c.n0_w_per_hz;
        bc.b0_hz = c.b0_hz;
        bc.k = proposed_ok ? joint.k_opt : 0;
        bc.protocol = {c.n_w, c.n_c, 1};
        static const SemanticPerfModel kSharedModel = SemanticPerfModel::default_registry();
        bc.model = &kSharedModel;

        if (axis == SweepAxis::bit_compare) {
            BenchmarkResult pb;
            pb.scheme = Scheme::pure_bit;
            if (proposed_ok)
                pb = detail::solve_pure_bit(channels, c.targets, bc, c.bit_user_snr_db);
            rows += detail::benchmark_row(sv, trial, pb, bc.k);
        } else {
            for (Scheme s : opt.schemes) {
                if (s == Scheme::proposed || s == Scheme::pure_bit) continue;
                BenchmarkResult b;
                b.scheme = s;
                if (proposed_ok) {
                    switch (s) {
                    case Scheme::oma: b = solve_oma(channels, c.targets, bc); break;
                    case Scheme::zf: b = solve_zf(channels, c.targets, bc); break;
                    case Scheme::mrt: b = solve_mrt(channels, c.targets, bc); break;
                    case Scheme::ob_rb: {
                        StreamRng rng(c.seed, trial_key, 0, detail::kStreamObRbSplit);
                        b = solve_ob_rb(channels, c.targets, bc, rng);
                        break;
                    }
                    default: break;
                    }
                }
                rows += detail::benchmark_row(sv, trial, b, bc.k);
            }
        }

        cells[static_cast<std::size_t>(index)] = std::move(rows);
        feasible_flags[static_cast<std::size_t>(index)] = proposed_ok ? 1 : 0;
    };

    const int workers = std::max(1, opt.workers);
    if (workers == 1) {
        for (long i = 0; i < total; ++i) run_cell(i);
    } else {
        std::atomic<long> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (long i = next.fetch_add(1); i < total; i = next.fetch_add(1))
                    run_cell(i);
            });
        }
        for (auto& th : pool) th.join();
    }

    out << kCsvHeader;
    RunSummary summary;
    for (long i = 0; i < total; ++i) {
        out << cells[static_cast<std::size_t>(i)];
        summary.feasible_proposed += feasible_flags[static_cast<std::size_t>(i)];
    }
    summary.rows = total;
    return summary;
}

/// Paired coexisting-vs-pure-bit comparison at the configured bit SNR
/// threshold.
inline RunSummary pure_bit_comparison(const ExperimentConfig& cfg, const RunOptions& opt,
                                      std::ostream& out) {
    return run_experiment(cfg, SweepAxis::bit_compare, opt, out);
}

} // namespace hnoma
