// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hnoma/oracle.hpp"
#include "hnoma/protocol.hpp"

using namespace hnoma;
using Catch::Approx;

namespace {

ComplexVector make_vec(std::initializer_list<std::complex<double>> vals) {
    ComplexVector v(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (auto c : vals) v[i++] = c;
    return v;
}

std::vector<ClusterChannels> rician_clusters(int m, int n, std::uint64_t seed,
                                             std::uint64_t trial) {
    RicianConfig cfg{1.0, 0.8, n, seed};
    std::vector<ClusterChannels> out;
    for (int i = 0; i < m; ++i)
        out.push_back(draw_cluster(cfg, 80.0 + 15.0 * i, 120.0 + 10.0 * i, trial,
                                   static_cast<std::uint32_t>(i)));
    return out;
}

const Targets kDefaults{0.9, 2.5e4, 1e6};

PipelineConfig default_pipeline() {
    PipelineConfig pc;
    pc.n0_w_per_hz = 1e-17;
    pc.b0_hz = 1e6;
    pc.protocol = {100, 5.0, 1};
    pc.model = SemanticPerfModel::default_registry();
    return pc;
}

} // namespace

TEST_CASE("period lengths follow the framing formulas") {
    CHECK(period_lengths({100, 5.0, 4}) == std::pair<long, long>{400, 1334});
    CHECK(period_lengths({3, 1.0, 1}) == std::pair<long, long>{3, 8});
    CHECK(period_lengths({1, 1.0, 10}) == std::pair<long, long>{10, 3});
    CHECK_THROWS_AS(period_lengths({0, 5.0, 4}), std::invalid_argument);
}

TEST_CASE("average power is duration-weighted") {
    CHECK(average_power(2.0, 4.0, 10, 10) == Approx(3.0));
    CHECK(average_power(7.0, 123.0, 5, 0) == Approx(7.0));
    CHECK(average_power(1.0, 0.0, 400, 1334) == Approx(400.0 / 1734.0));
    CHECK_THROWS_AS(average_power(1.0, 1.0, 0, 0), std::invalid_argument);
}

TEST_CASE("symbol factor screening") {
    const auto model = SemanticPerfModel::default_registry();

    // the default setup admits every registry row: 4 k s0 <= b0 up to k=10
    const auto all = feasible_k_range(kDefaults, 1e6, 4, model);
    CHECK(all == std::vector<int>{3, 4, 5, 6, 7, 8, 9, 10});

    // a 0.93 BLEU target climbs above the first three asymptotes
    const auto tight = feasible_k_range({0.93, 2.5e4, 1e6}, 1e6, 4, model);
    CHECK(tight == std::vector<int>{6, 7, 8, 9, 10});

    // an absurd word-rate target empties the list
    CHECK(feasible_k_range({0.9, 1e9, 1e6}, 1e6, 4, model).empty());
}

TEST_CASE("joint solve matches the scalar pipeline on identical channels") {
    const ComplexVector h = make_vec({{0.12, 0.05}, {-0.03, 0.08}});
    const double g = h.squaredNorm();
    ClusterChannels ch;
    ch.h_s = h;
    ch.h_b = h;

    for (int m : {1, 4}) {
        const std::vector<ClusterChannels> channels(m, ch);
        PipelineConfig pc = default_pipeline();

        const auto sol = solve_joint(channels, kDefaults, pc);

        oracle::ScalarPipelineParams params;
        params.n0 = pc.n0_w_per_hz;
        params.b0 = pc.b0_hz;
        params.m = m;
        params.n_w = pc.protocol.n_w;
        params.n_c = pc.protocol.n_c;
        const double scalar = oracle::scalar_pipeline_oracle(
            g, g, kDefaults.eps0, kDefaults.s0, kDefaults.r0, pc.model, params);
        CHECK(sol.avg_power_w == Approx(scalar).epsilon(1e-9));
    }
}

TEST_CASE("scalar pipeline scales linearly in the noise floor") {
    const double g = 0.02;
    oracle::ScalarPipelineParams params;
    params.m = 2;
    const auto model = SemanticPerfModel::default_registry();
    const double base =
        oracle::scalar_pipeline_oracle(g, g, 0.9, 2.5e4, 1e6, model, params);
    params.n0 *= 2.0;
    const double doubled =
        oracle::scalar_pipeline_oracle(g, g, 0.9, 2.5e4, 1e6, model, params);
    CHECK(doubled == Approx(2.0 * base).epsilon(1e-9));

    // shrinking every target drives the power toward zero
    params.n0 = 1e-17;
    const double small =
        oracle::scalar_pipeline_oracle(g, g, 1e-3, 1.0, 1e3, model, params);
    CHECK(small < 1e-3 * base);
}

TEST_CASE("the chosen symbol factor minimizes the trace") {
    for (std::uint64_t trial = 0; trial < 8; ++trial) {
        const auto channels = rician_clusters(4, 4, 501, trial);
        const auto sol = solve_joint(channels, kDefaults, default_pipeline());

        double best = std::numeric_limits<double>::infinity();
        int best_k = 0;
        for (const auto& entry : sol.per_k_trace) {
            if (!entry.feasible) continue;
            if (entry.avg_power_w < best) {
                best = entry.avg_power_w;
                best_k = entry.k;
            }
        }
        CHECK(sol.k_opt == best_k);
        CHECK(sol.avg_power_w == Approx(best));
        CHECK(sol.per_k_trace.size() == 8); // every registry row appears
    }
}

TEST_CASE("infeasible symbol factors stay in the trace as markers") {
    const auto channels = rician_clusters(4, 4, 501, 0);
    const Targets strict{0.93, 2.5e4, 1e6};
    const auto sol = solve_joint(channels, strict, default_pipeline());
    for (const auto& entry : sol.per_k_trace) {
        if (entry.k <= 5) {
            CHECK_FALSE(entry.feasible);
            CHECK(std::isnan(entry.avg_power_w));
        } else {
            CHECK(entry.feasible);
        }
    }

    const Targets impossible{0.99, 2.5e4, 1e6};
    CHECK_THROWS_AS(solve_joint(channels, impossible, default_pipeline()), no_feasible_k);
}

TEST_CASE("raising any target never lowers the average power") {
    const auto channels = rician_clusters(4, 4, 77, 3);
    const PipelineConfig pc = default_pipeline();

    double prev = 0.0;
    for (double eps0 : {0.7, 0.8, 0.9}) {
        const auto sol = solve_joint(channels, {eps0, 2.5e4, 1e6}, pc);
        CHECK(sol.avg_power_w >= prev * (1.0 - 1e-12));
        prev = sol.avg_power_w;
    }
    prev = 0.0;
    for (double r0 : {5e5, 1e6, 1.5e6}) {
        const auto sol = solve_joint(channels, {0.9, 2.5e4, r0}, pc);
        CHECK(sol.avg_power_w >= prev * (1.0 - 1e-12));
        prev = sol.avg_power_w;
    }
    prev = 0.0;
    for (double s0 : {1e4, 2.5e4, 5e4}) {
        const auto sol = solve_joint(channels, {0.9, s0, 1e6}, pc);
        CHECK(sol.avg_power_w >= prev * (1.0 - 1e-12));
        prev = sol.avg_power_w;
    }
}

TEST_CASE("returned solution honors every constraint") {
    const PipelineConfig pc = default_pipeline();
    for (std::uint64_t trial = 0; trial < 6; ++trial) {
        const auto channels = rician_clusters(4, 4, 99, trial);
        const auto sol = solve_joint(channels, kDefaults, pc);

        REQUIRE(sol.beams.size() == channels.size());
        REQUIRE(sol.excl_beams.size() == channels.size());

        double p_no = 0.0, p_ex = 0.0, b_no_sum = 0.0, b_ex_sum = 0.0;
        for (std::size_t i = 0; i < channels.size(); ++i) {
            const double b_no = sol.alloc.b_noma[i];
            const double b_ex = sol.alloc.b_excl[i];
            b_no_sum += b_no;
            b_ex_sum += b_ex;

            // word rate floor
            CHECK(word_rate(b_no, sol.k_opt) >= kDefaults.s0 * (1.0 - 1e-9));

            // BLEU target at the achieved semantic SNR (dB)
            const double snr_db = 10.0 * std::log10(sol.beams[i].achieved_snr_s);
            CHECK(bleu(pc.model, sol.k_opt, snr_db) >= kDefaults.eps0 - 1e-9);

            // bit rate in both periods
            const double noise_no = pc.n0_w_per_hz * b_no;
            CHECK(rate_b_noma(channels[i], sol.beams[i], b_no, noise_no) >=
                  kDefaults.r0 * (1.0 - 1e-6));
            const double snr_ex = sol.excl_beams[i].p_b *
                                  std::norm(channels[i].h_b.dot(sol.excl_beams[i].dir_b)) /
                                  (pc.n0_w_per_hz * b_ex);
            CHECK(b_ex * std::log2(1.0 + snr_ex) >= kDefaults.r0 * (1.0 - 1e-6));

            p_no += sol.beams[i].p_s + sol.beams[i].p_b;
            p_ex += sol.excl_beams[i].p_b;
        }
        CHECK(b_no_sum <= pc.b0_hz * (1.0 + 1e-9));
        CHECK(b_ex_sum <= pc.b0_hz * (1.0 + 1e-9));

        // power accounting line up with the per-cluster sums
        CHECK(sol.p_noma_w == Approx(p_no).epsilon(1e-12));
        CHECK(sol.p_excl_w == Approx(p_ex).epsilon(1e-12));
        const auto [l_no, l_ex] =
            period_lengths({pc.protocol.n_w, pc.protocol.n_c, sol.k_opt});
        CHECK(sol.avg_power_w ==
              Approx(average_power(sol.p_noma_w, sol.p_excl_w, l_no, l_ex)).epsilon(1e-12));
    }
}

TEST_CASE("joint solve is deterministic") {
    const auto channels = rician_clusters(4, 4, 7, 0);
    const auto a = solve_joint(channels, kDefaults, default_pipeline());
    const auto b = solve_joint(channels, kDefaults, default_pipeline());
    CHECK(a.k_opt == b.k_opt);
    CHECK(a.avg_power_w == b.avg_power_w);
    CHECK(a.p_noma_w == b.p_noma_w);
}
