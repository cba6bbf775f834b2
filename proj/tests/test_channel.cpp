// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <sstream>

#include "hnoma/beamforming.hpp"
#include "hnoma/channel.hpp"

using namespace hnoma;
using Catch::Approx;

namespace {

ComplexVector make_vec(std::initializer_list<std::complex<double>> vals) {
    ComplexVector v(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (auto c : vals) v[i++] = c;
    return v;
}

} // namespace

TEST_CASE("infinite Rician factor gives the pure steering vector") {
    const double inf = std::numeric_limits<double>::infinity();
    RicianConfig cfg{inf, 0.8, 4, 7};
    const auto h = draw_channel(cfg, 1.0, {0, 0, 0});
    // at d = 1 the path-loss scale is 1, so every entry has unit modulus
    for (Eigen::Index i = 0; i < h.size(); ++i)
        CHECK(std::abs(h[i]) == Approx(1.0).epsilon(1e-12));

    // the same stream at distance d scales by exactly d^(-mu/2)
    const auto h4 = draw_channel(cfg, 4.0, {0, 0, 0});
    const double want = std::pow(4.0, -0.8 / 2.0);
    for (Eigen::Index i = 0; i < h.size(); ++i)
        CHECK(std::abs(h4[i] / h[i]) == Approx(want).epsilon(1e-12));
}

TEST_CASE("pure scattering has the configured per-entry variance") {
    RicianConfig cfg{0.0, 0.8, 2, 99};
    const double d = 3.0;
    const double want = 1.0 / std::pow(d, cfg.path_loss_exp);
    double acc = 0.0;
    const int draws = 100000;
    for (int t = 0; t < draws; ++t) {
        const auto h = draw_channel(cfg, d, {static_cast<std::uint64_t>(t), 0, 0});
        acc += h.squaredNorm();
    }
    const double per_entry = acc / (draws * cfg.num_antennas);
    CHECK(per_entry == Approx(want).epsilon(0.03));
}

TEST_CASE("mixture preserves unit per-entry power") {
    RicianConfig cfg{1.0, 0.8, 4, 5};
    const double d = 2.0;
    const double want = cfg.num_antennas / std::pow(d, cfg.path_loss_exp);
    double acc = 0.0;
    const int draws = 100000;
    for (int t = 0; t < draws; ++t)
        acc += draw_channel(cfg, d, {static_cast<std::uint64_t>(t), 1, 0}).squaredNorm();
    CHECK(acc / draws == Approx(want).epsilon(0.03));
}

TEST_CASE("draws are reproducible and stream-separated") {
    RicianConfig cfg{1.0, 0.8, 4, 1234};
    const auto a = draw_channel(cfg, 10.0, {5, 2, 0});
    const auto b = draw_channel(cfg, 10.0, {5, 2, 0});
    REQUIRE(a.size() == b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        CHECK(a[i].real() == b[i].real());
        CHECK(a[i].imag() == b[i].imag());
    }

    // different stream ids decorrelate: Pearson correlation of the real
    // parts (centered, so the deterministic LoS mean drops out) stays small
    double su = 0.0, sv = 0.0, suv = 0.0, suu = 0.0, svv = 0.0;
    const int draws = 10000;
    for (int t = 0; t < draws; ++t) {
        const auto u = draw_channel(cfg, 10.0, {static_cast<std::uint64_t>(t), 0, 0});
        const auto v = draw_channel(cfg, 10.0, {static_cast<std::uint64_t>(t), 0, 1});
        const double x = u[0].real(), y = v[0].real();
        su += x;
        sv += y;
        suv += x * y;
        suu += x * x;
        svv += y * y;
    }
    const double n = draws;
    const double cov = suv / n - (su / n) * (sv / n);
    const double var_u = suu / n - (su / n) * (su / n);
    const double var_v = svv / n - (sv / n) * (sv / n);
    CHECK(std::abs(cov / std::sqrt(var_u * var_v)) < 0.05);
}

TEST_CASE("single antenna draws degenerate to scalars") {
    RicianConfig cfg{1.0, 0.8, 1, 3};
    const auto ch = draw_cluster(cfg, 60.0, 80.0, 0, 0);
    CHECK(ch.h_s.size() == 1);
    CHECK(ch.h_b.size() == 1);
    CHECK(ch.d_s == Approx(60.0));
    CHECK(ch.h_s.norm() > 0.0);
    CHECK_FALSE(ch.quasi_degraded.has_value());
}

TEST_CASE("config and argument validation") {
    CHECK_THROWS_AS(draw_channel({-1.0, 0.8, 4, 1}, 10.0, {}), std::invalid_argument);
    CHECK_THROWS_AS(draw_channel({1.0, 0.0, 4, 1}, 10.0, {}), std::invalid_argument);
    CHECK_THROWS_AS(draw_channel({1.0, 0.8, 0, 1}, 10.0, {}), std::invalid_argument);
    CHECK_THROWS_AS(draw_channel({1.0, 0.8, 4, 1}, 0.0, {}), std::invalid_argument);
}

TEST_CASE("identical channels classify as quasi-degraded, orthogonal do not") {
    ClusterChannels same;
    same.h_s = make_vec({{1.0, 0.5}, {0.3, -0.2}});
    same.h_b = same.h_s;
    CHECK(classify_quasi_degraded(same, 1.5, 2.0, 1e-11));

    ClusterChannels ortho;
    ortho.h_s = make_vec({{1.0, 0.0}, {0.0, 0.0}});
    ortho.h_b = make_vec({{0.0, 0.0}, {1.0, 0.0}});
    CHECK_FALSE(classify_quasi_degraded(ortho, 1.5, 2.0, 1e-11));

    ClusterChannels zero;
    zero.h_s = make_vec({{0.0, 0.0}});
    zero.h_b = make_vec({{1.0, 0.0}});
    CHECK_THROWS_AS(classify_quasi_degraded(zero, 1.0, 1.0, 1e-11), std::invalid_argument);
}

TEST_CASE("classification is invariant to common phase rotation") {
    RicianConfig cfg{1.0, 0.8, 4, 77};
    for (int t = 0; t < 50; ++t) {
        auto ch = draw_cluster(cfg, 100.0, 120.0, static_cast<std::uint64_t>(t), 0);
        const bool base = classify_quasi_degraded(ch, 1.8, 3.0, 1e-12);
        const std::complex<double> rot = std::polar(1.0, 1.234);
        ClusterChannels rotated = ch;
        rotated.h_s = ch.h_s * rot;
        CHECK(classify_quasi_degraded(rotated, 1.8, 3.0, 1e-12) == base);
        rotated = ch;
        rotated.h_b = ch.h_b * rot;
        CHECK(classify_quasi_degraded(rotated, 1.8, 3.0, 1e-12) == base);
    }
}

TEST_CASE("quasi-degradation frequency under Rician draws is recorded") {
    RicianConfig cfg{1.0, 0.8, 4, 2024};
    int qd = 0;
    const int draws = 10000;
    for (int t = 0; t < draws; ++t) {
        const auto ch = draw_cluster(cfg, 100.0, 100.0, static_cast<std::uint64_t>(t), 0);
        if (classify_quasi_degraded(ch, 1.8, 3.0, 4e-12)) ++qd;
    }
    const double freq = static_cast<double>(qd) / draws;
    WARN("quasi-degraded fraction at N=4, k0=1: " << freq);
    CHECK(freq > 0.0);
    CHECK(freq <= 1.0);
}

TEST_CASE("channel dump round-trips") {
    RicianConfig cfg{1.0, 0.8, 3, 11};
    const auto ch0 = draw_cluster(cfg, 55.0, 66.0, 0, 0);
    const auto ch1 = draw_cluster(cfg, 70.0, 90.0, 0, 1);

    std::stringstream csv;
    dump_channels_csv_header(csv);
    dump_channels_csv(csv, 0, 0, ch0);
    dump_channels_csv(csv, 0, 1, ch1);

    const auto loaded = load_channels_csv(csv);
    REQUIRE(loaded.size() == 2);
    const auto& back = loaded.at({0, 1});
    REQUIRE(back.h_s.size() == ch1.h_s.size());
    for (Eigen::Index i = 0; i < back.h_s.size(); ++i) {
        CHECK(back.h_s[i] == ch1.h_s[i]);
        CHECK(back.h_b[i] == ch1.h_b[i]);
    }
}
