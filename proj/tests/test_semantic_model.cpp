// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "hnoma/rng.hpp"
#include "hnoma/semantic_model.hpp"

using namespace hnoma;
using Catch::Approx;

namespace {

const SemanticPerfModel& model() {
    static const SemanticPerfModel m = SemanticPerfModel::default_registry();
    return m;
}

std::vector<BleuSample> synth_samples(const LogisticParams& p, double x_lo, double x_hi,
                                      double step) {
    std::vector<BleuSample> s;
    for (double x = x_lo; x <= x_hi + 1e-12; x += step)
        s.push_back({x, logistic_bleu(p, x)});
    return s;
}

} // namespace

TEST_CASE("word rate is bandwidth over symbol factor") {
    CHECK(word_rate(1e6, 4) == Approx(2.5e5));
    CHECK(word_rate(123.0, 1) == Approx(123.0));
    CHECK(word_rate(5e5, 8) == Approx(62500.0));
    CHECK_THROWS_AS(word_rate(0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(word_rate(-1.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(word_rate(1e6, 0), std::invalid_argument);
}

TEST_CASE("bleu evaluates the registry curves") {
    // midpoint: half the asymptote
    CHECK(bleu(model(), 3, 0.262) == Approx(0.650 / 2.0).epsilon(1e-12));
    // far right: the asymptote
    CHECK(bleu(model(), 8, 1e3) == Approx(0.960).margin(1e-12));
    // independent scalar evaluation of the K=5 row at 0 dB
    const double expected = 0.916 / (1.0 + std::exp(-0.435 * (0.0 + 1.561)));
    CHECK(bleu(model(), 5, 0.0) == Approx(expected).epsilon(1e-14));
    CHECK_THROWS_AS(bleu(model(), 11, 0.0), missing_parameter);
    CHECK_THROWS_AS(bleu(model(), 2, 0.0), missing_parameter);
}

TEST_CASE("inverse bleu hits the midpoint and rejects the asymptote") {
    CHECK(inverse_bleu(model(), 8, 0.48) == Approx(-2.979).epsilon(1e-12));
    const double x = inverse_bleu(model(), 8, 0.9);
    CHECK(x == Approx(2.536).margin(2e-3));
    CHECK(bleu(model(), 8, x) == Approx(0.9).margin(1e-12));
    CHECK_THROWS_AS(inverse_bleu(model(), 3, 0.7), infeasible_target);
    CHECK_THROWS_AS(inverse_bleu(model(), 3, 0.650), infeasible_target);
    CHECK_THROWS_AS(inverse_bleu(model(), 3, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(inverse_bleu(model(), 3, -0.1), std::invalid_argument);
}

TEST_CASE("required linear SNR converts dB to ratio") {
    const double gamma = required_linear_snr(model(), 8, 0.9);
    CHECK(gamma == Approx(std::pow(10.0, inverse_bleu(model(), 8, 0.9) / 10.0)));
    CHECK(gamma == Approx(1.793).margin(2e-3));

    // a curve centred at 0 dB needs unit SNR for half its asymptote
    SemanticPerfModel centred;
    centred.set(4, {0.8, 0.5, 0.0});
    CHECK(required_linear_snr(centred, 4, 0.4) == Approx(1.0).epsilon(1e-12));

    CHECK(required_linear_snr(model(), 10, 0.485) ==
          Approx(std::pow(10.0, -0.3897)).epsilon(1e-12));
}

TEST_CASE("curves are monotone, bounded, and invertible") {
    for (int k : model().symbol_factors()) {
        const LogisticParams& p = model().params(k);
        double prev = -1.0;
        for (double x = -20.0; x <= 20.0; x += 0.25) {
            const double y = bleu(model(), k, x);
            CHECK(y > 0.0);
            CHECK(y < p.a_k);
            CHECK(y > prev);
            prev = y;

            const double back = inverse_bleu(model(), k, y);
            CHECK(back == Approx(x).margin(1e-9));
        }
    }
}

TEST_CASE("analytic slope matches central differences") {
    const double h = 1e-5;
    for (int k : model().symbol_factors()) {
        const LogisticParams& p = model().params(k);
        for (double x : {-8.0, -2.0, 0.0, 1.5, 7.0}) {
            const double numeric =
                (logistic_bleu(p, x + h) - logistic_bleu(p, x - h)) / (2.0 * h);
            CHECK(logistic_bleu_slope(p, x) == Approx(numeric).margin(1e-6));
            CHECK(logistic_bleu_slope(p, x) > 0.0);
        }
    }
}

TEST_CASE("fit recovers every registry row from noiseless data") {
    for (int k : model().symbol_factors()) {
        const LogisticParams& truth = model().params(k);
        const auto fitted = fit_logistic(synth_samples(truth, -10.0, 10.0, 1.0));
        CHECK(fitted.a_k == Approx(truth.a_k).margin(1e-6));
        CHECK(fitted.l_k == Approx(truth.l_k).margin(1e-6));
        CHECK(fitted.x0_k == Approx(truth.x0_k).margin(1e-6));
    }
}

TEST_CASE("fit rejects degenerate data") {
    CHECK_THROWS_AS(fit_logistic({{0, 0.5}, {1, 0.6}, {2, 0.7}}), fit_failure);
    std::vector<BleuSample> flat;
    for (double x = -5; x <= 5; x += 1) flat.push_back({x, 0.42});
    CHECK_THROWS_AS(fit_logistic(flat), fit_failure);
    CHECK_THROWS_AS(fit_logistic({{0, 0.5}, {1, 1.5}, {2, 0.7}, {3, 0.6}}),
                    std::invalid_argument);
}

TEST_CASE("fit tolerates measurement noise") {
    const LogisticParams truth = model().params(3);
    StreamRng rng(20240901, 0);
    std::vector<double> err_a, err_l, err_x0;
    for (int t = 0; t < 20; ++t) {
        std::vector<BleuSample> s;
        for (double x = -10.0; x <= 10.0; x += 0.01) {
            double y = logistic_bleu(truth, x) + 0.01 * rng.next_normal();
            y = std::min(std::max(y, 0.0), 1.0);
            s.push_back({x, y});
        }
        const auto fitted = fit_logistic(s);
        err_a.push_back(std::abs(fitted.a_k - truth.a_k) / truth.a_k);
        err_l.push_back(std::abs(fitted.l_k - truth.l_k) / truth.l_k);
        err_x0.push_back(std::abs(fitted.x0_k - truth.x0_k) / std::abs(truth.x0_k));
    }
    const auto median = [](std::vector<double> v) {
        std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
        return v[v.size() / 2];
    };
    CHECK(median(err_a) < 0.05);
    CHECK(median(err_l) < 0.05);
    CHECK(median(err_x0) < 0.05);
}

TEST_CASE("registry round-trips through the text format") {
    std::stringstream buf;
    model().save(buf);
    const auto loaded = SemanticPerfModel::load(buf);
    CHECK(loaded.symbol_factors() == model().symbol_factors());
    for (int k : model().symbol_factors()) {
        CHECK(loaded.params(k).a_k == Approx(model().params(k).a_k).epsilon(1e-9));
        CHECK(loaded.params(k).l_k == Approx(model().params(k).l_k).epsilon(1e-9));
        CHECK(loaded.params(k).x0_k == Approx(model().params(k).x0_k).epsilon(1e-9));
    }

    std::stringstream manual("# comment\n3 0.65 0.34 0.262  # trailing\n\n5 0.9 0.4 -1.5\n");
    const auto parsed = SemanticPerfModel::load(manual);
    CHECK(parsed.symbol_factors() == std::vector<int>{3, 5});
    CHECK(parsed.params(5).x0_k == Approx(-1.5));

    std::stringstream broken("4 0.8\n");
    CHECK_THROWS_AS(SemanticPerfModel::load(broken), std::invalid_argument);
}

TEST_CASE("bleu sample CSV loads") {
    std::stringstream csv("snr_db,bleu\n-5,0.25\n0,0.5\n5,0.75\n");
    const auto samples = load_bleu_samples(csv);
    REQUIRE(samples.size() == 3);
    CHECK(samples[1].snr_db == Approx(0.0));
    CHECK(samples[2].bleu == Approx(0.75));

    std::stringstream bad("x,y\n1,2\n");
    CHECK_THROWS_AS(load_bleu_samples(bad), std::invalid_argument);
}
