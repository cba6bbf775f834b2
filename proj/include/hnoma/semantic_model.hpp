// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hnoma/errors.hpp"

namespace hnoma {

/// Parameters of one fitted logistic BLEU-vs-SNR curve:
///   e(x) = a / (1 + exp(-l (x - x0)))
/// with x the receive SNR in dB. `a` is the saturation BLEU, `l` the slope
/// and `x0` the midpoint.
struct LogisticParams {
    double a_k = 0.0;  // asymptote, in (0, 1]
    double l_k = 0.0;  // slope, per dB
    double x0_k = 0.0; // midpoint, dB
};

/// One measured (SNR, BLEU) point used for regression.
struct BleuSample {
    double snr_db = 0.0;
    double bleu = 0.0;
};

/// Registry of logistic curves, one per semantic symbol factor K (symbols
/// per word). Symbol factors outside the registry are rejected rather than
/// extrapolated: the parameters are empirical per K.
class SemanticPerfModel {
public:
    SemanticPerfModel() = default;

    /// Built-in registry fitted for K = 3..10.
    static SemanticPerfModel default_registry() {
        SemanticPerfModel m;
        m.set(3, {0.650, 0.340, 0.262});
        m.set(4, {0.826, 0.402, -0.462});
        m.set(5, {0.916, 0.435, -1.561});
        m.set(6, {0.940, 0.469, -2.084});
        m.set(7, {0.954, 0.477, -2.553});
        m.set(8, {0.960, 0.491, -2.979});
        m.set(9, {0.965, 0.516, -3.379});
        m.set(10, {0.970, 0.522, -3.897});
        return m;
    }

    void set(int k, const LogisticParams& p) {
        if (k < 1)
            throw std::invalid_argument("symbol factor must be >= 1");
        if (!(p.a_k > 0.0) || !(p.l_k > 0.0))
            throw std::invalid_argument("logistic parameters require a > 0 and l > 0");
        table_[k] = p;
    }

    bool has(int k) const { return table_.count(k) != 0; }

    const LogisticParams& params(int k) const {
        auto it = table_.find(k);
        if (it == table_.end())
            throw missing_parameter("no logistic parameters for K=" + std::to_string(k));
        return it->second;
    }

    /// Registered symbol factors in increasing order.
    std::vector<int> symbol_factors() const {
        std::vector<int> ks;
        ks.reserve(table_.size());
        for (const auto& [k, p] : table_) ks.push_back(k);
        return ks;
    }

    bool empty() const { return table_.empty(); }

    /// Parses the plain-text registry format: one `K A l x0` row per line,
    /// whitespace separated, `#` starts a comment.
    static SemanticPerfModel load(std::istream& in) {
        SemanticPerfModel m;
        std::string line;
        while (std::getline(in, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::istringstream row(line);
            int k;
            LogisticParams p;
            if (!(row >> k)) continue; // blank or comment-only line
            if (!(row >> p.a_k >> p.l_k >> p.x0_k))
                throw std::invalid_argument("malformed registry row: " + line);
            m.set(k, p);
        }
        return m;
    }

    void save(std::ostream& out) const {
        out << "# K A_K l_K x0_K\n";
        for (const auto& [k, p] : table_) {
            out << k << ' ' << p.a_k << ' ' << p.l_k << ' ' << p.x0_k << '\n';
        }
    }

private:
    std::map<int, LogisticParams> table_;
};

/// Words conveyed per second by a transceiver spending `k` symbols per word
/// on a channel of symbol rate `bandwidth_hz`.
inline double word_rate(double bandwidth_hz, int k) {
    if (!(bandwidth_hz > 0.0))
        throw std::invalid_argument("bandwidth must be positive");
    if (k < 1)
        throw std::invalid_argument("symbol factor must be >= 1");
    return bandwidth_hz / static_cast<double>(k);
}

/// Logistic curve evaluation at SNR `snr_db`.
inline double logistic_bleu(const LogisticParams& p, double snr_db) {
    return p.a_k / (1.0 + std::exp(-p.l_k * (snr_db - p.x0_k)));
}

/// Analytic derivative of the logistic curve with respect to SNR (per dB).
/// Strictly positive, so the curve is strictly increasing.
inline double logistic_bleu_slope(const LogisticParams& p, double snr_db) {
    const double e = std::exp(-p.l_k * (snr_db - p.x0_k));
    const double d = 1.0 + e;
    return p.a_k * p.l_k * e / (d * d);
}

/// BLEU score of the K-symbol transceiver at the given SNR.
inline double bleu(const SemanticPerfModel& m, int k, double snr_db) {
    return logistic_bleu(m.params(k), snr_db);
}

/// SNR (dB) at which the K-symbol transceiver reaches `target_bleu`.
/// Defined for targets strictly inside (0, a_k); the asymptote caps what is
/// achievable at any SNR.
inline double inverse_bleu(const SemanticPerfModel& m, int k, double target_bleu) {
    const LogisticParams& p = m.params(k);
    if (!(target_bleu > 0.0))
        throw std::invalid_argument("target BLEU must be positive");
    if (!(target_bleu < p.a_k))
        throw infeasible_target("target BLEU " + std::to_string(target_bleu) +
                                " is not below the K=" + std::to_string(k) +
                                " asymptote " + std::to_string(p.a_k));
    return p.x0_k - std::log(p.a_k / target_bleu - 1.0) / p.l_k;
}

/// Linear SNR threshold corresponding to inverse_bleu (dB -> ratio).
inline double required_linear_snr(const SemanticPerfModel& m, int k, double target_bleu) {
    return std::pow(10.0, inverse_bleu(m, k, target_bleu) / 10.0);
}

/// Least-squares fit of (a, l, x0) to measured samples by damped
/// Gauss-Newton (Levenberg-Marquardt). Initialization: a = max BLEU,
/// x0 = median SNR, l = 0.5.
inline LogisticParams fit_logistic(const std::vector<BleuSample>& samples) {
    if (samples.size() < 4)
        throw fit_failure("need at least 4 samples");
    for (const auto& s : samples) {
        if (s.bleu < 0.0 || s.bleu > 1.0)
            throw std::invalid_argument("BLEU samples must lie in [0, 1]");
    }
    const double ymax = std::max_element(samples.begin(), samples.end(),
                                         [](const BleuSample& a, const BleuSample& b) {
                                             return a.bleu < b.bleu;
                                         })
                            ->bleu;
    const double ymin = std::min_element(samples.begin(), samples.end(),
                                         [](const BleuSample& a, const BleuSample& b) {
                                             return a.bleu < b.bleu;
                                         })
                            ->bleu;
    if (!(ymax > ymin))
        throw fit_failure("constant response, nothing to fit");

    std::vector<double> xs;
    xs.reserve(samples.size());
    for (const auto& s : samples) xs.push_back(s.snr_db);
    std::nth_element(xs.begin(), xs.begin() + xs.size() / 2, xs.end());

    Eigen::Vector3d theta(std::max(ymax, 1e-3), 0.5, xs[xs.size() / 2]); // (a, l, x0)

    auto cost = [&](const Eigen::Vector3d& t) {
        double c = 0.0;
        for (const auto& s : samples) {
            const double r = logistic_bleu({t[0], t[1], t[2]}, s.snr_db) - s.bleu;
            c += r * r;
        }
        return c;
    };

    double lambda = 1e-3;
    double current = cost(theta);
    constexpr int kMaxIter = 200;
    constexpr double kGradTol = 1e-10;

    for (int iter = 0; iter < kMaxIter; ++iter) {
        Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
        Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
        for (const auto& s : samples) {
            const double e = std::exp(-theta[1] * (s.snr_db - theta[2]));
            const double d = 1.0 + e;
            const double f = theta[0] / d;
            const double r = f - s.bleu;
            Eigen::Vector3d j;
            j[0] = 1.0 / d;                                        // d f / d a
            j[1] = theta[0] * (s.snr_db - theta[2]) * e / (d * d); // d f / d l
            j[2] = -theta[0] * theta[1] * e / (d * d);             // d f / d x0
            jtj += j * j.transpose();
            jtr += j * r;
        }
        if (jtr.lpNorm<Eigen::Infinity>() < kGradTol) break;

        bool stepped = false;
        for (int attempt = 0; attempt < 40; ++attempt) {
            Eigen::Matrix3d damped = jtj;
            damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
            const Eigen::Vector3d delta = damped.ldlt().solve(-jtr);
            const Eigen::Vector3d cand = theta + delta;
            if (cand[0] > 0.0 && cand[1] > 0.0) {
                const double c = cost(cand);
                if (c < current) {
                    theta = cand;
                    current = c;
                    lambda = std::max(lambda / 3.0, 1e-12);
                    stepped = true;
                    break;
                }
            }
            lambda *= 2.0;
        }
        if (!stepped) break; // stuck in a flat region; return best point
    }
    return {theta[0], theta[1], theta[2]};
}

/// Reads `snr_db,bleu` CSV (header required).
inline std::vector<BleuSample> load_bleu_samples(std::istream& in) {
    std::vector<BleuSample> out;
    std::string line;
    if (!std::getline(in, line) || line.rfind("snr_db,bleu", 0) != 0)
        throw std::invalid_argument("expected header 'snr_db,bleu'");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("malformed sample row: " + line);
        out.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
    }
    return out;
}

} // namespace hnoma
