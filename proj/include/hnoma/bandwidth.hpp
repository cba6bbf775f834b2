// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "hnoma/beamforming.hpp"
#include "hnoma/channel.hpp"
#include "hnoma/errors.hpp"

namespace hnoma {

/// Per-cluster bandwidths for the two transmission periods.
struct BandwidthAllocation {
    std::vector<double> b_noma;
    std::vector<double> b_excl;
};

/// Diagnostics of one block-coordinate-descent run.
struct BcdState {
    std::vector<double> zeta;
    std::vector<double> kappa;
    std::vector<double> power_trace; // true power, initial point included
    int iterations = 0;
};

namespace detail {

/// SINR threshold implied by a rate target over bandwidth b: 2^(r0/b) - 1.
inline double gamma_of_rate(double r0, double b) {
    return std::expm1(r0 * M_LN2 / b);
}

/// f(b) = b (2^(r0/b) - 1), the bandwidth-power shape of a rate-constrained
/// user. Strictly decreasing and convex on b > 0.
inline double rate_excess(double r0, double b) {
    return b * std::expm1(r0 * M_LN2 / b);
}

/// f'(b) = 2^(r0/b) (1 - r0 ln2 / b) - 1 < 0. A series kicks in for small
/// r0/b where the direct form cancels catastrophically.
inline double rate_excess_d1(double r0, double b) {
    const double u = r0 * M_LN2 / b;
    if (u > 700.0) return -std::numeric_limits<double>::infinity();
    if (u < 1e-4) return -u * u * (0.5 + u / 3.0 + u * u / 8.0);
    return std::exp(u) * (1.0 - u) - 1.0;
}

/// f''(b) = (r0 ln2)^2 2^(r0/b) / b^3 = u^2 e^u / b > 0.
inline double rate_excess_d2(double r0, double b) {
    const double u = r0 * M_LN2 / b;
    if (u > 700.0) return std::numeric_limits<double>::infinity();
    return u * u * std::exp(u) / b;
}

/// Minimizer of alpha b + beta f(b) + mu b over b >= b_min. The gradient
/// alpha + mu + beta f'(b) is strictly increasing, so either the floor is
/// active or there is a unique interior root. Newton steps are accepted
/// only while they keep halving (the gradient is flat on the right and
/// steep on the left, so an unguarded step can fly across the bracket);
/// otherwise the bracket is bisected, which bounds the worst case.
inline double cluster_bandwidth_at(double alpha, double beta, double r0, double mu,
                                   double b_min, double b_scale) {
    const auto grad = [&](double b) { return alpha + mu + beta * rate_excess_d1(r0, b); };

    double lo = std::max(b_min, b_scale * 1e-15);
    if (grad(lo) >= 0.0) return b_min > 0.0 ? b_min : lo;

    double hi = std::max(lo * 2.0, std::max(r0, b_scale));
    for (int i = 0; i < 300 && grad(hi) <= 0.0; ++i) hi *= 2.0;

    double b = 0.5 * (lo + hi);
    double step_prev2 = hi - lo;
    double step_prev = step_prev2;
    for (int i = 0; i < 200; ++i) {
        const double v = grad(b);
        if (std::isfinite(v)) {
            if (v > 0.0)
                hi = b;
            else
                lo = b;
        } else {
            lo = b; // overflow side is always the small-b side
        }
        double next = 0.0;
        bool newton_ok = false;
        const double d = beta * rate_excess_d2(r0, b);
        if (std::isfinite(v) && std::isfinite(d) && d > 0.0 &&
            std::abs(2.0 * v) < step_prev2 * d) {
            next = b - v / d;
            newton_ok = next > lo && next < hi;
        }
        if (!newton_ok) next = 0.5 * (lo + hi);
        step_prev2 = step_prev;
        step_prev = std::abs(next - b);
        if (step_prev <= 1e-15 * std::max(b, next)) {
            b = next;
            break;
        }
        b = next;
    }
    return std::max(b, b_min);
}

/// Minimizes sum_i [alpha_i b_i + beta_i f(b_i)] subject to sum b_i <= b0
/// and b_i >= b_min_i, by bisection on the multiplier of the sum
/// constraint. When every alpha_i is positive the unconstrained minimizers
/// exist; if they already fit in the budget the multiplier is zero.
inline std::vector<double> allocate_separable(const std::vector<double>& alpha,
                                              const std::vector<double>& beta,
                                              double r0, double b0,
                                              const std::vector<double>& b_min) {
    const std::size_t m = alpha.size();
    double floor_sum = 0.0;
    for (double f : b_min) floor_sum += f;
    if (floor_sum > b0 * (1.0 + 1e-12))
        throw infeasible_bandwidth("bandwidth floors exceed the total budget");

    const auto solve_all = [&](double mu) {
        std::vector<double> b(m);
        for (std::size_t i = 0; i < m; ++i)
            b[i] = cluster_bandwidth_at(alpha[i], beta[i], r0, mu, b_min[i], b0);
        return b;
    };
    const auto total = [](const std::vector<double>& b) {
        double s = 0.0;
        for (double v : b) s += v;
        return s;
    };

    bool all_alpha_positive = true;
    for (double a : alpha) all_alpha_positive &= (a > 0.0);
    if (all_alpha_positive) {
        std::vector<double> b = solve_all(0.0);
        if (total(b) <= b0) return b;
    }

    // Bracket the multiplier: start from the value that pushes each cluster
    // down to an even share, then grow geometrically until feasible.
    double mu_hi = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double target = std::max(b_min[i], b0 / static_cast<double>(m));
        mu_hi = std::max(mu_hi, -(alpha[i] + beta[i] * rate_excess_d1(r0, target)));
    }
    mu_hi = std::max(mu_hi, 1e-300);
    std::vector<double> b_hi = solve_all(mu_hi);
    for (int i = 0; i < 400 && total(b_hi) > b0; ++i) {
        mu_hi *= 2.0;
        b_hi = solve_all(mu_hi);
    }

    double mu_lo = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double sum_hi = total(b_hi);
        if (sum_hi <= b0 && sum_hi >= b0 * (1.0 - 1e-12)) break;
        const double mid = 0.5 * (mu_lo + mu_hi);
        std::vector<double> b_mid = solve_all(mid);
        if (total(b_mid) > b0) {
            mu_lo = mid;
        } else {
            mu_hi = mid;
            b_hi = std::move(b_mid);
        }
    }
    return b_hi;
}

} // namespace detail

/// Auxiliary direction blocks of the recast power objective, evaluated at
/// the given bandwidths: zeta_i = |h_s^H dir_s|^2 and
/// kappa_i = |h_b^H dir_s|^2 with dir_s the normalized A^{-1} h_s.
inline std::pair<std::vector<double>, std::vector<double>>
update_blocks(const std::vector<ClusterChannels>& channels, const std::vector<double>& b,
              double r0) {
    const std::size_t m = channels.size();
    std::vector<double> zeta(m), kappa(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (!(b[i] > 0.0))
            throw std::invalid_argument("bandwidth must be positive");
        const double gamma_b0 = detail::gamma_of_rate(r0, b[i]);
        const double g_s = channels[i].h_s.squaredNorm();
        const double g_b = channels[i].h_b.squaredNorm();
        const double cos2 =
            std::norm(channels[i].h_s.dot(channels[i].h_b)) / (g_s * g_b);
        ComplexVector dir;
        if (1.0 - cos2 < 1e-16) {
            dir = channels[i].h_b / std::sqrt(g_b);
        } else {
            dir = apply_a_inverse_sm(channels[i].h_b, gamma_b0, channels[i].h_s).normalized();
        }
        zeta[i] = detail::proj_gain(channels[i].h_s, dir);
        kappa[i] = detail::proj_gain(channels[i].h_b, dir);
    }
    return {std::move(zeta), std::move(kappa)};
}

/// Total NOMA-period transmit power as a function of the bandwidth vector,
/// with direction blocks rebuilt per cluster at that bandwidth. Equals the
/// sum of the per-cluster closed-form powers at the same bandwidths.
inline double noma_power_of_bandwidth(const std::vector<ClusterChannels>& channels,
                                      const std::vector<double>& b, double gamma_s0,
                                      double r0, double n0) {
    const auto [zeta, kappa] = update_blocks(channels, b, r0);
    double p = 0.0;
    for (std::size_t i = 0; i < channels.size(); ++i) {
        const double g_b = channels[i].h_b.squaredNorm();
        const double noise = n0 * b[i];
        const double gamma_b0 = detail::gamma_of_rate(r0, b[i]);
        p += gamma_s0 * noise / zeta[i] +
             gamma_b0 * noise / g_b * (gamma_s0 * kappa[i] / zeta[i] + 1.0);
    }
    return p;
}

/// Inner convex subproblem of the BCD iteration: bandwidths minimizing the
/// recast objective at frozen blocks, under the budget and the per-cluster
/// floor (word-rate constraint).
inline std::vector<double> solve_inner_convex(const std::vector<double>& zeta,
                                              const std::vector<double>& kappa,
                                              const std::vector<ClusterChannels>& channels,
                                              double gamma_s0, double r0, double n0,
                                              double b0, double b_min) {
    const std::size_t m = channels.size();
    std::vector<double> alpha(m), beta(m), floors(m, b_min);
    for (std::size_t i = 0; i < m; ++i) {
        const double g_b = channels[i].h_b.squaredNorm();
        alpha[i] = gamma_s0 * n0 / zeta[i];
        beta[i] = n0 * (gamma_s0 * kappa[i] / zeta[i] + 1.0) / g_b;
    }
    return detail::allocate_separable(alpha, beta, r0, b0, floors);
}

/// NOMA-period bandwidth allocation by block coordinate descent: freeze the
/// direction blocks, solve the convex bandwidth subproblem, repeat from the
/// even split until the power improvement falls below delta0.
///
/// The trace records the true power (blocks re-derived) after every step;
/// it is non-increasing because the frozen-block objective upper-bounds
/// the true power at every bandwidth vector.
inline std::pair<std::vector<double>, BcdState>
bcd_allocate(const std::vector<ClusterChannels>& channels, double gamma_s0, double r0,
             double n0, double b0, double b_min, double delta0 = -1.0, int max_iter = 50) {
    const std::size_t m = channels.size();
    if (m == 0)
        throw std::invalid_argument("need at least one cluster");
    if (b_min * static_cast<double>(m) > b0 * (1.0 + 1e-12))
        throw infeasible_bandwidth("bandwidth floors exceed the total budget");

    std::vector<double> b(m, b0 / static_cast<double>(m));
    BcdState state;
    double p_prev = noma_power_of_bandwidth(channels, b, gamma_s0, r0, n0);
    state.power_trace.push_back(p_prev);
    if (delta0 <= 0.0) delta0 = 1e-6 * p_prev;

    for (int t = 0; t < max_iter; ++t) {
        auto [zeta, kappa] = update_blocks(channels, b, r0);
        b = solve_inner_convex(zeta, kappa, channels, gamma_s0, r0, n0, b0, b_min);
        const double p = noma_power_of_bandwidth(channels, b, gamma_s0, r0, n0);
        state.zeta = std::move(zeta);
        state.kappa = std::move(kappa);
        state.power_trace.push_back(p);
        state.iterations = t + 1;
        if (std::abs(p_prev - p) <= delta0) break;
        p_prev = p;
    }
    return {std::move(b), std::move(state)};
}

/// Exclusive-period allocation: each cluster's power strictly decreases in
/// its bandwidth, so the budget is spent completely and the weighted
/// marginals equalize across clusters.
inline std::vector<double> allocate_exclusive(const std::vector<ClusterChannels>& channels,
                                              double r0, double n0, double b0) {
    const std::size_t m = channels.size();
    if (m == 0)
        throw std::invalid_argument("need at least one cluster");
    std::vector<double> alpha(m, 0.0), beta(m), floors(m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
        beta[i] = n0 / channels[i].h_b.squaredNorm();
    return detail::allocate_separable(alpha, beta, r0, b0, floors);
}

} // namespace hnoma
