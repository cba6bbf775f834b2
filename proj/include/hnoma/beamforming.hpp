// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

#include "hnoma/channel.hpp"
#include "hnoma/errors.hpp"

namespace hnoma {

/// Linear SINR thresholds and the in-band noise power of one cluster.
struct SinrTargets {
    double gamma_s0 = 0.0; // semantic-user SNR threshold, linear
    double gamma_b0 = 0.0; // bit-user SINR threshold, linear (zero = no demand)
    double noise_w = 0.0;  // B_i * N0, watts

    void validate() const {
        if (!(gamma_s0 > 0.0) || !(gamma_b0 >= 0.0) || !(noise_w > 0.0))
            throw std::invalid_argument("SINR targets require gamma_s0 > 0, gamma_b0 >= 0, noise > 0");
    }
};

/// NOMA-period beams of one cluster: unit directions with separate power
/// scalars, plus the SINRs they achieve.
struct BeamSolution {
    ComplexVector dir_s;
    ComplexVector dir_b;
    double p_s = 0.0;
    double p_b = 0.0;
    double achieved_snr_s = 0.0;       // semantic user, after SIC
    double achieved_sinr_b_at_s = 0.0; // bit signal decoded at the semantic user
    double achieved_sinr_b = 0.0;      // bit user, direct decode
};

/// Exclusive-period beam: matched filter plus power.
struct ExclusiveBeam {
    ComplexVector dir_b;
    double p_b = 0.0;
};

struct SinrTriple {
    double b_at_s = 0.0;
    double s = 0.0;
    double b = 0.0;
};

namespace detail {

inline double proj_gain(const ComplexVector& h, const ComplexVector& dir) {
    return std::norm(h.dot(dir)); // |h^H dir|^2
}

} // namespace detail

/// SINRs of the two-user superposition at the given beams and powers:
/// bit signal at the semantic user (pre-SIC), semantic signal after SIC,
/// and bit signal at the bit user under semantic interference.
inline SinrTriple sinr_noma(const ClusterChannels& ch, const BeamSolution& sol,
                            double noise_w) {
    if (!(noise_w > 0.0))
        throw std::invalid_argument("noise power must be positive");
    const double s_on_s = sol.p_s * detail::proj_gain(ch.h_s, sol.dir_s);
    const double b_on_s = sol.p_b * detail::proj_gain(ch.h_s, sol.dir_b);
    const double s_on_b = sol.p_s * detail::proj_gain(ch.h_b, sol.dir_s);
    const double b_on_b = sol.p_b * detail::proj_gain(ch.h_b, sol.dir_b);
    SinrTriple out;
    out.b_at_s = b_on_s / (s_on_s + noise_w);
    out.s = s_on_s / noise_w;
    out.b = b_on_b / (s_on_b + noise_w);
    return out;
}

/// Bit-user rate, limited by the weaker of its two decode points (the
/// semantic user must decode the bit signal first to cancel it).
inline double rate_b_noma(const ClusterChannels& ch, const BeamSolution& sol,
                          double bandwidth_hz, double noise_w) {
    if (!(bandwidth_hz > 0.0))
        throw std::invalid_argument("bandwidth must be positive");
    const SinrTriple g = sinr_noma(ch, sol, noise_w);
    return bandwidth_hz * std::log2(1.0 + std::min(g.b_at_s, g.b));
}

/// Applies A^{-1} to `rhs` for A = ||h_b||^2 I + gamma_b0 h_b h_b^H using
/// the rank-one (Sherman-Morrison) form:
///   A^{-1} = (1/||h_b||^2) [I - (gamma/(1+gamma)) h_b h_b^H / ||h_b||^2].
inline ComplexVector apply_a_inverse_sm(const ComplexVector& h_b, double gamma_b0,
                                        const ComplexVector& rhs) {
    const double g = h_b.squaredNorm();
    if (!(g > 0.0))
        throw std::invalid_argument("zero bit-user channel");
    const std::complex<double> coupling = h_b.dot(rhs); // h_b^H rhs
    const double shrink = gamma_b0 / (1.0 + gamma_b0);
    return (rhs - (shrink / g) * coupling * h_b) / g;
}

/// Same map through a dense LU solve; verification path for the rank-one
/// update.
inline ComplexVector apply_a_inverse_lu(const ComplexVector& h_b, double gamma_b0,
                                        const ComplexVector& rhs) {
    const double g = h_b.squaredNorm();
    if (!(g > 0.0))
        throw std::invalid_argument("zero bit-user channel");
    const Eigen::Index n = h_b.size();
    Eigen::MatrixXcd a = g * Eigen::MatrixXcd::Identity(n, n);
    a.noalias() += gamma_b0 * (h_b * h_b.adjoint());
    return a.partialPivLu().solve(rhs);
}

namespace detail {

struct ClosedFormCandidate {
    ComplexVector dir_s, dir_b;
    double p_s = 0.0, p_b = 0.0;
    double sic_lhs = 0.0, sic_rhs = 0.0; // decode-at-semantic-user constraint
};

/// Builds the candidate optimum under the assumption that the SIC
/// constraint is inactive, and evaluates that constraint so callers can
/// decide whether the assumption holds.
inline ClosedFormCandidate closed_form_candidate(const ClusterChannels& ch,
                                                 const SinrTargets& t) {
    t.validate();
    const double g_s = ch.h_s.squaredNorm();
    const double g_b = ch.h_b.squaredNorm();
    if (!(g_s > 0.0) || !(g_b > 0.0))
        throw std::invalid_argument("zero channel vector");

    ClosedFormCandidate c;
    c.dir_b = ch.h_b / std::sqrt(g_b);

    // sin^2 of the principal angle between the two channels
    const double cos2 = std::norm(ch.h_s.dot(ch.h_b)) / (g_s * g_b);
    const double sin2 = std::max(0.0, 1.0 - cos2);
    if (sin2 < 1e-16) {
        // Numerically collinear pair: the tilted direction coincides with
        // the matched filter, so use it directly.
        c.dir_s = c.dir_b;
    } else {
        const ComplexVector v = apply_a_inverse_sm(ch.h_b, t.gamma_b0, ch.h_s);
        c.dir_s = v.normalized();
    }

    const double zeta = proj_gain(ch.h_s, c.dir_s);  // |h_s^H dir_s|^2
    const double kappa = proj_gain(ch.h_b, c.dir_s); // |h_b^H dir_s|^2
    c.p_s = t.gamma_s0 * t.noise_w / zeta;
    c.p_b = t.gamma_b0 * t.gamma_s0 * t.noise_w * kappa / (zeta * g_b) +
            t.gamma_b0 * t.noise_w / g_b;

    // Bit signal decodable at the semantic user:
    //   p_b |h_s^H dir_b|^2 >= gamma_b0 (p_s |h_s^H dir_s|^2 + noise)
    c.sic_lhs = c.p_b * proj_gain(ch.h_s, c.dir_b);
    c.sic_rhs = t.gamma_b0 * (c.p_s * zeta + t.noise_w);
    return c;
}

inline bool sic_holds(const ClosedFormCandidate& c, double rel_tol = 1e-9) {
    const double scale = std::max({std::abs(c.sic_lhs), std::abs(c.sic_rhs), 1e-300});
    return c.sic_lhs - c.sic_rhs >= -rel_tol * scale;
}

} // namespace detail

/// A channel pair is quasi-degraded (under the given targets) when the
/// candidate built with an inactive SIC constraint is primal feasible,
/// i.e. the constraint it ignored holds at the candidate point.
inline bool classify_quasi_degraded(const ClusterChannels& ch, double gamma_s0,
                                    double gamma_b0, double noise_w) {
    const auto c = detail::closed_form_candidate(ch, {gamma_s0, gamma_b0, noise_w});
    return detail::sic_holds(c);
}

/// Closed-form power-optimal beams for a quasi-degraded cluster. The
/// semantic direction is the normalized A^{-1} h_s with
/// A = ||h_b||^2 I + gamma_b0 h_b h_b^H; the bit direction is the matched
/// filter. Throws not_quasi_degraded when the SIC constraint rejects the
/// candidate; callers then fall back to the numerical span solver.
inline BeamSolution solve_noma_beams(const ClusterChannels& ch, const SinrTargets& t) {
    const auto c = detail::closed_form_candidate(ch, t);
    if (!detail::sic_holds(c))
        throw not_quasi_degraded("closed-form candidate violates the SIC constraint");
    BeamSolution sol;
    sol.dir_s = c.dir_s;
    sol.dir_b = c.dir_b;
    sol.p_s = c.p_s;
    sol.p_b = c.p_b;
    const SinrTriple g = sinr_noma(ch, sol, t.noise_w);
    sol.achieved_sinr_b_at_s = g.b_at_s;
    sol.achieved_snr_s = g.s;
    sol.achieved_sinr_b = g.b;
    return sol;
}

/// Exclusive-period optimum: matched filter at the bit user, power scaled
/// to meet the SNR threshold exactly.
inline ExclusiveBeam solve_exclusive_beam(const ClusterChannels& ch, double gamma_b0_ex,
                                          double noise_w) {
    const double g_b = ch.h_b.squaredNorm();
    if (!(g_b > 0.0))
        throw std::invalid_argument("zero bit-user channel");
    if (!(gamma_b0_ex >= 0.0) || !(noise_w > 0.0))
        throw std::invalid_argument("need gamma >= 0 and noise > 0");
    ExclusiveBeam beam;
    beam.dir_b = ch.h_b / std::sqrt(g_b);
    beam.p_b = noise_w * gamma_b0_ex / g_b;
    return beam;
}

/// Post-hoc optimality audit of a NOMA beam solution: primal residuals of
/// the three SINR constraints, tightness flags, and the two multipliers
/// reconstructed from stationarity under an inactive SIC constraint
/// (lambda2 = 0). Rank-one consistency is structural: beams are vectors.
struct KktReport {
    double semantic_residual = 0.0; // relative, semantic SNR vs target
    double sic_slack = 0.0;         // relative slack of the SIC constraint
    double bit_residual = 0.0;      // relative, bit SINR vs target
    bool semantic_tight = false;
    bool sic_satisfied = false;
    bool bit_tight = false;
    double lambda1 = 0.0;
    double lambda3 = 0.0;
    double stationarity_s = 0.0; // relative residual of the semantic stationarity row
    double stationarity_b = 0.0; // relative residual of the bit stationarity row
    bool rank_one = true;

    bool all_good(double tol = 1e-9) const {
        return semantic_tight && sic_satisfied && bit_tight && lambda1 >= -tol &&
               lambda3 >= -tol && stationarity_s <= tol && stationarity_b <= tol;
    }
};

inline KktReport verify_kkt(const ClusterChannels& ch, const SinrTargets& t,
                            const BeamSolution& sol, double rel_tol = 1e-9) {
    t.validate();
    KktReport r;
    const double g_b = ch.h_b.squaredNorm();
    const double noise = t.noise_w;

    const double s_on_s = sol.p_s * detail::proj_gain(ch.h_s, sol.dir_s);
    const double b_on_s = sol.p_b * detail::proj_gain(ch.h_s, sol.dir_b);
    const double s_on_b = sol.p_s * detail::proj_gain(ch.h_b, sol.dir_s);
    const double b_on_b = sol.p_b * detail::proj_gain(ch.h_b, sol.dir_b);

    // Semantic SNR pinned to its target.
    const double sem_target = t.gamma_s0 * noise;
    r.semantic_residual = (s_on_s - sem_target) / std::max(sem_target, 1e-300);
    r.semantic_tight = std::abs(r.semantic_residual) <= rel_tol;

    // Bit signal decodable at the semantic user (may be slack).
    const double sic_rhs = t.gamma_b0 * (s_on_s + noise);
    r.sic_slack = (b_on_s - sic_rhs) / std::max({std::abs(sic_rhs), b_on_s, 1e-300});
    r.sic_satisfied = r.sic_slack >= -rel_tol;

    // Bit SINR pinned to its target.
    const double bit_rhs = t.gamma_b0 * (s_on_b + noise);
    r.bit_residual = (b_on_b - bit_rhs) / std::max(std::abs(bit_rhs), 1e-300);
    r.bit_tight = std::abs(r.bit_residual) <= rel_tol;

    // Multipliers from the stationarity rows with lambda2 = 0. The bit row
    //   w_b = lambda3 h_b (h_b^H w_b)
    // forces lambda3 = 1/||h_b||^2; the semantic row reads
    //   (A / ||h_b||^2) w_s = lambda1 (h_s^H w_s) h_s.
    r.lambda3 = 1.0 / g_b;
    if (sol.p_b > 0.0) {
        const ComplexVector w_b = std::sqrt(sol.p_b) * sol.dir_b;
        const ComplexVector resid = w_b - r.lambda3 * ch.h_b.dot(w_b) * ch.h_b;
        r.stationarity_b = resid.norm() / w_b.norm();
    }
    if (sol.p_s > 0.0) {
        const ComplexVector w_s = std::sqrt(sol.p_s) * sol.dir_s;
        // A w_s / ||h_b||^2, the left side of the semantic row
        const ComplexVector aw = w_s + (t.gamma_b0 / g_b) * ch.h_b.dot(w_s) * ch.h_b;
        const std::complex<double> hsw = ch.h_s.dot(w_s);
        const std::complex<double> hsaw = ch.h_s.dot(aw);
        const double g_s = ch.h_s.squaredNorm();
        r.lambda1 =
            std::real(std::conj(hsw) * hsaw) / std::max(std::norm(hsw) * g_s, 1e-300);
        const ComplexVector resid = aw - r.lambda1 * hsw * ch.h_s;
        r.stationarity_s = resid.norm() / std::max(aw.norm(), 1e-300);
    }
    return r;
}

} // namespace hnoma
