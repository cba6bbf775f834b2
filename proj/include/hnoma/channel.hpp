// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "hnoma/errors.hpp"
#include "hnoma/rng.hpp"

namespace hnoma {

using ComplexVector = Eigen::VectorXcd;

/// Rician fading configuration. A draw mixes a unit-modulus line-of-sight
/// steering vector with i.i.d. CN(0,1) scattering,
///   h = (sqrt(k0/(1+k0)) h_los + sqrt(1/(1+k0)) h_nlos) / sqrt(d^mu),
/// so each entry keeps unit average power before the d^-mu path loss.
struct RicianConfig {
    double rician_factor = 1.0; // k0 >= 0, +inf selects pure LoS
    double path_loss_exp = 0.8; // mu > 0
    int num_antennas = 4;       // N >= 1
    std::uint64_t seed = 1;

    void validate() const {
        if (!(rician_factor >= 0.0))
            throw std::invalid_argument("Rician factor must be >= 0");
        if (!(path_loss_exp > 0.0))
            throw std::invalid_argument("path loss exponent must be positive");
        if (num_antennas < 1)
            throw std::invalid_argument("need at least one antenna");
    }
};

/// Addresses one deterministic random stream. Draws depend only on
/// (seed, trial, cluster, user), never on call order.
struct StreamId {
    std::uint64_t trial = 0;
    std::uint32_t cluster = 0;
    std::uint32_t user = 0;
};

/// Channel pair of one cluster: semantic user and bit user, with the
/// distances the draws were scaled by. `quasi_degraded` is unset until a
/// classifier has looked at the pair under concrete SINR targets.
struct ClusterChannels {
    ComplexVector h_s;
    ComplexVector h_b;
    double d_s = 1.0;
    double d_b = 1.0;
    std::optional<bool> quasi_degraded;
};

/// One Rician draw for a user at the given distance.
inline ComplexVector draw_channel(const RicianConfig& cfg, double distance_m,
                                  const StreamId& stream) {
    cfg.validate();
    if (!(distance_m > 0.0))
        throw std::invalid_argument("distance must be positive");

    StreamRng rng(cfg.seed, stream.trial, stream.cluster, stream.user);
    const int n = cfg.num_antennas;

    // Uniform-linear-array steering vector, half-wavelength spacing, random
    // angle of departure per user. Entries have unit modulus.
    const double theta = rng.next_uniform(0.0, M_PI);
    const double phase_step = M_PI * std::cos(theta);
    ComplexVector los(n);
    for (int i = 0; i < n; ++i)
        los[i] = std::polar(1.0, phase_step * static_cast<double>(i));

    double w_los = 1.0;
    double w_nlos = 0.0;
    if (std::isinf(cfg.rician_factor)) {
        // pure LoS limit
    } else {
        w_los = std::sqrt(cfg.rician_factor / (1.0 + cfg.rician_factor));
        w_nlos = std::sqrt(1.0 / (1.0 + cfg.rician_factor));
    }

    ComplexVector h(n);
    const double scale = 1.0 / std::sqrt(std::pow(distance_m, cfg.path_loss_exp));
    for (int i = 0; i < n; ++i) {
        const std::complex<double> nlos = rng.next_cnormal();
        h[i] = (w_los * los[i] + w_nlos * nlos) * scale;
    }
    return h;
}

/// Draws both users of a cluster. User sub-streams 0 (semantic) and
/// 1 (bit) keep the two vectors statistically independent.
inline ClusterChannels draw_cluster(const RicianConfig& cfg, double d_s, double d_b,
                                    std::uint64_t trial, std::uint32_t cluster) {
    ClusterChannels ch;
    ch.h_s = draw_channel(cfg, d_s, {trial, cluster, 0});
    ch.h_b = draw_channel(cfg, d_b, {trial, cluster, 1});
    ch.d_s = d_s;
    ch.d_b = d_b;
    return ch;
}

/// Channel dump row format: trial,cluster,user,antenna,re,im
inline void dump_channels_csv_header(std::ostream& out) {
    out << "trial,cluster,user,antenna,re,im\n";
}

inline void dump_channels_csv(std::ostream& out, std::uint64_t trial, std::uint32_t cluster,
                              const ClusterChannels& ch) {
    char buf[96];
    for (int user = 0; user < 2; ++user) {
        const ComplexVector& h = (user == 0) ? ch.h_s : ch.h_b;
        for (Eigen::Index a = 0; a < h.size(); ++a) {
            std::snprintf(buf, sizeof(buf), "%llu,%u,%d,%lld,%.17g,%.17g\n",
                          static_cast<unsigned long long>(trial), cluster, user,
                          static_cast<long long>(a), h[a].real(), h[a].imag());
            out << buf;
        }
    }
}

/// Reloads a dump into (trial, cluster) -> channels. The dump stores the
/// faded vectors only; path loss is already folded into them, so replayed
/// records carry unit distances.
inline std::map<std::pair<std::uint64_t, std::uint32_t>, ClusterChannels>
load_channels_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("trial,cluster,user,antenna", 0) != 0)
        throw std::invalid_argument("expected channel dump header");

    struct Entry {
        std::map<long long, std::complex<double>> s, b;
    };
    std::map<std::pair<std::uint64_t, std::uint32_t>, Entry> acc;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string tok;
        auto next = [&]() {
            if (!std::getline(row, tok, ','))
                throw std::invalid_argument("malformed dump row: " + line);
            return tok;
        };
        const std::uint64_t trial = std::stoull(next());
        const std::uint32_t cluster = static_cast<std::uint32_t>(std::stoul(next()));
        const int user = std::stoi(next());
        const long long antenna = std::stoll(next());
        const double re = std::stod(next());
        const double im = std::stod(next());
        Entry& e = acc[{trial, cluster}];
        (user == 0 ? e.s : e.b)[antenna] = {re, im};
    }

    std::map<std::pair<std::uint64_t, std::uint32_t>, ClusterChannels> out;
    for (auto& [key, e] : acc) {
        ClusterChannels ch;
        ch.h_s.resize(static_cast<Eigen::Index>(e.s.size()));
        ch.h_b.resize(static_cast<Eigen::Index>(e.b.size()));
        for (auto& [a, v] : e.s) ch.h_s[a] = v;
        for (auto& [a, v] : e.b) ch.h_b[a] = v;
        out.emplace(key, std::move(ch));
    }
    return out;
}

} // namespace hnoma
