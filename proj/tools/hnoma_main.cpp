// SPDX-License-Identifier: Apache-2.0
//
// hnoma: seeded Monte-Carlo experiment runner for the coexisting
// semantic/bit NOMA power-minimization engine. Emits CSV; plotting is an
// external concern.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hnoma/harness.hpp"
#include "hnoma/semantic_model.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitAllInfeasible = 3;

struct CommonFlags {
    std::string config_path;
    std::string out_path;
    std::string schemes = "proposed,oma,zf,mrt,ob_rb";
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    int workers = 1;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "experiment config file (key = value)");
    cmd->add_option("--out", f.out_path, "output CSV path (default: stdout)");
    cmd->add_option("--schemes", f.schemes, "comma-separated scheme list");
    cmd->add_option("--seed", f.seed, "override RNG seed");
    cmd->add_option("--trials", f.trials, "override trial count");
    cmd->add_option("--workers", f.workers, "worker thread count")->check(CLI::Range(1, 256));
}

hnoma::ExperimentConfig make_config(const CommonFlags& f) {
    hnoma::ExperimentConfig cfg;
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) throw hnoma::config_error("cannot open config file: " + f.config_path);
        cfg = hnoma::load_config(in);
    }
    if (f.seed) cfg.seed = *f.seed;
    if (f.trials) cfg.trials = *f.trials;
    cfg.validate();
    return cfg;
}

hnoma::RunOptions make_options(const CommonFlags& f) {
    hnoma::RunOptions opt;
    opt.workers = f.workers;
    opt.schemes.clear();
    std::stringstream ss(f.schemes);
    std::string name;
    while (std::getline(ss, name, ',')) {
        if (name == "proposed") opt.schemes.push_back(hnoma::Scheme::proposed);
        else if (name == "oma") opt.schemes.push_back(hnoma::Scheme::oma);
        else if (name == "zf") opt.schemes.push_back(hnoma::Scheme::zf);
        else if (name == "mrt") opt.schemes.push_back(hnoma::Scheme::mrt);
        else if (name == "ob_rb") opt.schemes.push_back(hnoma::Scheme::ob_rb);
        else throw hnoma::config_error("unknown scheme '" + name + "'");
    }
    if (opt.schemes.empty()) throw hnoma::config_error("scheme list is empty");
    return opt;
}

int run_sweep(const CommonFlags& f, hnoma::SweepAxis axis) {
    const auto cfg = make_config(f);
    const auto opt = make_options(f);

    std::ofstream file;
    std::ostream* out = &std::cout;
    if (!f.out_path.empty()) {
        file.open(f.out_path);
        if (!file) throw hnoma::config_error("cannot open output file: " + f.out_path);
        out = &file;
    }
    const auto summary = hnoma::run_experiment(cfg, axis, opt, *out);
    if (summary.feasible_proposed == 0) {
        std::cerr << "hnoma: every trial was infeasible\n";
        return kExitAllInfeasible;
    }
    return kExitOk;
}

int run_fit(const std::string& samples_path) {
    std::ifstream in(samples_path);
    if (!in) throw hnoma::config_error("cannot open sample file: " + samples_path);
    const auto samples = hnoma::load_bleu_samples(in);
    const auto p = hnoma::fit_logistic(samples);
    char buf[128];
    std::snprintf(buf, sizeof(buf), "a=%.6g l=%.6g x0=%.6g\n", p.a_k, p.l_k, p.x0_k);
    std::cout << buf;
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"power-minimization experiments for coexisting semantic/bit NOMA"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string samples_path;

    auto* single = app.add_subcommand("single", "run the configured setup as-is");
    auto* antennas = app.add_subcommand("sweep-antennas", "sweep the BS antenna count");
    auto* clusters = app.add_subcommand("sweep-clusters", "sweep the cluster count");
    auto* ksweep = app.add_subcommand("sweep-k", "sweep the semantic symbol factor");
    auto* bits = app.add_subcommand("bit-compare", "coexisting vs pure bit-level network");
    auto* fit = app.add_subcommand("fit-logistic", "fit a logistic curve to BLEU samples");
    for (auto* cmd : {single, antennas, clusters, ksweep, bits}) add_common(cmd, flags);
    fit->add_option("--samples", samples_path, "CSV with header snr_db,bleu")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (single->parsed()) return run_sweep(flags, hnoma::SweepAxis::single);
        if (antennas->parsed()) return run_sweep(flags, hnoma::SweepAxis::antennas);
        if (clusters->parsed()) return run_sweep(flags, hnoma::SweepAxis::clusters);
        if (ksweep->parsed()) return run_sweep(flags, hnoma::SweepAxis::k);
        if (bits->parsed()) return run_sweep(flags, hnoma::SweepAxis::bit_compare);
        if (fit->parsed()) return run_fit(samples_path);
    } catch (const hnoma::config_error& e) {
        std::cerr << "hnoma: config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "hnoma: config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "hnoma: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
