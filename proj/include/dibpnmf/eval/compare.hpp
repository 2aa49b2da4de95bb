// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include "dibpnmf/factorization/gibbs.hpp"
#include "dibpnmf/factorization/model.hpp"
#include "dibpnmf/io/synth.hpp"
#include "dibpnmf/random.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace dibpnmf::eval {

struct ComparisonRow {
    std::size_t trial = 0;
    factorization::ModelKind model = factorization::ModelKind::BivariateBeta;
    double recon_error = 0.0;
    std::size_t effective_k = 0;
    double flexibility = 0.0;
    double best_loglik = 0.0;
    std::size_t iterations_to_converge = 0;
};

inline constexpr std::array<factorization::ModelKind, 3> dibp_models{
    factorization::ModelKind::BivariateBeta, factorization::ModelKind::Copula,
    factorization::ModelKind::Gp};

/// Data and sampler seeds of trial t, derived from the master seed.
inline std::uint64_t trial_data_seed(std::uint64_t master, std::size_t t) {
    return derive_seed(master, 2 * t);
}
inline std::uint64_t trial_sampler_seed(std::uint64_t master, std::size_t t) {
    return derive_seed(master, 2 * t + 1);
}

/**
 * Fits the three dIBP models to one random binary matrix and summarizes
 * each best sample. `base` supplies everything except model and seed.
 */
inline std::vector<ComparisonRow> compare_trial(std::size_t trial, std::uint64_t master,
                                                Eigen::Index rows, Eigen::Index cols,
                                                double density,
                                                const factorization::ModelConfig& base) {
    const factorization::DataMatrix y =
        io::synth_binary(rows, cols, density, trial_data_seed(master, trial));
    std::vector<ComparisonRow> out;
    for (const auto model : dibp_models) {
        factorization::ModelConfig cfg = base;
        cfg.model = model;
        cfg.seed = trial_sampler_seed(master, trial);
        const auto res = factorization::run_gibbs(y, cfg);
        ComparisonRow row;
        row.trial = trial;
        row.model = model;
        row.recon_error = factorization::recon_error_l1(
            y.values, factorization::reconstruct(res.best), nullptr);
        row.effective_k = dibp::effective_k(res.best.Z1, res.best.Z2);
        row.flexibility = factorization::flexibility_metric(res.best.Z1, res.best.Z2);
        row.best_loglik = res.trace.best_loglik;
        row.iterations_to_converge =
            factorization::iterations_to_converge(res.trace.logliks());
        out.push_back(row);
    }
    return out;
}

inline std::vector<ComparisonRow> run_comparison(std::size_t trials, std::uint64_t master,
                                                 Eigen::Index rows, Eigen::Index cols,
                                                 double density,
                                                 const factorization::ModelConfig& base) {
    std::vector<ComparisonRow> out;
    for (std::size_t t = 0; t < trials; ++t) {
        auto rows_t = compare_trial(t, master, rows, cols, density, base);
        out.insert(out.end(), rows_t.begin(), rows_t.end());
    }
    return out;
}

} // namespace dibpnmf::eval
