// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include "dibpnmf/errors.hpp"
#include "dibpnmf/factorization/model.hpp"
#include "dibpnmf/matrix.hpp"
#include "dibpnmf/random.hpp"

#include <cstdint>

namespace dibpnmf::io {

/// Independent Bernoulli(density) entries, filled column by column.
inline factorization::DataMatrix synth_binary(Eigen::Index rows, Eigen::Index cols,
                                              double density, std::uint64_t seed) {
    if (rows < 1 || cols < 1)
        throw DomainError("synth_binary: shape must be positive");
    if (!(density > 0.0 && density < 1.0))
        throw DomainError("synth_binary: density must lie in (0, 1)");
    Rng rng(seed);
    Matrix y(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            y(i, j) = rng.bernoulli(density) ? 1.0 : 0.0;
    return factorization::DataMatrix(std::move(y));
}

struct PlantedData {
    factorization::DataMatrix y;
    Matrix A; ///< M x K_true
    Matrix X; ///< N x K_true
};

/**
 * Data from the model itself: A = V1 .* Z1, X = V2 .* Z2 with
 * V ~ gamma(1, 1) and Z ~ Bernoulli(sparsity), then
 * y_mn ~ Exp(mean (A X^T)_mn + eps).
 */
inline PlantedData synth_planted(Eigen::Index rows, Eigen::Index cols,
                                 Eigen::Index k_true, double sparsity,
                                 std::uint64_t seed, double eps = 0.01) {
    if (rows < 1 || cols < 1)
        throw DomainError("synth_planted: shape must be positive");
    if (k_true < 1)
        throw DomainError("synth_planted: K_true must be at least 1");
    if (!(sparsity > 0.0 && sparsity <= 1.0))
        throw DomainError("synth_planted: sparsity must lie in (0, 1]");
    if (!(eps > 0.0))
        throw DomainError("synth_planted: epsilon must be positive");
    Rng rng(seed);
    auto draw = [&](Eigen::Index n) {
        Matrix f(n, k_true);
        for (Eigen::Index k = 0; k < k_true; ++k)
            for (Eigen::Index i = 0; i < n; ++i) {
                const double v = rng.exponential(1.0);
                f(i, k) = rng.bernoulli(sparsity) ? v : 0.0;
            }
        return f;
    };
    PlantedData out;
    out.A = draw(rows);
    out.X = draw(cols);
    const Matrix mean = out.A * out.X.transpose();
    Matrix y(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            y(i, j) = (mean(i, j) + eps) * rng.exponential(1.0);
    out.y = factorization::DataMatrix(std::move(y));
    return out;
}

} // namespace dibpnmf::io
