// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include "dibpnmf/errors.hpp"
#include "dibpnmf/factorization/model.hpp"
#include "dibpnmf/matrix.hpp"
#include "dibpnmf/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace dibpnmf::factorization {

struct SnmfResult {
    Matrix A; ///< M x k
    Matrix X; ///< N x k
    std::vector<double> objective; ///< entry 0 is the initial value
};

inline constexpr double snmf_floor = 1e-12;

/// ||W .* (Y - A X^T)||_F^2 + lambda (sum A + sum X).
inline double snmf_objective(const Matrix& y, const Matrix& w, const Matrix& a,
                             const Matrix& x, double lambda) {
    const Matrix r = w.cwiseProduct(y - a * x.transpose());
    return r.squaredNorm() + lambda * (a.sum() + x.sum());
}

/**
 * Sparse NMF by masked multiplicative updates,
 *
 *   A <- A .* ((W .* Y) X) / ((W .* A X^T) X + lambda / 2)
 *   X <- X .* ((W .* Y)^T A) / ((W .* A X^T)^T A + lambda / 2)
 *
 * with numerator, denominator and result floored at 1e-12. The starting
 * factors are uniform on (0, sqrt(mean(Y) / k)) so the product has the
 * data's scale. Throws NumericalError on a non-finite objective.
 */
inline SnmfResult snmf_fit(const DataMatrix& y, std::size_t k, double lambda,
                           std::size_t iters, std::uint64_t seed) {
    DIBPNMF_REQUIRE(k >= 1, "snmf_fit: k must be at least 1");
    if (!(lambda >= 0.0))
        throw DomainError("snmf_fit: lambda must be nonnegative");
    y.validate();
    const Matrix w = y.weights();
    const Matrix wy = w.cwiseProduct(y.values);
    const auto kk = static_cast<Eigen::Index>(k);
    const double observed = w.sum();
    const double mean = observed > 0.0 ? wy.sum() / observed : 0.0;
    const double scale = std::sqrt(std::max(mean, 1e-6) / static_cast<double>(k));

    Rng rng(seed);
    SnmfResult out;
    out.A.resize(y.rows(), kk);
    out.X.resize(y.cols(), kk);
    for (Eigen::Index i = 0; i < out.A.size(); ++i)
        out.A.data()[i] = scale * rng.uniform();
    for (Eigen::Index i = 0; i < out.X.size(); ++i)
        out.X.data()[i] = scale * rng.uniform();

    const double shift = 0.5 * lambda;
    auto record = [&] {
        const double f = snmf_objective(y.values, w, out.A, out.X, lambda);
        if (!std::isfinite(f))
            throw NumericalError("snmf_fit: non-finite objective after " +
                                 std::to_string(out.objective.size()) +
                                 " iterations");
        out.objective.push_back(f);
    };
    record();
    for (std::size_t it = 0; it < iters; ++it) {
        {
            const Matrix num = wy * out.X;
            const Matrix den =
                w.cwiseProduct(out.A * out.X.transpose()) * out.X;
            for (Eigen::Index i = 0; i < out.A.size(); ++i) {
                const double d = std::max(den.data()[i] + shift, snmf_floor);
                out.A.data()[i] = std::max(
                    out.A.data()[i] * std::max(num.data()[i], snmf_floor) / d,
                    snmf_floor);
            }
        }
        {
            const Matrix num = wy.transpose() * out.A;
            const Matrix den =
                w.cwiseProduct(out.A * out.X.transpose()).transpose() * out.A;
            for (Eigen::Index i = 0; i < out.X.size(); ++i) {
                const double d = std::max(den.data()[i] + shift, snmf_floor);
                out.X.data()[i] = std::max(
                    out.X.data()[i] * std::max(num.data()[i], snmf_floor) / d,
                    snmf_floor);
            }
        }
        record();
    }
    return out;
}

} // namespace dibpnmf::factorization
