// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include "dibpnmf/errors.hpp"
#include "dibpnmf/matrix.hpp"

#include <cmath>
#include <cstddef>
#include <optional>

namespace dibpnmf::factorization {

/// Nonnegative observations with an optional mask (1 = observed).
struct DataMatrix {
    Matrix values;
    std::optional<BinaryMatrix> mask;

    DataMatrix() = default;
    explicit DataMatrix(Matrix v, std::optional<BinaryMatrix> m = std::nullopt)
        : values(std::move(v)), mask(std::move(m)) {
        validate();
    }

    Eigen::Index rows() const noexcept { return values.rows(); }
    Eigen::Index cols() const noexcept { return values.cols(); }

    bool observed(Eigen::Index m, Eigen::Index n) const {
        return !mask || (*mask)(m, n) != 0;
    }

    /// 0/1 weights, all ones without a mask.
    Matrix weights() const {
        return mask ? to_real(*mask) : Matrix::Ones(rows(), cols());
    }

    void validate() const {
        for (Eigen::Index i = 0; i < values.size(); ++i)
            if (!(values.data()[i] >= 0.0) || !std::isfinite(values.data()[i]))
                throw DomainError("data matrix: entries must be finite and "
                                  "nonnegative");
        if (mask && (mask->rows() != rows() || mask->cols() != cols()))
            throw ContractViolation("data matrix: mask shape differs from "
                                    "values");
    }

    friend bool operator==(const DataMatrix& a, const DataMatrix& b) {
        if (a.mask.has_value() != b.mask.has_value())
            return false;
        return same_matrix(a.values, b.values) &&
               (!a.mask || same_matrix(*a.mask, *b.mask));
    }
};

/// Loadings and masks; A = V1 .* Z1 (M x K), X = V2 .* Z2 (N x K).
struct FactorState {
    Matrix V1;
    Matrix V2;
    BinaryMatrix Z1;
    BinaryMatrix Z2;

    Eigen::Index K() const noexcept { return V1.cols(); }

    Matrix A() const { return V1.cwiseProduct(to_real(Z1)); }
    Matrix X() const { return V2.cwiseProduct(to_real(Z2)); }

    friend bool operator==(const FactorState& a, const FactorState& b) {
        return same_matrix(a.V1, b.V1) && same_matrix(a.V2, b.V2) &&
               same_matrix(a.Z1, b.Z1) && same_matrix(a.Z2, b.Z2);
    }
};

inline void check_shapes(const FactorState& s) {
    DIBPNMF_REQUIRE(s.Z1.rows() == s.V1.rows() && s.Z1.cols() == s.V1.cols() &&
                        s.Z2.rows() == s.V2.rows() &&
                        s.Z2.cols() == s.V2.cols() &&
                        s.V1.cols() == s.V2.cols(),
                    "factor state: inconsistent shapes");
}

/// A X^T.
inline Matrix reconstruct(const FactorState& s) {
    check_shapes(s);
    return s.A() * s.X().transpose();
}

/// Exponential log-likelihood with mean (A X^T)_{mn} + eps over observed
/// entries, given the reconstruction.
inline double log_likelihood(const DataMatrix& y, const Matrix& recon,
                             double eps) {
    DIBPNMF_REQUIRE(recon.rows() == y.rows() && recon.cols() == y.cols(),
                    "log_likelihood: shape mismatch");
    if (!(eps > 0.0))
        throw DomainError("log_likelihood: epsilon must be positive");
    double ll = 0.0;
    for (Eigen::Index n = 0; n < y.cols(); ++n)
        for (Eigen::Index m = 0; m < y.rows(); ++m)
            if (y.observed(m, n)) {
                const double mean = recon(m, n) + eps;
                ll += -std::log(mean) - y.values(m, n) / mean;
            }
    return ll;
}

inline double log_likelihood(const DataMatrix& y, const FactorState& s,
                             double eps) {
    return log_likelihood(y, reconstruct(s), eps);
}

/// Entrywise l1 distance, restricted to mask == 1 entries when a mask is
/// given.
inline double recon_error_l1(const Matrix& y, const Matrix& yhat,
                             const BinaryMatrix* mask = nullptr) {
    DIBPNMF_REQUIRE(y.rows() == yhat.rows() && y.cols() == yhat.cols(),
                    "recon_error_l1: shape mismatch");
    DIBPNMF_REQUIRE(!mask || (mask->rows() == y.rows() && mask->cols() == y.cols()),
                    "recon_error_l1: mask shape mismatch");
    double e = 0.0;
    for (Eigen::Index n = 0; n < y.cols(); ++n)
        for (Eigen::Index m = 0; m < y.rows(); ++m)
            if (!mask || (*mask)(m, n) != 0)
                e += std::fabs(y(m, n) - yhat(m, n));
    return e;
}

/// (1/K) sum_k |ones(Z1 col k) - ones(Z2 col k)|.
inline double flexibility_metric(const BinaryMatrix& z1, const BinaryMatrix& z2) {
    DIBPNMF_REQUIRE(z1.cols() == z2.cols(),
                    "flexibility_metric: masks differ in column count");
    DIBPNMF_REQUIRE(z1.cols() >= 1, "flexibility_metric: K must be at least 1");
    double sum = 0.0;
    for (Eigen::Index k = 0; k < z1.cols(); ++k)
        sum += std::fabs(static_cast<double>(column_ones(z1, k) - column_ones(z2, k)));
    return sum / static_cast<double>(z1.cols());
}

} // namespace dibpnmf::factorization
