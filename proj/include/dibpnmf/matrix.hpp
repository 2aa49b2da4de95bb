// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include "dibpnmf/errors.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace dibpnmf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using BinaryMatrix =
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Number of ones in column k.
inline Eigen::Index column_ones(const BinaryMatrix& z, Eigen::Index k) {
    Eigen::Index n = 0;
    for (Eigen::Index r = 0; r < z.rows(); ++r)
        n += z(r, k) != 0;
    return n;
}

/// Shape-aware exact equality (Eigen's operator== requires equal shapes).
template <typename A, typename B>
bool same_matrix(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           (a.derived().array() == b.derived().array()).all();
}

inline Matrix to_real(const BinaryMatrix& z) { return z.cast<double>(); }

} // namespace dibpnmf
