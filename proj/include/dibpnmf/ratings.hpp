// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include "dibpnmf/errors.hpp"
#include "dibpnmf/matrix.hpp"

#include <set>
#include <utility>
#include <vector>

namespace dibpnmf {

/// One observed rating; indices are zero-based in memory.
struct Rating {
    Eigen::Index row = 0;
    Eigen::Index col = 0;
    double value = 0.0;

    friend bool operator==(const Rating&, const Rating&) = default;
};

struct RatingTriplets {
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    std::vector<Rating> ratings;

    void validate() const {
        std::set<std::pair<Eigen::Index, Eigen::Index>> seen;
        for (const Rating& r : ratings) {
            if (r.row < 0 || r.row >= rows || r.col < 0 || r.col >= cols)
                throw ContractViolation("ratings: index out of bounds");
            if (!(r.value >= 0.0))
                throw DomainError("ratings: values must be nonnegative");
            if (!seen.insert({r.row, r.col}).second)
                throw ContractViolation("ratings: duplicate entry");
        }
    }

    /// Dense values (zero where unobserved) and the observation mask.
    std::pair<Matrix, BinaryMatrix> dense() const {
        Matrix v = Matrix::Zero(rows, cols);
        BinaryMatrix m = BinaryMatrix::Zero(rows, cols);
        for (const Rating& r : ratings) {
            v(r.row, r.col) = r.value;
            m(r.row, r.col) = 1;
        }
        return {v, m};
    }

    friend bool operator==(const RatingTriplets&, const RatingTriplets&) = default;
};

} // namespace dibpnmf
