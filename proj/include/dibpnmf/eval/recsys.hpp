// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include "dibpnmf/errors.hpp"
#include "dibpnmf/matrix.hpp"
#include "dibpnmf/random.hpp"
#include "dibpnmf/ratings.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

namespace dibpnmf::eval {

/// Unnormalized l1 error over the test entries (test_mask == 1).
inline double mae(const Matrix& y_rec, const Matrix& y_test,
                  const BinaryMatrix& test_mask) {
    DIBPNMF_REQUIRE(y_rec.rows() == y_test.rows() && y_rec.cols() == y_test.cols() &&
                        test_mask.rows() == y_test.rows() &&
                        test_mask.cols() == y_test.cols(),
                    "mae: shape mismatch");
    double e = 0.0;
    std::size_t n = 0;
    for (Eigen::Index j = 0; j < y_test.cols(); ++j)
        for (Eigen::Index i = 0; i < y_test.rows(); ++i)
            if (test_mask(i, j) != 0) {
                e += std::fabs(y_rec(i, j) - y_test(i, j));
                ++n;
            }
    DIBPNMF_REQUIRE(n > 0, "mae: empty test set");
    return e;
}

struct Fold {
    std::vector<std::size_t> test; ///< indices into the rating list, ascending
    BinaryMatrix train_mask;
    BinaryMatrix test_mask;
};

/**
 * Random partition of the ratings into `folds` test sets. The ratings are
 * shuffled (Fisher-Yates on the library stream) and fold f takes the
 * contiguous block [f n / folds, (f + 1) n / folds). Each fold trains on
 * every other observed rating.
 */
inline std::vector<Fold> cv_split(const RatingTriplets& t, std::size_t folds,
                                  std::uint64_t seed) {
    DIBPNMF_REQUIRE(folds >= 2, "cv_split: need at least 2 folds");
    const std::size_t n = t.ratings.size();
    DIBPNMF_REQUIRE(folds <= n, "cv_split: more folds than ratings");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i + 1));
        std::swap(order[i], order[j]);
    }
    const auto [values, observed] = t.dense();
    std::vector<Fold> out(folds);
    for (std::size_t f = 0; f < folds; ++f) {
        Fold& fold = out[f];
        const std::size_t lo = f * n / folds;
        const std::size_t hi = (f + 1) * n / folds;
        fold.test.assign(order.begin() + static_cast<std::ptrdiff_t>(lo),
                         order.begin() + static_cast<std::ptrdiff_t>(hi));
        std::sort(fold.test.begin(), fold.test.end());
        fold.train_mask = observed;
        fold.test_mask = BinaryMatrix::Zero(t.rows, t.cols);
        for (std::size_t idx : fold.test) {
            const Rating& r = t.ratings[idx];
            fold.train_mask(r.row, r.col) = 0;
            fold.test_mask(r.row, r.col) = 1;
        }
    }
    return out;
}

} // namespace dibpnmf::eval
