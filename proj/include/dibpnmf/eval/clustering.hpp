// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include "dibpnmf/errors.hpp"
#include "dibpnmf/matrix.hpp"
#include "dibpnmf/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace dibpnmf::eval {

/// a: pairs together in both labelings; b: together in the truth only;
/// c: together in the prediction only.
struct PairCounts {
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    std::uint64_t c = 0;

    friend bool operator==(const PairCounts&, const PairCounts&) = default;
};

namespace detail {

constexpr std::uint64_t choose2(std::uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

} // namespace detail

/// Pair counts from the contingency table of the two labelings.
inline PairCounts pair_counts(std::span<const int> predicted,
                              std::span<const int> truth) {
    DIBPNMF_REQUIRE(predicted.size() == truth.size(),
                    "pair_counts: labelings differ in length");
    DIBPNMF_REQUIRE(predicted.size() >= 2, "pair_counts: need at least 2 points");
    std::map<std::pair<int, int>, std::uint64_t> joint;
    std::map<int, std::uint64_t> pred;
    std::map<int, std::uint64_t> tru;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        ++joint[{predicted[i], truth[i]}];
        ++pred[predicted[i]];
        ++tru[truth[i]];
    }
    std::uint64_t both = 0;
    std::uint64_t in_pred = 0;
    std::uint64_t in_truth = 0;
    for (const auto& [key, n] : joint)
        both += detail::choose2(n);
    for (const auto& [key, n] : pred)
        in_pred += detail::choose2(n);
    for (const auto& [key, n] : tru)
        in_truth += detail::choose2(n);
    return {both, in_truth - both, in_pred - both};
}

/// Metrics are empty when their denominator vanishes.
struct ClusterMetrics {
    std::optional<double> jc;
    std::optional<double> fm;
    std::optional<double> f1;
};

/**
 * JC = a / (a + b + c), FM = sqrt(a/(a+b) * a/(a+c)),
 * F1 = 2a^2 / (2a^2 + ac + ab), evaluated as 2a / (2a + b + c) after
 * cancelling a (identical for a > 0; a = 0 with b + c > 0 gives 0).
 */
inline ClusterMetrics cluster_metrics(const PairCounts& pc) {
    const double a = static_cast<double>(pc.a);
    const double b = static_cast<double>(pc.b);
    const double c = static_cast<double>(pc.c);
    ClusterMetrics m;
    if (a + b + c > 0.0)
        m.jc = a / (a + b + c);
    if (a + b > 0.0 && a + c > 0.0)
        m.fm = std::sqrt(a / (a + b) * (a / (a + c)));
    if (2.0 * a + b + c > 0.0)
        m.f1 = 2.0 * a / (2.0 * a + b + c);
    return m;
}

struct KMeansResult {
    std::vector<int> labels;
    Matrix centers;
    double wcss = 0.0;
};

namespace detail {

inline double sq_dist(const Matrix& x, Eigen::Index i, const Matrix& c,
                      Eigen::Index j) {
    return (x.row(i) - c.row(j)).squaredNorm();
}

/// k-means++ seeding: first center uniform, then proportional to D^2.
inline Matrix kmeanspp(const Matrix& x, Eigen::Index k, Rng& rng) {
    const Eigen::Index p = x.rows();
    Matrix c(k, x.cols());
    std::vector<double> d2(static_cast<std::size_t>(p),
                           std::numeric_limits<double>::infinity());
    Eigen::Index pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(p)));
    for (Eigen::Index j = 0; j < k; ++j) {
        c.row(j) = x.row(pick);
        double total = 0.0;
        for (Eigen::Index i = 0; i < p; ++i) {
            auto& d = d2[static_cast<std::size_t>(i)];
            d = std::min(d, sq_dist(x, i, c, j));
            total += d;
        }
        if (j + 1 == k)
            break;
        if (total > 0.0) {
            double u = rng.uniform() * total;
            pick = p - 1;
            for (Eigen::Index i = 0; i < p; ++i) {
                u -= d2[static_cast<std::size_t>(i)];
                if (u < 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = (pick + 1) % p;
        }
    }
    return c;
}

/// Nearest center, ties to the lowest index.
inline Eigen::Index nearest(const Matrix& x, Eigen::Index i, const Matrix& c,
                            double* dist) {
    Eigen::Index best = 0;
    double bd = sq_dist(x, i, c, 0);
    for (Eigen::Index j = 1; j < c.rows(); ++j) {
        const double d = sq_dist(x, i, c, j);
        if (d < bd) {
            bd = d;
            best = j;
        }
    }
    if (dist)
        *dist = bd;
    return best;
}

inline KMeansResult lloyd(const Matrix& x, Matrix c, std::size_t max_iter) {
    const Eigen::Index p = x.rows();
    const Eigen::Index k = c.rows();
    KMeansResult r;
    r.labels.assign(static_cast<std::size_t>(p), -1);
    std::vector<double> dist(static_cast<std::size_t>(p));
    for (std::size_t it = 0; it < max_iter; ++it) {
        bool changed = false;
        for (Eigen::Index i = 0; i < p; ++i) {
            const int l = static_cast<int>(nearest(x, i, c, &dist[static_cast<std::size_t>(i)]));
            changed |= l != r.labels[static_cast<std::size_t>(i)];
            r.labels[static_cast<std::size_t>(i)] = l;
        }
        Matrix sum = Matrix::Zero(k, x.cols());
        std::vector<Eigen::Index> count(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < p; ++i) {
            const int l = r.labels[static_cast<std::size_t>(i)];
            sum.row(l) += x.row(i);
            ++count[static_cast<std::size_t>(l)];
        }
        bool reseeded = false;
        for (Eigen::Index j = 0; j < k; ++j) {
            if (count[static_cast<std::size_t>(j)] > 0) {
                c.row(j) = sum.row(j) / static_cast<double>(count[static_cast<std::size_t>(j)]);
                continue;
            }
            // empty cluster: move its center to the point farthest from its own
            Eigen::Index far = 0;
            for (Eigen::Index i = 1; i < p; ++i)
                if (dist[static_cast<std::size_t>(i)] > dist[static_cast<std::size_t>(far)])
                    far = i;
            c.row(j) = x.row(far);
            dist[static_cast<std::size_t>(far)] = 0.0;
            reseeded = true;
        }
        if (!changed && !reseeded)
            break;
    }
    r.wcss = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) {
        double d;
        r.labels[static_cast<std::size_t>(i)] = static_cast<int>(nearest(x, i, c, &d));
        r.wcss += d;
    }
    r.centers = std::move(c);
    return r;
}

} // namespace detail

/**
 * k-means on the rows of x: k-means++ seeding, Lloyd iterations, best of
 * `restarts` runs by within-cluster sum of squares (earliest run wins ties).
 */
inline KMeansResult kmeans_assign(const Matrix& x, std::size_t n_clusters,
                                  std::uint64_t seed, std::size_t restarts = 10,
                                  std::size_t max_iter = 300) {
    DIBPNMF_REQUIRE(n_clusters >= 1, "kmeans_assign: need at least one cluster");
    DIBPNMF_REQUIRE(n_clusters <= static_cast<std::size_t>(x.rows()),
                    "kmeans_assign: more clusters than points");
    DIBPNMF_REQUIRE(restarts >= 1, "kmeans_assign: restarts must be positive");
    Rng rng(seed);
    KMeansResult best;
    best.wcss = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < restarts; ++r) {
        Matrix c = detail::kmeanspp(x, static_cast<Eigen::Index>(n_clusters), rng);
        KMeansResult cur = detail::lloyd(x, std::move(c), max_iter);
        if (cur.wcss < best.wcss)
            best = std::move(cur);
    }
    return best;
}

} // namespace dibpnmf::eval
