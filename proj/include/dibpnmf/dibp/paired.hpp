// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include "dibpnmf/errors.hpp"
#include "dibpnmf/matrix.hpp"
#include "dibpnmf/random.hpp"
#include "dibpnmf/stats/distributions.hpp"
#include "dibpnmf/stats/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <variant>
#include <vector>

namespace dibpnmf::dibp {

using Coupling = std::variant<stats::BivariateBetaParams, stats::FgmParams>;

/**
 * Two decreasing stick chains whose consecutive ratios
 * nu_k = mu_k / mu_{k-1} (mu_0 = 1) are drawn jointly from the coupling.
 *
 * Indices are zero-based: mu1[0] is the first stick.
 */
struct PairedStickState {
    std::vector<double> mu1;
    std::vector<double> mu2;
    Coupling coupling = stats::BivariateBetaParams{};

    std::size_t size() const noexcept { return mu1.size(); }

    friend bool operator==(const PairedStickState&,
                           const PairedStickState&) = default;
};

inline void validate(const Coupling& c) {
    std::visit([](const auto& p) { stats::validate(p); }, c);
}

/// Joint log-density of one (nu1, nu2) pair under the coupling; -inf when a
/// ratio leaves the open unit interval.
inline double pair_logpdf(double nu1, double nu2, const Coupling& c) {
    if (!(nu1 > 0.0 && nu1 < 1.0 && nu2 > 0.0 && nu2 < 1.0))
        return stats::neg_inf;
    return std::visit(
        [&](const auto& p) -> double {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, stats::BivariateBetaParams>)
                return stats::detail::bivariate_beta_logpdf_c(
                    nu1, 1.0 - nu1, nu2, 1.0 - nu2, p,
                    stats::log_beta3(p.a, p.b, p.c));
            else
                return stats::fgm_pair_logpdf(nu1, nu2, p);
        },
        c);
}

inline std::pair<double, double> pair_sample(const Coupling& c, Rng& rng) {
    return std::visit(
        [&](const auto& p) -> std::pair<double, double> {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, stats::BivariateBetaParams>)
                return stats::bivariate_beta_sample(p, rng);
            else
                return stats::fgm_pair_sample(p, rng);
        },
        c);
}

/// Shapes of the Beta(., 1) marginals of nu1 and nu2: (a, b) for the
/// bivariate beta with c = 1, (alpha1, alpha2) for the copula.
inline std::pair<double, double> marginal_shapes(const Coupling& c) {
    return std::visit(
        [](const auto& p) -> std::pair<double, double> {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, stats::BivariateBetaParams>)
                return {p.a, p.b};
            else
                return {p.alpha1, p.alpha2};
        },
        c);
}

/// Cumulative products of the ratio sequences, floored at the smallest
/// normal double so long chains with small shapes stay positive.
inline PairedStickState chains_from_ratios(const std::vector<double>& nu1,
                                           const std::vector<double>& nu2,
                                           const Coupling& c) {
    DIBPNMF_REQUIRE(nu1.size() == nu2.size(),
                    "chains_from_ratios: ratio sequences differ in length");
    PairedStickState s;
    s.coupling = c;
    s.mu1.resize(nu1.size());
    s.mu2.resize(nu2.size());
    double p1 = 1.0;
    double p2 = 1.0;
    for (std::size_t k = 0; k < nu1.size(); ++k) {
        p1 = std::max(p1 * nu1[k], std::numeric_limits<double>::min());
        p2 = std::max(p2 * nu2[k], std::numeric_limits<double>::min());
        s.mu1[k] = p1;
        s.mu2[k] = p2;
    }
    return s;
}

/// Ratios nu_k = mu_k / mu_{k-1} of one chain, kept below 1 (sticks
/// resting on the floor in chains_from_ratios would otherwise give 1).
inline std::vector<double> ratios(const std::vector<double>& mu) {
    std::vector<double> nu(mu.size());
    const double hi = std::nextafter(1.0, 0.0);
    double prev = 1.0;
    for (std::size_t k = 0; k < mu.size(); ++k) {
        nu[k] = std::min(mu[k] / prev, hi);
        prev = mu[k];
    }
    return nu;
}

/**
 * Draws K ratio pairs from the coupling and returns the chains.
 *
 * Ratios are kept in [1e-8, 1 - 2^-53]; together with the floor in
 * chains_from_ratios the chains stay non-increasing and positive.
 */
inline PairedStickState init_chains(const Coupling& c, std::size_t K,
                                    Rng& rng) {
    validate(c);
    DIBPNMF_REQUIRE(K >= 1, "init_chains: K must be at least 1");
    constexpr double lo = 1e-8;
    const double hi = std::nextafter(1.0, 0.0);
    std::vector<double> nu1(K);
    std::vector<double> nu2(K);
    for (std::size_t k = 0; k < K; ++k) {
        const auto [x, y] = pair_sample(c, rng);
        nu1[k] = std::clamp(x, lo, hi);
        nu2[k] = std::clamp(y, lo, hi);
    }
    return chains_from_ratios(nu1, nu2, c);
}

/// True when both chains are non-increasing and inside (0, 1).
inline bool chains_ordered(const std::vector<double>& mu) {
    double prev = 1.0;
    for (double m : mu) {
        if (!(m > 0.0 && m < 1.0) || m > prev)
            return false;
        prev = m;
    }
    return true;
}

namespace detail {

inline double before(const std::vector<double>& mu, std::size_t k) {
    return k == 0 ? 1.0 : mu[k - 1];
}

} // namespace detail

/**
 * Log of the conditional density of (mu1_k, mu2_k) given the neighbours,
 *
 *   p(mu_k / mu_{k-1}) / (mu1_{k-1} mu2_{k-1})
 *     * p(mu_{k+1} / mu_k) / (mu1_k mu2_k)     (omitted for the last stick)
 *
 * evaluated at candidate values m1, m2 for stick k (zero-based).
 */
inline double conditional_pair_logpdf(std::size_t k, double m1, double m2,
                                      const PairedStickState& s) {
    DIBPNMF_REQUIRE(k < s.size(), "conditional_pair_logpdf: index out of range");
    const double p1 = detail::before(s.mu1, k);
    const double p2 = detail::before(s.mu2, k);
    double lp = pair_logpdf(m1 / p1, m2 / p2, s.coupling);
    if (lp == stats::neg_inf)
        return lp;
    lp -= std::log(p1) + std::log(p2);
    if (k + 1 < s.size()) {
        const double f = pair_logpdf(s.mu1[k + 1] / m1, s.mu2[k + 1] / m2,
                                     s.coupling);
        if (f == stats::neg_inf)
            return f;
        lp += f - std::log(m1) - std::log(m2);
    }
    return lp;
}

inline double conditional_pair_logpdf(std::size_t k, const PairedStickState& s) {
    return conditional_pair_logpdf(k, s.mu1[k], s.mu2[k], s);
}

/// sum_n z log mu + (1 - z) log(1 - mu) from the column's one-count.
inline double column_bernoulli_loglik(double mu, Eigen::Index ones,
                                      Eigen::Index total) {
    DIBPNMF_REQUIRE(ones >= 0 && ones <= total,
                    "column_bernoulli_loglik: bad counts");
    const Eigen::Index zeros = total - ones;
    double ll = 0.0;
    if (ones > 0)
        ll += mu > 0.0 ? static_cast<double>(ones) * std::log(mu) : stats::neg_inf;
    if (zeros > 0)
        ll += mu < 1.0 ? static_cast<double>(zeros) * std::log1p(-mu)
                       : stats::neg_inf;
    return ll;
}

template <typename Derived>
double column_bernoulli_loglik(double mu, const Eigen::MatrixBase<Derived>& z) {
    Eigen::Index ones = 0;
    for (Eigen::Index i = 0; i < z.size(); ++i)
        ones += z.derived()(i) != 0;
    return column_bernoulli_loglik(mu, ones, z.size());
}

/// Per-column one-counts of both masks, the sufficient statistic the stick
/// updates need.
struct ColumnCounts {
    std::vector<Eigen::Index> ones1;
    std::vector<Eigen::Index> ones2;
    Eigen::Index rows1 = 0;
    Eigen::Index rows2 = 0;
};

inline ColumnCounts column_counts(const BinaryMatrix& z1,
                                  const BinaryMatrix& z2) {
    DIBPNMF_REQUIRE(z1.cols() == z2.cols(),
                    "column_counts: masks differ in column count");
    ColumnCounts c;
    c.rows1 = z1.rows();
    c.rows2 = z2.rows();
    c.ones1.resize(static_cast<std::size_t>(z1.cols()));
    c.ones2.resize(static_cast<std::size_t>(z2.cols()));
    for (Eigen::Index k = 0; k < z1.cols(); ++k) {
        c.ones1[static_cast<std::size_t>(k)] = column_ones(z1, k);
        c.ones2[static_cast<std::size_t>(k)] = column_ones(z2, k);
    }
    return c;
}

/// Admissible interval [mu_{k+1}, mu_{k-1}] for stick k, with mu_{K+1} = 0.
inline std::pair<double, double> stick_bounds(const std::vector<double>& mu,
                                              std::size_t k) {
    return {k + 1 < mu.size() ? mu[k + 1] : 0.0, detail::before(mu, k)};
}

/**
 * Log acceptance ratio for moving stick k from (mu1_k, mu2_k) to (m1, m2):
 * Bernoulli likelihood of both columns, the conditional pair density, and
 * the reverse/forward ratio of the Beta(alpha/K, 1) proposal (its truncation
 * constant is the same in both directions and cancels).
 */
inline double stick_log_acceptance(std::size_t k, double m1, double m2,
                                   const PairedStickState& s,
                                   const ColumnCounts& counts) {
    const double K = static_cast<double>(s.size());
    const auto [al1, al2] = marginal_shapes(s.coupling);
    const double cur1 = s.mu1[k];
    const double cur2 = s.mu2[k];
    if (m1 == cur1 && m2 == cur2)
        return 0.0;
    const double target_new =
        conditional_pair_logpdf(k, m1, m2, s) +
        column_bernoulli_loglik(m1, counts.ones1[k], counts.rows1) +
        column_bernoulli_loglik(m2, counts.ones2[k], counts.rows2);
    if (target_new == stats::neg_inf)
        return stats::neg_inf;
    const double target_cur =
        conditional_pair_logpdf(k, cur1, cur2, s) +
        column_bernoulli_loglik(cur1, counts.ones1[k], counts.rows1) +
        column_bernoulli_loglik(cur2, counts.ones2[k], counts.rows2);
    // q(x) proportional to x^(alpha/K - 1)
    const double q_ratio = (al1 / K - 1.0) * (std::log(cur1) - std::log(m1)) +
                           (al2 / K - 1.0) * (std::log(cur2) - std::log(m2));
    return target_new - target_cur + q_ratio;
}

/// One Metropolis-Hastings move of stick k. Returns true on acceptance.
inline bool mh_update_sticks(std::size_t k, PairedStickState& s,
                             const ColumnCounts& counts, Rng& rng) {
    DIBPNMF_REQUIRE(k < s.size(), "mh_update_sticks: index out of range");
    const double K = static_cast<double>(s.size());
    const auto [al1, al2] = marginal_shapes(s.coupling);
    const auto [lo1, hi1] = stick_bounds(s.mu1, k);
    const auto [lo2, hi2] = stick_bounds(s.mu2, k);
    if (!(lo1 < hi1 && lo2 < hi2))
        return false;
    const double m1 = stats::truncated_beta_sample(al1 / K, lo1, hi1, rng);
    const double m2 = stats::truncated_beta_sample(al2 / K, lo2, hi2, rng);
    const double log_r = stick_log_acceptance(k, m1, m2, s, counts);
    if (!(log_r >= 0.0 || std::log(rng.uniform()) < log_r))
        return false;
    s.mu1[k] = m1;
    s.mu2[k] = m2;
    return true;
}

inline bool mh_update_sticks(std::size_t k, PairedStickState& s,
                             const BinaryMatrix& z1, const BinaryMatrix& z2,
                             Rng& rng) {
    return mh_update_sticks(k, s, column_counts(z1, z2), rng);
}

/// Sweeps every stick once in index order; returns the number accepted.
inline std::size_t mh_sweep_sticks(PairedStickState& s, const BinaryMatrix& z1,
                                   const BinaryMatrix& z2, Rng& rng) {
    const ColumnCounts counts = column_counts(z1, z2);
    std::size_t accepted = 0;
    for (std::size_t k = 0; k < s.size(); ++k)
        accepted += mh_update_sticks(k, s, counts, rng);
    return accepted;
}

/// Columns active in both masks.
inline std::size_t effective_k(const BinaryMatrix& z1, const BinaryMatrix& z2) {
    DIBPNMF_REQUIRE(z1.cols() == z2.cols(),
                    "effective_k: masks differ in column count");
    std::size_t n = 0;
    for (Eigen::Index k = 0; k < z1.cols(); ++k)
        n += column_ones(z1, k) > 0 && column_ones(z2, k) > 0;
    return n;
}

} // namespace dibpnmf::dibp
