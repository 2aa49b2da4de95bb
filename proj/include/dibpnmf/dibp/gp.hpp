// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include "dibpnmf/dibp/paired.hpp"
#include "dibpnmf/errors.hpp"
#include "dibpnmf/matrix.hpp"
#include "dibpnmf/random.hpp"
#include "dibpnmf/stats/distributions.hpp"
#include "dibpnmf/stats/normal.hpp"
#include "dibpnmf/stats/sampling.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace dibpnmf::dibp {

/**
 * Shared sticks mu for both matrices, thresholded per matrix through a
 * Gaussian process over the covariate t. For each column k the GP values at
 * (t1, t2) are g_k; row n of matrix t switches column k on when its noisy
 * copy h^t_{nk} ~ N(g^t_k, eta^2) falls below the mu_k quantile of the
 * marginal N(0, sigma^2 + eta^2).
 */
struct GpStickState {
    std::vector<double> mu;
    std::vector<std::array<double, 2>> g;
    Matrix h1; ///< M x K
    Matrix h2; ///< N x K
    stats::GaussKernelParams kernel;
    double alpha = 1.0; ///< IBP concentration
    double hs = 1.0;    ///< gamma(hs, 1) prior shape on the length scale

    std::size_t size() const noexcept { return mu.size(); }

    friend bool operator==(const GpStickState& a, const GpStickState& b) {
        return a.mu == b.mu && a.g == b.g && same_matrix(a.h1, b.h1) &&
               same_matrix(a.h2, b.h2) && a.kernel == b.kernel &&
               a.alpha == b.alpha && a.hs == b.hs;
    }
};

/// 2 x 2 kernel covariance at the two covariate locations.
inline Eigen::Matrix2d kernel_matrix(const stats::GaussKernelParams& k) {
    stats::validate(k);
    Eigen::Matrix2d s;
    s(0, 0) = stats::kernel_cov(k, k.t1, k.t1);
    s(1, 1) = stats::kernel_cov(k, k.t2, k.t2);
    s(0, 1) = s(1, 0) = stats::kernel_cov(k, k.t1, k.t2);
    return s;
}

/// Threshold mu~ = F^-1(mu_k | 0, Sigma^(t,t) + eta^2); t is 0 or 1.
inline double gp_threshold(double mu, int t, const stats::GaussKernelParams& k) {
    const Eigen::Matrix2d s = kernel_matrix(k);
    return stats::normal_inv_cdf(mu, 0.0, s(t, t) + k.eta * k.eta);
}

/// Inclusion probability of matrix t (0 or 1) given mu_k and g^t_k:
/// gamma = F(mu~ - g | 0, eta^2).
inline double gp_gamma_value(double mu, double g, int t,
                             const stats::GaussKernelParams& k) {
    return stats::normal_cdf(gp_threshold(mu, t, k) - g, 0.0, k.eta * k.eta);
}

inline double gp_gamma(std::size_t k, int t, const GpStickState& s) {
    DIBPNMF_REQUIRE(k < s.size(), "gp_gamma: index out of range");
    DIBPNMF_REQUIRE(t == 0 || t == 1, "gp_gamma: matrix index must be 0 or 1");
    return gp_gamma_value(s.mu[k], s.g[k][static_cast<std::size_t>(t)], t,
                          s.kernel);
}

namespace detail {

/// log gamma and log(1 - gamma) without cancellation near either end.
inline std::pair<double, double> gp_log_gamma_pair(double mu, double g, int t,
                                                   const stats::GaussKernelParams& k) {
    const double z = (gp_threshold(mu, t, k) - g) / k.eta;
    return {std::log(stats::std_normal_cdf(z)),
            std::log(stats::std_normal_sf(z))};
}

} // namespace detail

/**
 * Log target of mu_k: mu_K^alpha / mu_k times the Bernoulli(gamma^t_k)
 * likelihood of both mask columns. Returns -inf outside (0, 1).
 */
inline double gp_mu_log_target(std::size_t k, double m, const GpStickState& s,
                               const ColumnCounts& counts) {
    if (!(m > 0.0 && m < 1.0))
        return stats::neg_inf;
    double lp = -std::log(m);
    if (k + 1 == s.size())
        lp += s.alpha * std::log(m);
    const Eigen::Index ones[2] = {counts.ones1[k], counts.ones2[k]};
    const Eigen::Index rows[2] = {counts.rows1, counts.rows2};
    for (int t = 0; t < 2; ++t) {
        const auto [lg, l1g] =
            detail::gp_log_gamma_pair(m, s.g[k][static_cast<std::size_t>(t)], t,
                                      s.kernel);
        const double n1 = static_cast<double>(ones[t]);
        const double n0 = static_cast<double>(rows[t] - ones[t]);
        if (n1 > 0.0)
            lp += n1 * lg;
        if (n0 > 0.0)
            lp += n0 * l1g;
    }
    return lp;
}

inline double gp_mu_log_acceptance(std::size_t k, double m,
                                   const GpStickState& s,
                                   const ColumnCounts& counts) {
    const double cur = s.mu[k];
    if (m == cur)
        return 0.0;
    const double t_new = gp_mu_log_target(k, m, s, counts);
    if (t_new == stats::neg_inf)
        return t_new;
    const double a = s.alpha / static_cast<double>(s.size());
    return t_new - gp_mu_log_target(k, cur, s, counts) +
           (a - 1.0) * (std::log(cur) - std::log(m));
}

/// Metropolis-Hastings move of mu_k with the truncated Beta(alpha/K, 1)
/// proposal on [mu_{k+1}, mu_{k-1}].
inline bool gp_update_mu(std::size_t k, GpStickState& s,
                         const ColumnCounts& counts, Rng& rng) {
    DIBPNMF_REQUIRE(k < s.size(), "gp_update_mu: index out of range");
    const auto [lo, hi] = stick_bounds(s.mu, k);
    if (!(lo < hi))
        return false;
    const double a = s.alpha / static_cast<double>(s.size());
    const double m = stats::truncated_beta_sample(a, lo, hi, rng);
    const double log_r = gp_mu_log_acceptance(k, m, s, counts);
    if (!(log_r >= 0.0 || std::log(rng.uniform()) < log_r))
        return false;
    s.mu[k] = m;
    return true;
}

inline bool gp_update_mu(std::size_t k, GpStickState& s, const BinaryMatrix& z1,
                         const BinaryMatrix& z2, Rng& rng) {
    return gp_update_mu(k, s, column_counts(z1, z2), rng);
}

/// Gaussian full conditional of g_k.
struct Gaussian2 {
    Eigen::Vector2d mean;
    Eigen::Matrix2d cov;
};

/// Precision Sigma^-1 + diag(N1, N2) / eta^2, mean = cov * (h sums) / eta^2.
inline Gaussian2 gp_g_conditional(std::size_t k, const GpStickState& s) {
    DIBPNMF_REQUIRE(k < s.size(), "gp_g_conditional: index out of range");
    const Eigen::Matrix2d sigma = kernel_matrix(s.kernel);
    const double e2 = s.kernel.eta * s.kernel.eta;
    const auto kk = static_cast<Eigen::Index>(k);
    Eigen::Matrix2d prec = sigma.inverse();
    prec(0, 0) += static_cast<double>(s.h1.rows()) / e2;
    prec(1, 1) += static_cast<double>(s.h2.rows()) / e2;
    const Eigen::Vector2d rhs(s.h1.col(kk).sum() / e2, s.h2.col(kk).sum() / e2);
    Gaussian2 out;
    out.cov = prec.inverse();
    out.cov(1, 0) = out.cov(0, 1);
    out.mean = out.cov * rhs;
    return out;
}

inline Eigen::Vector2d sample_gaussian2(const Gaussian2& d, Rng& rng) {
    const Eigen::LLT<Eigen::Matrix2d> llt(d.cov);
    if (llt.info() != Eigen::Success)
        throw NumericalError("gp: conditional covariance of g is not positive "
                             "definite");
    const double z0 = rng.normal();
    const double z1 = rng.normal();
    return d.mean + llt.matrixL() * Eigen::Vector2d(z0, z1);
}

inline void gp_update_g(std::size_t k, GpStickState& s, Rng& rng) {
    const Eigen::Vector2d x = sample_gaussian2(gp_g_conditional(k, s), rng);
    s.g[k] = {x(0), x(1)};
}

/// Truncated-normal draw of h^t_{nk}: below mu~ when z = 1, above otherwise.
inline double gp_draw_h(double mu, double g, int t, bool z,
                        const stats::GaussKernelParams& k, Rng& rng,
                        stats::SamplerDiagnostics* diag = nullptr) {
    const double thr = gp_threshold(mu, t, k);
    const auto support =
        z ? stats::HalfLine::below(thr) : stats::HalfLine::above(thr);
    return stats::truncated_normal_sample(g, k.eta * k.eta, support, rng, diag);
}

inline void gp_update_h(std::size_t n, std::size_t k, int t, GpStickState& s,
                        const BinaryMatrix& z, Rng& rng,
                        stats::SamplerDiagnostics* diag = nullptr) {
    Matrix& h = t == 0 ? s.h1 : s.h2;
    const auto nn = static_cast<Eigen::Index>(n);
    const auto kk = static_cast<Eigen::Index>(k);
    h(nn, kk) = gp_draw_h(s.mu[k], s.g[k][static_cast<std::size_t>(t)], t,
                          z(nn, kk) != 0, s.kernel, rng, diag);
}

/// Redraws every h entry of both matrices.
inline void gp_sweep_h(GpStickState& s, const BinaryMatrix& z1,
                       const BinaryMatrix& z2, Rng& rng,
                       stats::SamplerDiagnostics* diag = nullptr) {
    for (std::size_t k = 0; k < s.size(); ++k) {
        for (Eigen::Index n = 0; n < z1.rows(); ++n)
            gp_update_h(static_cast<std::size_t>(n), k, 0, s, z1, rng, diag);
        for (Eigen::Index n = 0; n < z2.rows(); ++n)
            gp_update_h(static_cast<std::size_t>(n), k, 1, s, z2, rng, diag);
    }
}

/// log gamma(s; hs, 1) + sum_k log N(g_k | 0, Sigma(s)).
inline double gp_s_log_target(double len, const GpStickState& s) {
    if (!(len > 0.0))
        return stats::neg_inf;
    stats::GaussKernelParams k = s.kernel;
    k.s = len;
    const Eigen::Matrix2d sigma = kernel_matrix(k);
    const double det = sigma.determinant();
    if (!(det > 0.0))
        return stats::neg_inf;
    const Eigen::Matrix2d inv = sigma.inverse();
    double lp = stats::gamma_logpdf(len, s.hs, 1.0);
    const double norm = -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(det);
    for (const auto& gk : s.g) {
        const Eigen::Vector2d v(gk[0], gk[1]);
        lp += norm - 0.5 * v.dot(inv * v);
    }
    return lp;
}

/// Random walk on log s; the log s' - log s term is the change-of-variables
/// correction.
inline double gp_s_log_acceptance(double proposal, const GpStickState& s) {
    if (proposal == s.kernel.s)
        return 0.0;
    const double t_new = gp_s_log_target(proposal, s);
    if (t_new == stats::neg_inf)
        return t_new;
    return t_new - gp_s_log_target(s.kernel.s, s) + std::log(proposal) -
           std::log(s.kernel.s);
}

inline bool gp_update_s(GpStickState& s, double step, Rng& rng) {
    const double proposal = s.kernel.s * std::exp(step * rng.normal());
    const double log_r = gp_s_log_acceptance(proposal, s);
    if (!(log_r >= 0.0 || std::log(rng.uniform()) < log_r))
        return false;
    s.kernel.s = proposal;
    return true;
}

/**
 * Prior draw: mu from stick-breaking with Beta(alpha, 1) ratios, g_k from
 * N(0, Sigma), h from N(g, eta^2). Masks consistent with h are then
 * z = [h < mu~].
 */
inline GpStickState init_gp(std::size_t K, Eigen::Index rows1, Eigen::Index rows2,
                            const stats::GaussKernelParams& kernel, double alpha,
                            double hs, Rng& rng) {
    stats::validate(kernel);
    DIBPNMF_REQUIRE(K >= 1, "init_gp: K must be at least 1");
    if (!(alpha > 0.0 && hs > 0.0))
        throw DomainError("init_gp: alpha and hs must be positive");
    GpStickState s;
    s.kernel = kernel;
    s.alpha = alpha;
    s.hs = hs;
    s.mu.resize(K);
    double prev = 1.0;
    for (std::size_t k = 0; k < K; ++k) {
        const double nu = std::clamp(std::exp(std::log(rng.uniform()) / alpha),
                                     1e-8, std::nextafter(1.0, 0.0));
        prev *= nu;
        s.mu[k] = prev;
    }
    const Gaussian2 prior{Eigen::Vector2d::Zero(), kernel_matrix(kernel)};
    s.g.resize(K);
    for (std::size_t k = 0; k < K; ++k) {
        const Eigen::Vector2d x = sample_gaussian2(prior, rng);
        s.g[k] = {x(0), x(1)};
    }
    const auto KK = static_cast<Eigen::Index>(K);
    s.h1.resize(rows1, KK);
    s.h2.resize(rows2, KK);
    for (Eigen::Index k = 0; k < KK; ++k) {
        for (Eigen::Index n = 0; n < rows1; ++n)
            s.h1(n, k) = rng.normal(s.g[static_cast<std::size_t>(k)][0], kernel.eta);
        for (Eigen::Index n = 0; n < rows2; ++n)
            s.h2(n, k) = rng.normal(s.g[static_cast<std::size_t>(k)][1], kernel.eta);
    }
    return s;
}

/// Masks implied by the thresholds: z^t_{nk} = [h^t_{nk} < mu~^t_k].
inline std::pair<BinaryMatrix, BinaryMatrix> gp_masks(const GpStickState& s) {
    BinaryMatrix z1(s.h1.rows(), s.h1.cols());
    BinaryMatrix z2(s.h2.rows(), s.h2.cols());
    for (Eigen::Index k = 0; k < s.h1.cols(); ++k) {
        const auto kk = static_cast<std::size_t>(k);
        const double t1 = gp_threshold(s.mu[kk], 0, s.kernel);
        const double t2 = gp_threshold(s.mu[kk], 1, s.kernel);
        for (Eigen::Index n = 0; n < s.h1.rows(); ++n)
            z1(n, k) = s.h1(n, k) < t1;
        for (Eigen::Index n = 0; n < s.h2.rows(); ++n)
            z2(n, k) = s.h2(n, k) < t2;
    }
    return {z1, z2};
}

} // namespace dibpnmf::dibp
