// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include "dibpnmf/dibp/paired.hpp"
#include "dibpnmf/errors.hpp"
#include "dibpnmf/factorization/model.hpp"
#include "dibpnmf/matrix.hpp"
#include "dibpnmf/random.hpp"
#include "dibpnmf/stats/distributions.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace dibpnmf::factorization {

/// Gamma(shape, rate) prior on a positive coupling parameter.
struct GammaPrior {
    double shape = 1.0;
    double rate = 1.0;

    friend bool operator==(const GammaPrior&, const GammaPrior&) = default;
};

enum class Side { First = 1, Second = 2 };

/// Counts of proposals and acceptances for one update family.
struct MoveStats {
    std::size_t proposed = 0;
    std::size_t accepted = 0;

    double rate() const {
        return proposed == 0 ? 0.0
                             : static_cast<double>(accepted) /
                                   static_cast<double>(proposed);
    }

    void add(bool ok) {
        ++proposed;
        accepted += ok;
    }
};

namespace detail {

/// Exponential log-density with mean r + eps.
inline double exp_term(double y, double r, double eps) {
    const double mean = r + eps;
    return -std::log(mean) - y / mean;
}

/**
 * The update loops are written for side 1 (rows of Y). Side 2 runs the same
 * code on the transposed problem, so this bundles the own loadings, the
 * opposing masked loadings, and Y, weights and reconstruction in the
 * matching orientation.
 */
struct SideProblem {
    Matrix* V;
    BinaryMatrix* Z;
    Matrix opp; ///< opposing A or X, (cols of Y in this orientation) x K
    Matrix y;
    BinaryMatrix obs;
    Matrix recon;
};

inline SideProblem side_problem(Side side, FactorState& s, const DataMatrix& y) {
    check_shapes(s);
    DIBPNMF_REQUIRE(s.V1.rows() == y.rows() && s.V2.rows() == y.cols(),
                    "update: factor state does not match data shape");
    const BinaryMatrix obs = y.mask ? *y.mask
                                    : BinaryMatrix::Ones(y.rows(), y.cols());
    const Matrix recon = reconstruct(s);
    if (side == Side::First)
        return {&s.V1, &s.Z1, s.X(), y.values, obs, recon};
    return {&s.V2, &s.Z2, s.A(), y.values.transpose(), obs.transpose(),
            recon.transpose()};
}

/// Change in log-likelihood of row i when its reconstruction moves by
/// delta * opp(:, k). Entries with opp(j, k) = 0 do not change and are
/// skipped.
inline double row_loglik_change(const SideProblem& p, Eigen::Index i,
                                Eigen::Index k, double base_shift,
                                double delta, double eps) {
    double d = 0.0;
    for (Eigen::Index j = 0; j < p.opp.rows(); ++j) {
        const double x = p.opp(j, k);
        if (x == 0.0 || p.obs(i, j) == 0)
            continue;
        const double r0 = p.recon(i, j) + base_shift * x;
        const double y = p.y(i, j);
        d += exp_term(y, r0 + delta * x, eps) - exp_term(y, r0, eps);
    }
    return d;
}

inline void shift_row(SideProblem& p, Eigen::Index i, Eigen::Index k,
                      double delta) {
    for (Eigen::Index j = 0; j < p.opp.rows(); ++j)
        p.recon(i, j) += delta * p.opp(j, k);
}

} // namespace detail

/**
 * P(z = 1) from the inclusion probability pi and the log-likelihood
 * difference loglik(z = 1) - loglik(z = 0), normalized in log space.
 */
inline double z_conditional_probability(double pi, double loglik_diff) {
    if (!(pi >= 0.0 && pi <= 1.0))
        throw DomainError("update_Z: inclusion probability outside [0, 1]");
    if (pi == 0.0)
        return 0.0;
    if (pi == 1.0)
        return 1.0;
    const double t = std::log(pi) - std::log1p(-pi) + loglik_diff;
    // logistic(t) in the form that does not overflow for either sign
    return t >= 0.0 ? 1.0 / (1.0 + std::exp(-t))
                    : std::exp(t) / (1.0 + std::exp(t));
}

/**
 * Gibbs scan over every entry of Z1 (side 1) or Z2 (side 2), rows outer and
 * columns inner. incl[k] is the inclusion probability of column k for this
 * side (mu for the paired couplings, gamma for the GP coupling).
 */
inline void update_Z(Side side, FactorState& s, const DataMatrix& y,
                     std::span<const double> incl, double eps, Rng& rng) {
    detail::SideProblem p = detail::side_problem(side, s, y);
    DIBPNMF_REQUIRE(incl.size() == static_cast<std::size_t>(s.K()),
                    "update_Z: need one inclusion probability per column");
    for (Eigen::Index i = 0; i < p.Z->rows(); ++i) {
        for (Eigen::Index k = 0; k < p.Z->cols(); ++k) {
            const double v = (*p.V)(i, k);
            const bool on = (*p.Z)(i, k) != 0;
            const double base = on ? -v : 0.0;
            const double diff = detail::row_loglik_change(p, i, k, base, v, eps);
            const double p1 =
                z_conditional_probability(incl[static_cast<std::size_t>(k)], diff);
            const bool z = rng.uniform() < p1;
            if (z != on) {
                (*p.Z)(i, k) = z;
                detail::shift_row(p, i, k, z ? v : -v);
            }
        }
    }
}

/**
 * Log acceptance of the independence proposal v -> v_new for entry (i, k)
 * of side V: the masked likelihood ratio over the opposing dimension (the
 * gamma prior cancels against the proposal).
 */
inline double v_log_acceptance(Side side, FactorState& s, const DataMatrix& y,
                               Eigen::Index i, Eigen::Index k, double v_new,
                               double eps) {
    const detail::SideProblem p = detail::side_problem(side, s, y);
    const double v = (*p.V)(i, k);
    if (v_new == v)
        return 0.0;
    if ((*p.Z)(i, k) == 0)
        return 0.0;
    return detail::row_loglik_change(p, i, k, 0.0, v_new - v, eps);
}

/**
 * Scan over V1 (side 1) or V2 (side 2). Entries with z = 0 are redrawn from
 * the gamma(1, tau) prior; the others take an independence Metropolis-
 * Hastings step proposing from that prior.
 */
inline MoveStats update_V(Side side, FactorState& s, const DataMatrix& y,
                          double tau, double eps, Rng& rng) {
    if (!(tau > 0.0))
        throw DomainError("update_V: tau must be positive");
    detail::SideProblem p = detail::side_problem(side, s, y);
    MoveStats st;
    for (Eigen::Index i = 0; i < p.V->rows(); ++i) {
        for (Eigen::Index k = 0; k < p.V->cols(); ++k) {
            const double v_new = rng.exponential(tau);
            if ((*p.Z)(i, k) == 0) {
                (*p.V)(i, k) = v_new;
                continue;
            }
            const double v = (*p.V)(i, k);
            const double log_r =
                detail::row_loglik_change(p, i, k, 0.0, v_new - v, eps);
            const bool ok = log_r >= 0.0 || std::log(rng.uniform()) < log_r;
            st.add(ok);
            if (ok) {
                (*p.V)(i, k) = v_new;
                detail::shift_row(p, i, k, v_new - v);
            }
        }
    }
    return st;
}

// ---------------------------------------------------------------------------
// Coupling parameters

/// Ratio pairs (nu1_k, nu2_k) of the current chains.
inline std::vector<std::pair<double, double>>
ratio_pairs(const dibp::PairedStickState& s) {
    const auto n1 = dibp::ratios(s.mu1);
    const auto n2 = dibp::ratios(s.mu2);
    std::vector<std::pair<double, double>> out(n1.size());
    for (std::size_t k = 0; k < n1.size(); ++k)
        out[k] = {n1[k], n2[k]};
    return out;
}

/**
 * Log posterior of (a, b) in log coordinates: gamma priors, the bivariate
 * beta density (c = 1) of every ratio pair, and log a + log b from the
 * change of variables.
 */
inline double theta_bb_log_target(double a, double b,
                                  std::span<const std::pair<double, double>> nus,
                                  const GammaPrior& hp) {
    if (!(a > 0.0 && b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
        return stats::neg_inf;
    double lp = stats::gamma_logpdf(a, hp.shape, hp.rate) +
                stats::gamma_logpdf(b, hp.shape, hp.rate) + std::log(a) +
                std::log(b);
    const dibp::Coupling c = stats::BivariateBetaParams{a, b, 1.0};
    for (const auto& [x, y] : nus)
        lp += dibp::pair_logpdf(x, y, c);
    return lp;
}

/// Joint log-normal random walk on (a, b). Returns true on acceptance.
inline bool update_theta_bb(dibp::PairedStickState& s, const GammaPrior& hp,
                            double step, Rng& rng) {
    auto& p = std::get<stats::BivariateBetaParams>(s.coupling);
    const double a_new = p.a * std::exp(step * rng.normal());
    const double b_new = p.b * std::exp(step * rng.normal());
    const auto nus = ratio_pairs(s);
    const double t_new = theta_bb_log_target(a_new, b_new, nus, hp);
    const double log_r =
        t_new == stats::neg_inf ? t_new
                                : t_new - theta_bb_log_target(p.a, p.b, nus, hp);
    if (!(log_r >= 0.0 || std::log(rng.uniform()) < log_r))
        return false;
    p.a = a_new;
    p.b = b_new;
    return true;
}

/// Log posterior of (alpha1, alpha2) in log coordinates: gamma priors times
/// the FGM joint density (copula and Beta(alpha, 1) margins) of the ratio
/// pairs, plus the change-of-variables term.
inline double theta_alpha_log_target(double a1, double a2, double rho,
                                     std::span<const std::pair<double, double>> nus,
                                     const GammaPrior& hp) {
    if (!(a1 > 0.0 && a2 > 0.0) || !std::isfinite(a1) || !std::isfinite(a2))
        return stats::neg_inf;
    double lp = stats::gamma_logpdf(a1, hp.shape, hp.rate) +
                stats::gamma_logpdf(a2, hp.shape, hp.rate) + std::log(a1) +
                std::log(a2);
    const dibp::Coupling c = stats::FgmParams{rho, a1, a2};
    for (const auto& [x, y] : nus)
        lp += dibp::pair_logpdf(x, y, c);
    return lp;
}

/// sum_k log c(u_k, v_k | rho); the flat prior on [-1, 1] adds nothing.
inline double theta_rho_log_target(double rho, double a1, double a2,
                                   std::span<const std::pair<double, double>> nus) {
    if (!(rho >= -1.0 && rho <= 1.0))
        return stats::neg_inf;
    double lp = 0.0;
    for (const auto& [x, y] : nus) {
        const double c = stats::fgm_copula_density(std::pow(x, a1),
                                                   std::pow(y, a2), rho);
        if (!(c > 0.0))
            return stats::neg_inf;
        lp += std::log(c);
    }
    return lp;
}

struct CopulaMoves {
    bool alpha = false;
    bool rho = false;
};

/// Random walk on (log alpha1, log alpha2), then an independence step for
/// rho with a Uniform(-1, 1) proposal.
inline CopulaMoves update_theta_copula(dibp::PairedStickState& s,
                                       const GammaPrior& hp, double step,
                                       Rng& rng) {
    auto& p = std::get<stats::FgmParams>(s.coupling);
    const auto nus = ratio_pairs(s);
    CopulaMoves out;

    const double a1_new = p.alpha1 * std::exp(step * rng.normal());
    const double a2_new = p.alpha2 * std::exp(step * rng.normal());
    const double t_new = theta_alpha_log_target(a1_new, a2_new, p.rho, nus, hp);
    const double log_r =
        t_new == stats::neg_inf
            ? t_new
            : t_new - theta_alpha_log_target(p.alpha1, p.alpha2, p.rho, nus, hp);
    if (log_r >= 0.0 || std::log(rng.uniform()) < log_r) {
        p.alpha1 = a1_new;
        p.alpha2 = a2_new;
        out.alpha = true;
    }

    const double rho_new = rng.uniform(-1.0, 1.0);
    const double r_new = theta_rho_log_target(rho_new, p.alpha1, p.alpha2, nus);
    const double log_r2 =
        r_new == stats::neg_inf
            ? r_new
            : r_new - theta_rho_log_target(p.rho, p.alpha1, p.alpha2, nus);
    if (log_r2 >= 0.0 || std::log(rng.uniform()) < log_r2) {
        p.rho = rho_new;
        out.rho = true;
    }
    return out;
}

} // namespace dibpnmf::factorization
