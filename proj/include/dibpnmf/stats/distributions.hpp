// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include "dibpnmf/errors.hpp"

#include <cmath>
#include <limits>

namespace dibpnmf::stats {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

/// Exponential log-density parameterized by its mean.
inline double exp_logpdf_mean(double y, double mean) {
    if (!(mean > 0.0))
        throw DomainError("exp_logpdf_mean: mean must be positive");
    if (y < 0.0)
        return neg_inf;
    return -std::log(mean) - y / mean;
}

/// Gamma(shape, rate) log-density.
inline double gamma_logpdf(double x, double shape, double rate) {
    if (!(shape > 0.0 && rate > 0.0))
        throw DomainError("gamma_logpdf: shape and rate must be positive");
    if (x < 0.0)
        return neg_inf;
    if (x == 0.0) {
        if (shape == 1.0)
            return std::log(rate);
        return shape < 1.0 ? std::numeric_limits<double>::infinity() : neg_inf;
    }
    return shape * std::log(rate) - std::lgamma(shape) +
           (shape - 1.0) * std::log(x) - rate * x;
}

/// Beta(alpha, 1) log-density on (0, 1]: log(alpha) + (alpha - 1) log x.
inline double beta1_logpdf(double x, double alpha) {
    if (!(alpha > 0.0))
        throw DomainError("beta1_logpdf: alpha must be positive");
    if (!(x > 0.0 && x <= 1.0))
        return neg_inf;
    return std::log(alpha) + (alpha - 1.0) * std::log(x);
}

/// Beta(a, b) log-density.
inline double beta_logpdf(double x, double a, double b) {
    if (!(a > 0.0 && b > 0.0))
        throw DomainError("beta_logpdf: shapes must be positive");
    if (!(x > 0.0 && x < 1.0))
        return neg_inf;
    return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
           (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x);
}

// ---------------------------------------------------------------------------
// Bivariate beta (Olkin-Liu form)

/// Parameters of the bivariate beta density; c is held at 1 by the model.
struct BivariateBetaParams {
    double a = 1.0;
    double b = 1.0;
    double c = 1.0;

    friend bool operator==(const BivariateBetaParams&,
                           const BivariateBetaParams&) = default;
};

inline void validate(const BivariateBetaParams& p) {
    if (!(p.a > 0.0 && p.b > 0.0 && p.c > 0.0) || !std::isfinite(p.a) ||
        !std::isfinite(p.b) || !std::isfinite(p.c))
        throw DomainError("bivariate beta: a, b, c must be positive and finite");
}

/// log B(a, b, c) = log Gamma(a) + log Gamma(b) + log Gamma(c) - log Gamma(a+b+c)
inline double log_beta3(double a, double b, double c) {
    return std::lgamma(a) + std::lgamma(b) + std::lgamma(c) -
           std::lgamma(a + b + c);
}

namespace detail {

/// exponent * log(base) with the limits 0^0 = 1, 0^+ = 0, 0^- = inf.
inline double log_pow(double base, double exponent) {
    if (base > 0.0)
        return exponent * std::log(base);
    if (exponent == 0.0)
        return 0.0;
    return exponent > 0.0 ? neg_inf : std::numeric_limits<double>::infinity();
}

/// Bivariate beta log-density from x, y and their complements 1-x, 1-y.
/// Complements are passed separately so quadrature nodes near 1 keep full
/// relative precision.
inline double bivariate_beta_logpdf_c(double x, double xc, double y, double yc,
                                      const BivariateBetaParams& p,
                                      double log_norm) {
    const double one_minus_xy = xc + x * yc;
    const double terms[] = {
        log_pow(x, p.a - 1.0),          log_pow(y, p.b - 1.0),
        log_pow(xc, p.b + p.c - 1.0),   log_pow(yc, p.a + p.c - 1.0),
        log_pow(one_minus_xy, -(p.a + p.b + p.c)),
    };
    bool has_pos_inf = false;
    bool has_neg_inf = false;
    double sum = -log_norm;
    for (double t : terms) {
        if (t == std::numeric_limits<double>::infinity())
            has_pos_inf = true;
        else if (t == neg_inf)
            has_neg_inf = true;
        else
            sum += t;
    }
    if (has_pos_inf)
        throw DomainError("bivariate beta: density is singular at this "
                          "boundary point");
    return has_neg_inf ? neg_inf : sum;
}

} // namespace detail

/**
 * Log-density of the Olkin-Liu bivariate beta distribution,
 *
 *   p(x, y) = x^(a-1) y^(b-1) (1-x)^(b+c-1) (1-y)^(a+c-1)
 *             / (B(a,b,c) (1 - xy)^(a+b+c)),
 *
 * with B(a,b,c) = Gamma(a) Gamma(b) Gamma(c) / Gamma(a+b+c). The marginals
 * are Beta(a, c) and Beta(b, c).
 *
 * Points on the boundary of the unit square return -inf where the density
 * vanishes and throw DomainError where it is singular; points outside the
 * closed square throw.
 */
inline double bivariate_beta_logpdf(double x, double y,
                                    const BivariateBetaParams& p) {
    validate(p);
    if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0))
        throw DomainError("bivariate beta: (x, y) must lie in the unit square");
    if (x == 1.0 && y == 1.0)
        throw DomainError("bivariate beta: density is singular at (1, 1)");
    return detail::bivariate_beta_logpdf_c(x, 1.0 - x, y, 1.0 - y, p,
                                           log_beta3(p.a, p.b, p.c));
}

// ---------------------------------------------------------------------------
// FGM copula with Beta(alpha, 1) margins

struct FgmParams {
    double rho = 0.0;
    double alpha1 = 1.0;
    double alpha2 = 1.0;

    friend bool operator==(const FgmParams&, const FgmParams&) = default;
};

inline void validate(const FgmParams& p) {
    if (!(p.rho >= -1.0 && p.rho <= 1.0))
        throw DomainError("FGM copula: rho must lie in [-1, 1]");
    if (!(p.alpha1 > 0.0 && p.alpha2 > 0.0) || !std::isfinite(p.alpha1) ||
        !std::isfinite(p.alpha2))
        throw DomainError("FGM copula: alpha1, alpha2 must be positive");
}

/// FGM copula density c(u, v) = 1 + rho (2u - 1)(2v - 1).
inline double fgm_copula_density(double u, double v, double rho) {
    return 1.0 + rho * (2.0 * u - 1.0) * (2.0 * v - 1.0);
}

/// Joint log-density of (nu1, nu2) under the FGM copula with Beta(alpha1, 1)
/// and Beta(alpha2, 1) margins.
inline double fgm_pair_logpdf(double nu1, double nu2, const FgmParams& p) {
    validate(p);
    if (!(nu1 > 0.0 && nu1 < 1.0 && nu2 > 0.0 && nu2 < 1.0))
        throw DomainError("FGM pair density: arguments must lie in (0, 1)");
    const double u = std::pow(nu1, p.alpha1);
    const double v = std::pow(nu2, p.alpha2);
    const double cop = fgm_copula_density(u, v, p.rho);
    if (!(cop > 0.0))
        return neg_inf;
    return std::log(cop) + beta1_logpdf(nu1, p.alpha1) +
           beta1_logpdf(nu2, p.alpha2);
}

// ---------------------------------------------------------------------------
// Squared-exponential kernel evaluated at two covariate locations

struct GaussKernelParams {
    double sigma = 1.0; ///< kernel amplitude
    double s = 1.0;     ///< length scale
    double eta = 1.0;   ///< observation noise scale
    double t1 = 1.0;
    double t2 = 2.0;

    friend bool operator==(const GaussKernelParams&,
                           const GaussKernelParams&) = default;
};

inline void validate(const GaussKernelParams& k) {
    if (!(k.sigma > 0.0 && k.s > 0.0 && k.eta > 0.0))
        throw DomainError("kernel: sigma, s and eta must be positive");
    if (k.t1 == k.t2)
        throw DomainError("kernel: covariate locations must differ");
}

/// Sigma(t, t') = sigma^2 exp(-(t - t')^2 / s^2)
inline double kernel_cov(const GaussKernelParams& k, double t, double tp) {
    const double d = (t - tp) / k.s;
    return k.sigma * k.sigma * std::exp(-d * d);
}

} // namespace dibpnmf::stats
