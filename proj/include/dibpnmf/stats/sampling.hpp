// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include "dibpnmf/errors.hpp"
#include "dibpnmf/random.hpp"
#include "dibpnmf/stats/distributions.hpp"
#include "dibpnmf/stats/normal.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>

namespace dibpnmf::stats {

// ---------------------------------------------------------------------------
// Truncated Beta(alpha, 1)

/// Inverse-CDF map for Beta(alpha, 1) restricted to [lo, hi]: the CDF is
/// x^alpha, so u = lo^a + w (hi^a - lo^a) and x = u^(1/a). Works in log space
/// so small alpha and tiny intervals keep their resolution.
inline double truncated_beta_from_uniform(double alpha, double lo, double hi,
                                          double w) {
    if (!(alpha > 0.0))
        throw DomainError("truncated beta: alpha must be positive");
    if (!(lo >= 0.0 && hi <= 1.0 && lo < hi))
        throw DomainError("truncated beta: need 0 <= lo < hi <= 1");
    const double log_hi = alpha * std::log(hi);
    double log_u;
    if (lo == 0.0) {
        log_u = log_hi + std::log(w);
    } else {
        const double log_lo = alpha * std::log(lo);
        log_u = log_lo + std::log1p(std::expm1(log_hi - log_lo) * w);
    }
    const double x = std::exp(log_u / alpha);
    return std::clamp(x, lo, hi);
}

inline double truncated_beta_sample(double alpha, double lo, double hi,
                                    Rng& rng) {
    if (!(lo < hi))
        throw DomainError("truncated beta: need lo < hi");
    return truncated_beta_from_uniform(alpha, lo, hi, rng.uniform());
}

// ---------------------------------------------------------------------------
// Bivariate beta via the gamma-ratio construction

/// Draws (x, y) = (U1 / (U1 + U3), U2 / (U2 + U3)) with U1 ~ Gamma(a),
/// U2 ~ Gamma(b), U3 ~ Gamma(c).
inline std::pair<double, double>
bivariate_beta_sample(const BivariateBetaParams& p, Rng& rng) {
    validate(p);
    const double l1 = rng.log_gamma_unit(p.a);
    const double l2 = rng.log_gamma_unit(p.b);
    const double l3 = rng.log_gamma_unit(p.c);
    return {1.0 / (1.0 + std::exp(l3 - l1)), 1.0 / (1.0 + std::exp(l3 - l2))};
}

// ---------------------------------------------------------------------------
// FGM copula

/// Conditional-inverse step: given u and a uniform w, returns v with
/// w = v + rho v (1 - v)(1 - 2u). Uses the cancellation-free root
/// v = 2w / ((1 + beta) + sqrt((1 + beta)^2 - 4 beta w)), beta = rho (1 - 2u).
inline double fgm_conditional_inverse(double u, double w, double rho) {
    const double beta = rho * (1.0 - 2.0 * u);
    if (std::fabs(beta) < 1e-300)
        return w;
    const double one_b = 1.0 + beta;
    const double disc = std::max(0.0, one_b * one_b - 4.0 * beta * w);
    const double v = 2.0 * w / (one_b + std::sqrt(disc));
    return std::clamp(v, 0x1.0p-1074, std::nextafter(1.0, 0.0));
}

/// One draw (u, v) from the FGM copula on the unit square.
inline std::pair<double, double> fgm_copula_sample(double rho, Rng& rng) {
    const double u = rng.uniform();
    const double w = rng.uniform();
    return {u, fgm_conditional_inverse(u, w, rho)};
}

/// (nu1, nu2) with Beta(alpha1, 1) / Beta(alpha2, 1) margins joined by the
/// FGM copula.
inline std::pair<double, double> fgm_pair_sample(const FgmParams& p, Rng& rng) {
    validate(p);
    const auto [u, v] = fgm_copula_sample(p.rho, rng);
    const double top = std::nextafter(1.0, 0.0);
    return {std::min(std::pow(u, 1.0 / p.alpha1), top),
            std::min(std::pow(v, 1.0 / p.alpha2), top)};
}

// ---------------------------------------------------------------------------
// Truncated normal on a half-line

/// (-inf, bound] or [bound, +inf).
struct HalfLine {
    enum class Side { Below, Above };
    double bound = 0.0;
    Side side = Side::Below;

    static HalfLine below(double b) { return {b, Side::Below}; }
    static HalfLine above(double b) { return {b, Side::Above}; }

    bool contains(double x) const {
        return side == Side::Below ? x <= bound : x >= bound;
    }
};

struct SamplerDiagnostics {
    std::size_t tail_fallbacks = 0; ///< draws that needed the tilted proposal
};

namespace detail {

/// Standard normal restricted to [alpha, inf).
inline double std_normal_above(double alpha, Rng& rng,
                               SamplerDiagnostics* diag) {
    const double mass = std_normal_sf(alpha);
    if (mass >= 1e-300) {
        const double u = mass * rng.uniform();
        // sf(z) = u  <=>  z = -quantile(u); lower-tail quantile keeps precision
        return std::max(alpha, -std_normal_quantile(u));
    }
    if (diag)
        ++diag->tail_fallbacks;
    // exponential proposal with the optimal rate
    const double lambda = 0.5 * (alpha + std::sqrt(alpha * alpha + 4.0));
    for (;;) {
        const double z = alpha + rng.exponential(lambda);
        const double d = z - lambda;
        if (rng.uniform() <= std::exp(-0.5 * d * d))
            return z;
    }
}

} // namespace detail

/// Draw from N(mean, var) restricted to a half-line (inverse-CDF method, with
/// an exponential-tilting fallback when the truncated mass underflows).
inline double truncated_normal_sample(double mean, double var,
                                      const HalfLine& support, Rng& rng,
                                      SamplerDiagnostics* diag = nullptr) {
    if (!(var > 0.0))
        throw DomainError("truncated normal: variance must be positive");
    const double sd = std::sqrt(var);
    const double alpha = (support.bound - mean) / sd;
    double x;
    if (support.side == HalfLine::Side::Above)
        x = mean + sd * detail::std_normal_above(alpha, rng, diag);
    else
        x = mean - sd * detail::std_normal_above(-alpha, rng, diag);
    // rounding in mean + sd z must not leave the support
    return support.side == HalfLine::Side::Above ? std::max(x, support.bound)
                                                 : std::min(x, support.bound);
}

} // namespace dibpnmf::stats
