// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include "dibpnmf/errors.hpp"

#include <cmath>
#include <numbers>

namespace dibpnmf::stats {

/// Standard normal CDF. Accurate in the lower tail down to ~1e-308.
inline double std_normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// Upper tail 1 - Phi(z), without cancellation for large z.
inline double std_normal_sf(double z) {
    return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

inline double std_normal_logpdf(double z) {
    // log(1/sqrt(2 pi))
    constexpr double log_norm = -0.91893853320467274178;
    return log_norm - 0.5 * z * z;
}

/**
 * Standard normal quantile, Wichura's AS 241 (PPND16).
 *
 * Relative accuracy is about 1e-16 over (0, 1). p == 0 and p == 1 map to
 * -inf and +inf; callers that cannot accept infinities go through
 * normal_inv_cdf(), which rejects them.
 */
inline double std_normal_quantile(double p) {
    if (std::isnan(p) || p < 0.0 || p > 1.0)
        throw DomainError("normal quantile: p must lie in [0, 1]");
    if (p == 0.0)
        return -HUGE_VAL;
    if (p == 1.0)
        return HUGE_VAL;

    const double q = p - 0.5;
    double r;
    double val;
    if (std::fabs(q) <= 0.425) {
        r = 0.180625 - q * q;
        val = q *
              (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r +
                    67265.770927008700853) *
                       r +
                   45921.953931549871457) *
                      r +
                  13731.693765509461125) *
                     r +
                 1971.5909503065514427) *
                    r +
                133.14166789178437745) *
                   r +
               3.387132872796366608) /
              (((((((r * 5226.495278852545925 + 28729.085735721942674) * r +
                    39307.89580009271061) *
                       r +
                   21213.794301586595867) *
                      r +
                  5394.1960214247511077) *
                     r +
                 687.1870074920579083) *
                    r +
                42.313330701600911252) *
                   r +
               1.0);
        return val;
    }

    r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((r * 7.7454501427834140764e-4 +
                     .0227238449892691845833) *
                        r +
                    .24178072517745061177) *
                       r +
                   1.27045825245236838258) *
                      r +
                  3.64784832476320460504) *
                     r +
                 5.7694972214606914055) *
                    r +
                4.6303378461565452959) *
                   r +
               1.42343711074968357734) /
              (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) *
                        r +
                    .0151986665636164571966) *
                       r +
                   .14810397642748007459) *
                      r +
                  .68976733498510000455) *
                     r +
                 1.6763848301838038494) *
                    r +
                2.05319162663775882187) *
                   r +
               1.0);
    } else {
        r -= 5.0;
        val = (((((((r * 2.01033439929228813265e-7 +
                     2.71155556874348757815e-5) *
                        r +
                    .0012426609473880784386) *
                       r +
                   .026532189526576123093) *
                      r +
                  .29656057182850489123) *
                     r +
                 1.7848265399172913358) *
                    r +
                5.4637849111641143699) *
                   r +
               6.6579046435011037772) /
              (((((((r * 2.04426310338993978564e-15 +
                     1.4215117583164458887e-7) *
                        r +
                    1.8463183175100546818e-5) *
                       r +
                   7.868691311456132591e-4) *
                      r +
                  .0148753612908506148525) *
                     r +
                 .13692988092273580531) *
                    r +
                .59983220655588793769) *
                   r +
               1.0);
    }
    return q < 0.0 ? -val : val;
}

/// CDF of N(mean, var).
inline double normal_cdf(double x, double mean, double var) {
    if (!(var > 0.0))
        throw DomainError("normal_cdf: variance must be positive");
    return std_normal_cdf((x - mean) / std::sqrt(var));
}

/// Quantile of N(mean, var); p must lie strictly inside (0, 1).
inline double normal_inv_cdf(double p, double mean, double var) {
    if (!(var > 0.0))
        throw DomainError("normal_inv_cdf: variance must be positive");
    if (!(p > 0.0 && p < 1.0))
        throw DomainError("normal_inv_cdf: p must lie in the open interval "
                          "(0, 1)");
    return mean + std::sqrt(var) * std_normal_quantile(p);
}

inline double normal_logpdf(double x, double mean, double var) {
    if (!(var > 0.0))
        throw DomainError("normal_logpdf: variance must be positive");
    const double sd = std::sqrt(var);
    return std_normal_logpdf((x - mean) / sd) - std::log(sd);
}

} // namespace dibpnmf::stats
