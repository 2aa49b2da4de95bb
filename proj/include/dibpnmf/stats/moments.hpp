// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include "dibpnmf/errors.hpp"
#include "dibpnmf/stats/distributions.hpp"
#include "dibpnmf/stats/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

namespace dibpnmf::stats {

struct BivariateBetaMoments {
    double mean_x = 0.0;
    double mean_y = 0.0;
    double var_x = 0.0;
    double var_y = 0.0;
    double covariance = 0.0;
    double correlation = 0.0; ///< Pearson
    double total_mass = 0.0;  ///< quadrature value of the normalization
    double error = 0.0;       ///< quadrature error bound on the raw integrals
    int levels = 0;
};

/**
 * Moments of the bivariate beta distribution by nested tanh-sinh quadrature.
 *
 * Integrates in s = x^a, r = y^b so the endpoint factors x^(a-1), y^(b-1)
 * become constants (x^(a-1) dx = ds / a); small a, b would otherwise overflow
 * at the corner nodes. Throws NumericalError if the quadrature does not
 * reach rel_tol.
 */
inline BivariateBetaMoments bivariate_beta_moments(const BivariateBetaParams& p,
                                                   double rel_tol = 1e-8) {
    validate(p);
    const double log_norm = log_beta3(p.a, p.b, p.c) + std::log(p.a * p.b);
    // x = s^(1/a) with 1 - x from the exact complement of s
    auto power_map = [](double s, double sc, double shape) {
        const double log_s = std::log1p(-sc);
        const double lx = (s < 0.5 ? std::log(s) : log_s) / shape;
        return std::pair<double, double>{std::exp(lx), -std::expm1(lx)};
    };
    auto integrand = [&](double s, double sc, double r, double rc) {
        const auto [x, xc] = power_map(s, sc, p.a);
        const auto [y, yc] = power_map(r, rc, p.b);
        const double one_minus_xy = xc + x * yc;
        const double log_d = detail::log_pow(xc, p.b + p.c - 1.0) +
                             detail::log_pow(yc, p.a + p.c - 1.0) -
                             (p.a + p.b + p.c) * std::log(one_minus_xy) -
                             log_norm;
        const double d = std::exp(log_d);
        return std::array<double, 6>{d,         d * x,     d * y,
                                     d * x * x, d * y * y, d * x * y};
    };
    const auto q = integrate_unit_square(integrand, rel_tol, 11);
    if (!q.converged) {
        std::ostringstream os;
        os << "bivariate_beta_moments: quadrature did not converge for (a, b, "
              "c) = ("
           << p.a << ", " << p.b << ", " << p.c << "); error estimate "
           << q.error << " after " << q.levels << " levels";
        throw NumericalError(os.str());
    }
    const auto& m = q.value;
    BivariateBetaMoments r;
    r.total_mass = m[0];
    r.error = q.error;
    r.levels = q.levels;
    r.mean_x = m[1] / m[0];
    r.mean_y = m[2] / m[0];
    r.var_x = m[3] / m[0] - r.mean_x * r.mean_x;
    r.var_y = m[4] / m[0] - r.mean_y * r.mean_y;
    r.covariance = m[5] / m[0] - r.mean_x * r.mean_y;
    r.correlation = r.covariance / std::sqrt(r.var_x * r.var_y);
    return r;
}

/// Average ranks (1-based), ties share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i + 1;
        while (j < idx.size() && v[idx[j]] == v[idx[i]])
            ++j;
        const double r = 0.5 * static_cast<double>(i + j + 1);
        for (std::size_t k = i; k < j; ++k)
            ranks[idx[k]] = r;
        i = j;
    }
    return ranks;
}

/// Spearman rank correlation with average ranks for ties. Returns nullopt
/// when either margin is constant (correlation undefined).
inline std::optional<double>
spearman_rho(std::span<const std::pair<double, double>> pairs) {
    DIBPNMF_REQUIRE(pairs.size() >= 3, "spearman_rho: need at least 3 pairs");
    std::vector<double> xs(pairs.size());
    std::vector<double> ys(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        xs[i] = pairs[i].first;
        ys[i] = pairs[i].second;
    }
    const auto rx = average_ranks(xs);
    const auto ry = average_ranks(ys);
    const double n = static_cast<double>(pairs.size());
    const double mean = 0.5 * (n + 1.0);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double dx = rx[i] - mean;
        const double dy = ry[i] - mean;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

} // namespace dibpnmf::stats
