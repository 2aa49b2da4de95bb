// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include "dibpnmf/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <numbers>
#include <type_traits>
#include <vector>

namespace dibpnmf::stats {

/// An integral estimate with an absolute error bound.
template <typename R> struct Estimate {
    R value{};
    double error = 0.0;
};

template <typename R> struct QuadratureResult {
    R value{};
    double error = 0.0; ///< absolute, in the norm used for convergence
    int levels = 0;
    bool converged = false;
};

namespace detail {

inline double qnorm(double v) { return std::fabs(v); }

template <std::size_t N> double qnorm(const std::array<double, N>& v) {
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::fabs(x));
    return m;
}

inline void qaxpy(double& acc, double w, double v) { acc += w * v; }

template <std::size_t N>
void qaxpy(std::array<double, N>& acc, double w, const std::array<double, N>& v) {
    for (std::size_t i = 0; i < N; ++i)
        acc[i] += w * v[i];
}

inline double qscale(double v, double s) { return v * s; }

template <std::size_t N>
std::array<double, N> qscale(std::array<double, N> v, double s) {
    for (double& x : v)
        x *= s;
    return v;
}

inline double qdiff(double a, double b) { return std::fabs(a - b); }

template <std::size_t N>
double qdiff(const std::array<double, N>& a, const std::array<double, N>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < N; ++i)
        m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

template <typename T> struct is_estimate : std::false_type {
    using value_type = T;
};
template <typename R> struct is_estimate<Estimate<R>> : std::true_type {
    using value_type = R;
};

} // namespace detail

/**
 * Tanh-sinh (double exponential) quadrature on a finite interval.
 *
 * The integrand is called as f(x, x - a, b - x); the two distances are
 * computed from the node complements, so integrands with endpoint
 * singularities or factors like log(1 - x) keep full precision near the
 * ends. f may return double, std::array<double, N>, or Estimate<...> when it
 * is itself an approximation (nested integrals); in the last case the inner
 * errors are propagated into the reported error.
 *
 * Levels halve the step; level l has step 2^-l. Nodes stop where the
 * endpoint distance drops below 1e-300, which truncates x^p endpoint
 * singularities with p > -0.99 at a relative error well below 1e-12.
 */
class TanhSinh {
  public:
    explicit TanhSinh(int max_levels = 10) : max_levels_(max_levels) {
        build();
    }

    int max_levels() const noexcept { return max_levels_; }

    template <typename F>
    auto integrate(F&& f, double a, double b, double rel_tol = 1e-10,
                   int min_levels = 3) const {
        using Ret = std::invoke_result_t<F&, double, double, double>;
        constexpr bool nested = detail::is_estimate<Ret>::value;
        using R = typename detail::is_estimate<Ret>::value_type;

        if (!(a < b))
            throw ContractViolation("TanhSinh: need a < b");
        const double c = 0.5 * (a + b);
        const double hw = 0.5 * (b - a);

        R sum{};
        double inner_err = 0.0;
        auto eval = [&](double x, double da, double db, double w) {
            if constexpr (nested) {
                Ret e = f(x, da, db);
                detail::qaxpy(sum, w, e.value);
                inner_err += w * e.error;
            } else {
                detail::qaxpy(sum, w, f(x, da, db));
            }
        };

        QuadratureResult<R> out;
        R prev{};
        for (int level = 0; level <= max_levels_; ++level) {
            for (const Node& n : levels_[level]) {
                if (n.t == 0.0) {
                    eval(c, hw, hw, n.weight);
                    continue;
                }
                const double near = hw * n.comp;
                if (near <= 0.0)
                    continue;
                const double far = hw * (2.0 - n.comp);
                eval(b - near, far, near, n.weight);
                eval(a + near, near, far, n.weight);
            }
            const double h = std::ldexp(1.0, -level);
            R cur = detail::qscale(sum, h * hw);
            const double total_inner = inner_err * h * hw;
            out.value = cur;
            out.levels = level;
            if (level > 0) {
                const double diff = detail::qdiff(cur, prev);
                out.error = diff + total_inner;
                const double scale = detail::qnorm(cur);
                if (level >= min_levels &&
                    out.error <= rel_tol * scale + 1e-300) {
                    out.converged = true;
                    return out;
                }
            }
            prev = cur;
        }
        return out;
    }

  private:
    struct Node {
        double t;
        double comp;   ///< 1 - tanh(pi/2 sinh t)
        double weight; ///< pi/2 cosh t / cosh^2(pi/2 sinh t)
    };

    void build() {
        levels_.resize(static_cast<std::size_t>(max_levels_) + 1);
        constexpr double half_pi = std::numbers::pi / 2.0;
        for (int level = 0; level <= max_levels_; ++level) {
            const double h = std::ldexp(1.0, -level);
            // level 0 holds the integer nodes, later levels the odd multiples
            const int stride = level == 0 ? 1 : 2;
            const int start = level == 0 ? 0 : 1;
            for (int k = start;; k += stride) {
                const double t = k * h;
                const double z = half_pi * std::sinh(t);
                const double comp = 2.0 / (1.0 + std::exp(2.0 * z));
                if (comp < 1e-300)
                    break;
                const double ch = std::cosh(z);
                levels_[level].push_back(
                    {t, comp, half_pi * std::cosh(t) / (ch * ch)});
            }
        }
    }

    int max_levels_;
    std::vector<std::vector<Node>> levels_;
};

/// Nested tanh-sinh over the open unit square. f is called as
/// f(x, 1 - x, y, 1 - y) with both complements exact.
template <typename F>
auto integrate_unit_square(F&& f, double rel_tol = 1e-9, int max_levels = 10) {
    const TanhSinh rule(max_levels);
    auto outer = [&](double x, double, double xc) {
        auto inner = rule.integrate(
            [&](double y, double, double yc) { return f(x, xc, y, yc); }, 0.0,
            1.0, rel_tol * 1e-2);
        using R = decltype(inner.value);
        return Estimate<R>{inner.value, inner.error};
    };
    return rule.integrate(outer, 0.0, 1.0, rel_tol);
}

} // namespace dibpnmf::stats
