// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include "dibpnmf/errors.hpp"
#include "dibpnmf/stats/normal.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace dibpnmf {

/// SplitMix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for the index-th child stream (CV fold, compare trial, ...).
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::uint64_t index) noexcept {
    return mix_seed(mix_seed(master) ^ mix_seed(index + 1));
}

/**
 * Seedable random stream shared by every sampler in the library.
 *
 * All variates are built from the raw 64-bit engine output with fixed
 * algorithms (no std::*_distribution), so a given seed yields identical
 * draws on every platform. The stream holds no cached variates, which makes
 * state() / restore() an exact save point.
 */
class Rng {
  public:
    using engine_type = std::mt19937_64;

    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        if (n == 0)
            throw ContractViolation("Rng::below: empty range");
        // rejection on the top multiple of n keeps the draw unbiased
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    bool bernoulli(double p) { return uniform() < p; }

    double normal() { return stats::std_normal_quantile(uniform()); }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// Exponential with the given rate.
    double exponential(double rate) { return -std::log(uniform()) / rate; }

    /// log of a Gamma(shape, 1) variate; stays finite for tiny shapes.
    double log_gamma_unit(double shape) {
        if (!(shape > 0.0))
            throw DomainError("gamma variate: shape must be positive");
        if (shape < 1.0) {
            // Gamma(a) = Gamma(a + 1) * U^(1/a)
            const double boosted = log_gamma_unit(shape + 1.0);
            return boosted + std::log(uniform()) / shape;
        }
        // Marsaglia & Tsang squeeze
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x;
            double v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            const double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2 ||
                std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))
                return std::log(d) + std::log(v);
        }
    }

    /// Gamma with shape and rate (mean shape / rate).
    double gamma(double shape, double rate) {
        if (!(rate > 0.0))
            throw DomainError("gamma variate: rate must be positive");
        return std::exp(log_gamma_unit(shape)) / rate;
    }

    double beta(double a, double b) {
        const double la = log_gamma_unit(a);
        const double lb = log_gamma_unit(b);
        // a / (a + b) evaluated as a logistic of the log difference
        return 1.0 / (1.0 + std::exp(lb - la));
    }

    /// Textual engine state; restore() on it resumes the exact stream.
    std::string state() const {
        std::ostringstream os;
        os << engine_;
        return os.str();
    }

    void restore(const std::string& text) {
        std::istringstream is(text);
        engine_type e;
        is >> e;
        if (is.fail())
            throw ParseError("corrupt random stream state");
        engine_ = e;
    }

    friend bool operator==(const Rng& a, const Rng& b) {
        return a.engine_ == b.engine_;
    }

  private:
    engine_type engine_;
};

} // namespace dibpnmf
