// Apache License, Version 2.0, refer to LICENSE.txt

#include "dibpnmf/random.hpp"
#include "dibpnmf/stats/distributions.hpp"
#include "dibpnmf/stats/moments.hpp"
#include "dibpnmf/stats/normal.hpp"
#include "dibpnmf/stats/quadrature.hpp"
#include "dibpnmf/stats/sampling.hpp"
#include "ks.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace dibpnmf;
using namespace dibpnmf::stats;

namespace {

// Independent route: u = -log x, v = -log y on [0, inf)^2.
double bb_mass_exp_sinh(double a, double b, double c) {
    boost::math::quadrature::exp_sinh<double> rule;
    const double lb = log_beta3(a, b, c);
    auto inner = [&](double u) {
        auto f = [&](double v) {
            const double xc = -std::expm1(-u);
            const double yc = -std::expm1(-v);
            // x^(a-1) dx = x^a du
            const double lg = a * -u + b * -v + (b + c - 1.0) * std::log(xc) +
                              (a + c - 1.0) * std::log(yc) -
                              (a + b + c) * std::log(-std::expm1(-(u + v))) - lb;
            return std::exp(lg);
        };
        return rule.integrate(f, 1e-10);
    };
    return rule.integrate(inner, 1e-9);
}

double fgm_mass_tanh_sinh(const FgmParams& p) {
    boost::math::quadrature::tanh_sinh<double> rule;
    auto inner = [&](double x) {
        auto f = [&](double y) { return std::exp(fgm_pair_logpdf(x, y, p)); };
        return rule.integrate(f, 0.0, 1.0, 1e-12);
    };
    return rule.integrate(inner, 0.0, 1.0, 1e-11);
}

} // namespace

// ---------------------------------------------------------------- densities

TEST(ExpLogpdfMean, Examples) {
    EXPECT_DOUBLE_EQ(exp_logpdf_mean(0.0, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(exp_logpdf_mean(1.0, 1.0), -1.0);
    EXPECT_NEAR(exp_logpdf_mean(2.0, 2.0), -std::log(2.0) - 1.0, 1e-15);
    EXPECT_NEAR(exp_logpdf_mean(2.0, 2.0), -1.6931, 1e-4);
}

TEST(ExpLogpdfMean, NonPositiveMeanIsDomainError) {
    EXPECT_THROW(exp_logpdf_mean(1.0, 0.0), DomainError);
    EXPECT_THROW(exp_logpdf_mean(1.0, -2.0), DomainError);
}

TEST(GammaLogpdf, MatchesClosedForm) {
    EXPECT_NEAR(gamma_logpdf(0.7, 1.0, 2.0), std::log(2.0) - 1.4, 1e-15);
    EXPECT_NEAR(gamma_logpdf(2.0, 3.0, 1.5),
                3.0 * std::log(1.5) - std::lgamma(3.0) + 2.0 * std::log(2.0) - 3.0, 1e-14);
    EXPECT_EQ(gamma_logpdf(-1.0, 2.0, 1.0), neg_inf);
}

TEST(BivariateBeta, UnitShapesMatchClosedForm) {
    const BivariateBetaParams p{1.0, 1.0, 1.0};
    for (double x : {0.1, 0.5, 0.9})
        for (double y : {0.2, 0.5, 0.7}) {
            const double d = 2.0 * (1 - x) * (1 - y) / std::pow(1 - x * y, 3);
            EXPECT_NEAR(bivariate_beta_logpdf(x, y, p), std::log(d), 1e-13);
        }
    EXPECT_NEAR(bivariate_beta_logpdf(0.0, 0.0, p), std::log(2.0), 1e-15);
    EXPECT_NEAR(log_beta3(1.0, 1.0, 1.0), std::log(0.5), 1e-15);
}

TEST(BivariateBeta, RejectsPointsOutsideTheSquare) {
    const BivariateBetaParams p{2.0, 3.0, 1.0};
    EXPECT_THROW(bivariate_beta_logpdf(1.2, 0.5, p), DomainError);
    EXPECT_THROW(bivariate_beta_logpdf(0.5, -0.1, p), DomainError);
    EXPECT_THROW(bivariate_beta_logpdf(1.0, 1.0, p), DomainError);
    EXPECT_THROW(bivariate_beta_logpdf(0.5, 0.5, {0.0, 1.0, 1.0}), DomainError);
}

TEST(BivariateBeta, FiniteOnInteriorForParameterGrid) {
    for (double a : {0.05, 0.5, 1.0, 2.5, 10.0})
        for (double b : {0.1, 1.0, 4.0})
            for (double x : {1e-9, 0.3, 0.999999})
                for (double y : {1e-9, 0.6, 0.999999}) {
                    const double v = bivariate_beta_logpdf(x, y, {a, b, 1.0});
                    EXPECT_TRUE(std::isfinite(v)) << a << " " << b << " " << x << " " << y;
                }
}

class BivariateBetaMass : public ::testing::TestWithParam<BivariateBetaParams> {};

TEST_P(BivariateBetaMass, IntegratesToOneByBothRoutes) {
    const auto p = GetParam();
    const auto m = bivariate_beta_moments(p);
    EXPECT_NEAR(m.total_mass, 1.0, 1e-3);
    EXPECT_NEAR(bb_mass_exp_sinh(p.a, p.b, p.c), 1.0, 1e-3);
}

INSTANTIATE_TEST_SUITE_P(Grid, BivariateBetaMass,
                         ::testing::Values(BivariateBetaParams{2.5, 4.0, 1.0},
                                           BivariateBetaParams{0.05, 0.1, 1.0},
                                           BivariateBetaParams{1.0, 1.0, 1.0},
                                           BivariateBetaParams{0.5, 3.0, 1.0}));

TEST(BivariateBeta, MarginalOfXIsBetaAC) {
    const BivariateBetaParams p{2.0, 3.0, 1.0};
    boost::math::quadrature::gauss_kronrod<double, 61> gk;
    for (double x : {0.1, 0.25, 0.5, 0.75, 0.9}) {
        auto f = [&](double y) { return std::exp(bivariate_beta_logpdf(x, y, p)); };
        const double marg = gk.integrate(f, 0.0, 1.0, 8, 1e-12);
        EXPECT_NEAR(marg, std::exp(beta_logpdf(x, p.a, p.c)), 1e-8) << "x=" << x;
    }
}

TEST(BivariateBetaMoments, MatchHighPrecisionOracle) {
    // mpmath quadrature at 20-30 digits
    const auto m1 = bivariate_beta_moments({2.5, 4.0, 1.0});
    EXPECT_NEAR(m1.correlation, 0.686561626564819, 1e-7);
    EXPECT_NEAR(m1.mean_x, 2.5 / 3.5, 1e-9);
    EXPECT_NEAR(m1.mean_y, 0.8, 1e-9);
    const auto m2 = bivariate_beta_moments({0.05, 0.1, 1.0});
    EXPECT_NEAR(m2.correlation, 0.0801699622355699, 1e-7);
    EXPECT_NEAR(m2.mean_x, 0.05 / 1.05, 1e-9);
    EXPECT_NEAR(m2.mean_y, 0.1 / 1.1, 1e-9);
}

TEST(BivariateBetaMoments, SymmetricShapesGiveEqualMeans) {
    const auto m = bivariate_beta_moments({1.0, 1.0, 1.0});
    EXPECT_NEAR(m.mean_x, m.mean_y, 1e-12);
    EXPECT_NEAR(m.mean_x, 0.5, 1e-10);
    EXPECT_NEAR(m.correlation, 0.478417604357434, 1e-7);
}

TEST(BivariateBetaMoments, SampleCorrelationAgrees) {
    Rng rng(11);
    const BivariateBetaParams p{2.5, 4.0, 1.0};
    const int n = 200000;
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const auto [x, y] = bivariate_beta_sample(p, rng);
        sx += x, sy += y, sxx += x * x, syy += y * y, sxy += x * y;
    }
    const double mx = sx / n, my = sy / n;
    const double r = (sxy / n - mx * my) /
                     std::sqrt((sxx / n - mx * mx) * (syy / n - my * my));
    EXPECT_NEAR(r, bivariate_beta_moments(p).correlation, 0.01);
}

TEST(Fgm, HalfQuantileKillsTheCopulaTerm) {
    for (double rho : {-1.0, -0.3, 0.0, 0.8, 1.0})
        for (double nu2 : {0.1, 0.5, 0.95})
            EXPECT_NEAR(fgm_pair_logpdf(0.5, nu2, {rho, 1.0, 1.0}), 0.0, 1e-15);
}

TEST(Fgm, UpperCornerCopulaFactorApproachesTwo) {
    const double nu = 1.0 - 1e-12;
    EXPECT_NEAR(fgm_pair_logpdf(nu, nu, {1.0, 1.0, 1.0}), std::log(2.0), 1e-10);
}

TEST(Fgm, IntegratesToOne) {
    EXPECT_NEAR(fgm_mass_tanh_sinh({0.7, 2.0, 3.0}), 1.0, 1e-6);
    EXPECT_NEAR(fgm_mass_tanh_sinh({-1.0, 0.5, 1.5}), 1.0, 1e-6);
}

TEST(Fgm, OutOfRangeArgumentsAreDomainErrors) {
    EXPECT_THROW(fgm_pair_logpdf(0.0, 0.5, {0.1, 1.0, 1.0}), DomainError);
    EXPECT_THROW(fgm_pair_logpdf(0.5, 1.0, {0.1, 1.0, 1.0}), DomainError);
    EXPECT_THROW(fgm_pair_logpdf(0.5, 0.5, {1.5, 1.0, 1.0}), DomainError);
}

TEST(Fgm, CornerWithNegativeOneRhoIsMinusInfinity) {
    // u = v -> 1 with rho = -1 gives a vanishing copula density
    EXPECT_EQ(fgm_copula_density(1.0, 1.0, -1.0), 0.0);
}

// ---------------------------------------------------------------- samplers

TEST(TruncatedBeta, InverseCdfExamples) {
    EXPECT_DOUBLE_EQ(truncated_beta_from_uniform(1.0, 0.0, 1.0, 0.5), 0.5);
    EXPECT_NEAR(truncated_beta_from_uniform(2.0, 0.0, 1.0, 0.25), 0.5, 1e-15);
}

TEST(TruncatedBeta, OutputsStayInsideTheInterval) {
    Rng rng(3);
    for (int i = 0; i < 20000; ++i) {
        const double lo = rng.uniform() * 0.5;
        const double hi = lo + (1.0 - lo) * rng.uniform() + 1e-300;
        const double alpha = 0.01 + 5.0 * rng.uniform();
        const double x = truncated_beta_sample(alpha, lo, std::min(hi, 1.0), rng);
        ASSERT_GE(x, lo);
        ASSERT_LE(x, std::min(hi, 1.0));
    }
    EXPECT_THROW(truncated_beta_sample(1.0, 0.5, 0.5, rng), DomainError);
    EXPECT_THROW(truncated_beta_sample(1.0, 0.6, 0.5, rng), DomainError);
}

TEST(TruncatedBeta, FullIntervalPassesKs) {
    for (double alpha : {0.3, 2.0}) {
        Rng rng(5);
        std::vector<double> xs(100000);
        for (double& x : xs)
            x = truncated_beta_sample(alpha, 0.0, 1.0, rng);
        const double d = check::ks_statistic(xs, check::beta1_cdf(alpha));
        EXPECT_GT(check::ks_p_value(d, xs.size()), 0.01) << "alpha=" << alpha;
    }
}

TEST(FgmSample, ZeroRhoAndHalfUReturnW) {
    for (double w : {0.01, 0.3, 0.77})
        EXPECT_EQ(fgm_conditional_inverse(0.2, w, 0.0), w);
    for (double rho : {-1.0, 0.4, 1.0})
        EXPECT_NEAR(fgm_conditional_inverse(0.5, 0.42, rho), 0.42, 1e-15);
}

TEST(FgmSample, ConditionalInverseSolvesTheQuadratic) {
    for (double u : {0.05, 0.3, 0.9})
        for (double w : {0.001, 0.5, 0.999})
            for (double rho : {-1.0, -0.2, 0.6, 1.0}) {
                const double v = fgm_conditional_inverse(u, w, rho);
                ASSERT_GE(v, 0.0);
                ASSERT_LE(v, 1.0);
                EXPECT_NEAR(v + rho * v * (1 - v) * (1 - 2 * u), w, 1e-14);
            }
}

TEST(FgmSample, MarginsPassKs) {
    const FgmParams p{0.7, 2.0, 3.0};
    Rng rng(17);
    std::vector<double> a(100000), b(100000);
    for (std::size_t i = 0; i < a.size(); ++i)
        std::tie(a[i], b[i]) = fgm_pair_sample(p, rng);
    EXPECT_GT(check::ks_p_value(check::ks_statistic(a, check::beta1_cdf(2.0)), a.size()),
              0.01);
    EXPECT_GT(check::ks_p_value(check::ks_statistic(b, check::beta1_cdf(3.0)), b.size()),
              0.01);
}

TEST(FgmSample, SpearmanIsRhoOverThree) {
    for (double rho : {-1.0, 0.0, 1.0}) {
        Rng rng(23);
        std::vector<std::pair<double, double>> pairs(100000);
        for (auto& pr : pairs)
            pr = fgm_copula_sample(rho, rng);
        const auto s = spearman_rho(pairs);
        ASSERT_TRUE(s.has_value());
        EXPECT_NEAR(*s, rho / 3.0, 0.03) << "rho=" << rho;
    }
}

// ---------------------------------------------------------------- normal

TEST(Normal, Examples) {
    EXPECT_EQ(normal_cdf(0.0, 0.0, 1.0), 0.5);
    EXPECT_EQ(normal_inv_cdf(0.5, 0.0, 4.0), 0.0);
    for (int i = 1; i <= 9; ++i) {
        const double p = i / 10.0;
        EXPECT_NEAR(normal_cdf(normal_inv_cdf(p, 0.0, 1.0), 0.0, 1.0), p, 1e-8);
    }
}

TEST(Normal, QuantileMatchesHighPrecisionValues) {
    const std::pair<double, double> cases[] = {
        {1e-300, -37.0470962993611992}, {1e-20, -9.26234008979840757},
        {0.001, -3.09023230616781354},  {0.02425, -1.97296105131188485},
        {0.3, -0.524400512708040816},   {0.975, 1.95996398454005424},
        {0.999999, 4.75342430881708777}};
    for (const auto& [p, q] : cases)
        EXPECT_NEAR(std_normal_quantile(p), q, 1e-13 * std::max(1.0, std::fabs(q))) << p;
}

TEST(Normal, CdfMatchesHighPrecisionValues) {
    const std::pair<double, double> cases[] = {
        {-10.0, 7.6198530241605260660e-24}, {-1.5, 0.066807201268858066004},
        {2.5, 0.99379033467422386483},      {8.0, 0.99999999999999937790}};
    for (const auto& [x, c] : cases)
        EXPECT_NEAR(std_normal_cdf(x), c, 1e-14 * c) << x;
    EXPECT_GT(std_normal_cdf(-38.0), 0.0);
}

TEST(Normal, RoundTripOnMinusSixToSix) {
    for (double x = -6.0; x <= 6.0; x += 0.01)
        EXPECT_NEAR(normal_inv_cdf(normal_cdf(x, 0.0, 1.0), 0.0, 1.0), x, 1e-8);
}

TEST(Normal, BoundaryProbabilitiesAreRejected) {
    EXPECT_THROW(normal_inv_cdf(0.0, 0.0, 1.0), DomainError);
    EXPECT_THROW(normal_inv_cdf(1.0, 0.0, 1.0), DomainError);
    EXPECT_THROW(normal_cdf(0.0, 0.0, 0.0), DomainError);
}

TEST(TruncatedNormal, SupportInvariant) {
    Rng rng(8);
    for (int i = 0; i < 10000; ++i) {
        EXPECT_LE(truncated_normal_sample(1.0, 2.0, HalfLine::below(1.0), rng), 1.0);
        EXPECT_GE(truncated_normal_sample(-3.0, 0.5, HalfLine::above(4.0), rng), 4.0);
    }
}

TEST(TruncatedNormal, VanishingVarianceCollapsesToTheMean) {
    Rng rng(8);
    const double x = truncated_normal_sample(2.0, 1e-20, HalfLine::above(2.0), rng);
    EXPECT_NEAR(x, 2.0, 1e-8);
}

TEST(TruncatedNormal, HalfNormalMean) {
    Rng rng(31);
    double s = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        s += truncated_normal_sample(0.0, 1.0, HalfLine::above(0.0), rng);
    EXPECT_NEAR(s / n, std::sqrt(2.0 / std::numbers::pi), 0.01);
}

TEST(TruncatedNormal, FarTailUsesTheFallback) {
    Rng rng(2);
    SamplerDiagnostics diag;
    double s = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double x = truncated_normal_sample(0.0, 1.0, HalfLine::above(40.0), rng, &diag);
        ASSERT_GE(x, 40.0);
        s += x;
    }
    EXPECT_EQ(diag.tail_fallbacks, 1000u);
    // E[Z | Z > a] ~ a + 1/a for large a
    EXPECT_NEAR(s / 1000.0, 40.0 + 1.0 / 40.0, 0.005);
}

// ---------------------------------------------------------------- spearman

TEST(Spearman, Examples) {
    std::vector<std::pair<double, double>> inc{{1, 1}, {2, 4}, {3, 9}, {4, 16}};
    std::vector<std::pair<double, double>> dec{{1, 3}, {2, 2}, {3, 1}};
    std::vector<std::pair<double, double>> mix{{1, 2}, {2, 1}, {3, 3}};
    EXPECT_DOUBLE_EQ(*spearman_rho(inc), 1.0);
    EXPECT_DOUBLE_EQ(*spearman_rho(dec), -1.0);
    EXPECT_NEAR(*spearman_rho(mix), 0.5, 1e-15);
}

TEST(Spearman, ConstantMarginIsDegenerate) {
    std::vector<std::pair<double, double>> c{{1, 5}, {2, 5}, {3, 5}};
    EXPECT_FALSE(spearman_rho(c).has_value());
    std::vector<std::pair<double, double>> two{{1, 5}, {2, 6}};
    EXPECT_THROW(spearman_rho(two), ContractViolation);
}

TEST(Spearman, TiesGetAverageRanks) {
    const std::vector<double> v{3.0, 1.0, 2.0, 2.0};
    const auto r = average_ranks(v);
    EXPECT_EQ(r, (std::vector<double>{4.0, 1.0, 2.5, 2.5}));
}

// ---------------------------------------------------------------- quadrature, rng

TEST(TanhSinh, IntegratesEndpointSingularity) {
    const TanhSinh rule(10);
    const auto r = rule.integrate([](double x, double, double) { return 1.0 / std::sqrt(x); },
                                  0.0, 1.0, 1e-12);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, 2.0, 1e-10);
}

TEST(TanhSinh, UnitSquareProduct) {
    const auto r = integrate_unit_square(
        [](double x, double, double y, double) { return 4.0 * x * y; }, 1e-10);
    EXPECT_NEAR(r.value, 1.0, 1e-10);
}

TEST(Rng, SameSeedSameStream) {
    Rng a(99), b(99), c(100);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const double x = a.normal();
        EXPECT_EQ(x, b.normal());
        differs |= x != c.normal();
    }
    EXPECT_TRUE(differs);
}

TEST(Rng, StateRestoreResumesTheStream) {
    Rng a(4);
    for (int i = 0; i < 10; ++i)
        a.gamma(0.3, 1.0);
    Rng b;
    b.restore(a.state());
    for (int i = 0; i < 50; ++i)
        EXPECT_EQ(a.beta(0.5, 2.0), b.beta(0.5, 2.0));
}

TEST(Rng, GammaVariatesHaveTheRightMean) {
    Rng rng(12);
    for (double shape : {0.05, 0.7, 3.0}) {
        double s = 0.0;
        const int n = 200000;
        for (int i = 0; i < n; ++i)
            s += rng.gamma(shape, 2.0);
        EXPECT_NEAR(s / n, shape / 2.0, 0.02 * std::max(shape, 0.2)) << shape;
    }
}

TEST(Rng, DerivedSeedsDiffer) {
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
    EXPECT_EQ(derive_seed(5, 3), derive_seed(5, 3));
}
