#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "eaas/special_functions.h"

using namespace eaas;

namespace {

double chi2_pdf(double y, double k) {
    if (y <= 0.0) {
        return 0.0;
    }
    return std::exp((k / 2 - 1) * std::log(y) - y / 2 - std::lgamma(k / 2) - (k / 2) * std::log(2.0));
}

}  // namespace

TEST(SpecialFunctions, LogGamma) {
    EXPECT_NEAR(log_gamma(1.0), 0.0, 1e-15);
    EXPECT_NEAR(log_gamma(0.5), 0.5 * std::log(M_PI), 1e-15);
    EXPECT_NEAR(log_gamma(101.0), boost::math::lgamma(101.0), 1e-12);
}

TEST(SpecialFunctions, IncompleteGammaMatchesBoost) {
    for (double a : {0.5, 1.0, 2.5, 10.0, 20.0, 100.0, 1000.0}) {
        for (double ratio : {0.01, 0.1, 0.5, 0.9, 1.0, 1.1, 2.0, 5.0}) {
            const double x = a * ratio;
            const double q = boost::math::gamma_q(a, x);
            const double p = boost::math::gamma_p(a, x);
            EXPECT_NEAR(gamma_q(a, x), q, 1e-13 + 1e-11 * q) << a << " " << x;
            EXPECT_NEAR(gamma_p(a, x), p, 1e-13 + 1e-11 * p) << a << " " << x;
        }
    }
    EXPECT_EQ(gamma_p(3.0, 0.0), 0.0);
    EXPECT_EQ(gamma_q(3.0, 0.0), 1.0);
}

TEST(SpecialFunctions, UpperIncompleteGammaMatchesQuadrature) {
    boost::math::quadrature::exp_sinh<double> rule;
    for (double a : {1.0, 3.0, 10.0, 30.0}) {
        for (double x : {0.5, 5.0, 20.0, 60.0}) {
            const double tail =
                rule.integrate([&](double t) { return std::exp((a - 1) * std::log(t + x) - (t + x) - std::lgamma(a)); });
            EXPECT_NEAR(gamma_q(a, x), tail, 1e-12 + 1e-9 * tail) << a << " " << x;
        }
    }
}

TEST(SpecialFunctions, NormalCdf) {
    for (double x : {-8.0, -2.0, -0.3, 0.0, 0.7, 3.0}) {
        EXPECT_NEAR(normal_cdf(x), 0.5 * std::erfc(-x / std::sqrt(2.0)), 1e-16 + 1e-14 * normal_cdf(x));
    }
}

TEST(SpecialFunctions, WeightedChiSquareReducesToGammaCdf) {
    for (double k : {1.0, 2.0, 7.0, 40.0}) {
        for (double x : {0.3, 3.0, 12.0, 60.0}) {
            const WeightedChiSquare one[] = {{1.0, k}};
            EXPECT_NEAR(weighted_chi_square_cdf(one, x), gamma_p(k / 2, x / 2), 1e-8) << k << " " << x;
            const WeightedChiSquare split[] = {{2.5, k}, {2.5, 3.0}};
            EXPECT_NEAR(weighted_chi_square_cdf(split, x), gamma_p((k + 3.0) / 2, x / 5.0), 1e-8);
        }
    }
}

TEST(SpecialFunctions, WeightedChiSquareWithMixedSignsMatchesConvolution) {
    // P(w1 X - w2 Y <= x) = E_Y[P(X <= (x + w2 Y) / w1)], integrated numerically.
    boost::math::quadrature::exp_sinh<double> rule;
    const double w1 = 0.7, w2 = 1.9;
    for (double k : {2.0, 10.0}) {
        for (double x : {-10.0, -1.0, 0.0, 2.0, 15.0}) {
            // Start the integral where the inner CDF becomes nonzero so the rule sees a smooth integrand.
            const double y0 = std::max(0.0, -x / w2);
            const double oracle = rule.integrate([&](double t) {
                const double y = y0 + t;
                return chi2_pdf(y, k) * gamma_p(k / 2, std::max(0.0, (x + w2 * y) / w1 / 2));
            });
            const WeightedChiSquare terms[] = {{w1, k}, {-w2, k}};
            EXPECT_NEAR(weighted_chi_square_cdf(terms, x), oracle, 1e-8) << k << " " << x;
        }
    }
}

TEST(SpecialFunctions, WeightedChiSquareIsMonotone) {
    const WeightedChiSquare terms[] = {{0.4, 20.0}, {-1.3, 20.0}};
    double prev = 0.0;
    for (double x = -80.0; x <= 30.0; x += 2.5) {
        const double f = weighted_chi_square_cdf(terms, x);
        EXPECT_GE(f, prev - 1e-9);
        EXPECT_GE(f, -1e-9);
        EXPECT_LE(f, 1.0 + 1e-9);
        prev = f;
    }
}
