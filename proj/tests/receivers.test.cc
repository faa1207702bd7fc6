#include <gtest/gtest.h>

#include <cmath>

#include "eaas/bounds.h"
#include "eaas/gaussian.h"
#include "eaas/receivers.h"
#include "eaas/rng.h"
#include "eaas/simulation.h"

using namespace eaas;

TEST(Receivers, EaIdeal) {
    EXPECT_DOUBLE_EQ(ea_error_ideal(1.0, 1.0, 10, 1), 0.5);
    EXPECT_DOUBLE_EQ(ea_error_ideal(1.0, 1.0, 10, 7), 6.0 / 7.0);
    const double base = 1.0 / (1.0 + (1.0 - std::sqrt(0.75)));
    EXPECT_NEAR(ea_error_ideal(1.0, 0.75, 10, 1), 0.5 * std::pow(base, 20), 1e-15);
    EXPECT_NEAR(ea_error_ideal(1.0, 0.75, 10, 1), 0.0404486, 1e-7);
    EXPECT_NEAR(ea_error_ideal(1.0, 0.75, 10, 100), 0.0800882, 1e-7);
}

TEST(Receivers, EaIdealRejectsOtherRegimes) {
    EXPECT_THROW(ea_error_ideal(1.0, 0.75, 10, 1, 0.95), ContractError);
    EXPECT_THROW(ea_error_ideal(1.0, 0.75, 10, 1, 1.0, ChannelEnv(0.1, 1.0)), ContractError);
    EXPECT_THROW(ea_error_ideal(1.0, 0.75, 10, 1, 1.0, ChannelEnv(0.0, 0.9)), ContractError);
}

TEST(Receivers, BellVariance) {
    EXPECT_NEAR(bell_variance(1.0, 1.0), 3.0 - 2.0 * std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(bell_variance(1.0, 0.75), 2.75 - 2.0 * std::sqrt(1.5), 1e-15);
    EXPECT_NEAR(bell_variance(1.0, 0.75), 0.30051, 1e-5);
}

TEST(Receivers, BellReceiver) {
    EXPECT_DOUBLE_EQ(bell_receiver_error(1.0, 0.8, 0.8, 10), 0.5);
    // mpmath gammainc evaluation of the chi-square threshold test.
    EXPECT_NEAR(bell_receiver_error(1.0, 1.0, 0.75, 10), 0.19025809160985805, 1e-13);
    EXPECT_NEAR(bell_receiver_error(1.0, 0.95, 0.75, 100), 0.013754662075649884, 1e-13);
    double prev = 0.5;
    for (std::uint64_t m = 1; m <= 200; m += 7) {
        const double v = bell_receiver_error(1.0, 1.0, 0.75, m);
        EXPECT_LT(v, prev);
        EXPECT_LE(ea_error_ideal(1.0, 0.75, m, 1), v);
        prev = v;
    }
}

TEST(Receivers, OpaHomodyne) {
    EXPECT_NEAR(opa_homodyne_error_ideal(1.0, 1.0, 5, QuadraturePair::Matched), 0.5, 1e-9);
    // mpmath quadrature of the two chi-square densities.
    EXPECT_NEAR(opa_homodyne_error_ideal(1.0, 0.75, 20, QuadraturePair::Matched), 0.16308187649395163, 1e-8);
    EXPECT_NEAR(opa_homodyne_error_ideal(1.0, 0.75, 20, QuadraturePair::Crossed), 0.23685906926035009, 1e-8);
    // The crossed pair does not beat the classical Helstrom form at this setting.
    for (std::uint64_t m : {5u, 20u, 50u}) {
        EXPECT_GT(opa_homodyne_error_ideal(1.0, 0.75, m, QuadraturePair::Crossed),
                  helstrom_binary_lb(1.0, 0.75, 1.0, m, 0.0));
    }
}

TEST(Receivers, OpaHomodyneMatchesMonteCarlo) {
    // Sample the measured quadratures and apply the likelihood-ratio test.
    const double ns = 1.0, kt = 0.75;
    const std::uint64_t m = 20;
    const Gain g = nulling_gain(ns, 1.0);
    const auto st_t = opa_output(ns, kt, ChannelEnv{}, g);
    const double e = st_t.e(), s = st_t.s(), c = st_t.c();
    const double root = std::sqrt((e - s) * (e - s) + 4 * c * c);
    const double l1 = (e + s + root) / 2, l2 = (e + s - root) / 2;
    const double tau = -static_cast<double>(m) * std::log(l1 * l2);
    const double a = 1.0 / l1 - 1.0, b = 1.0 / l2 - 1.0;
    Rng rng(77);
    const int trials = 400000;
    int errors = 0;
    for (int i = 0; i < trials; ++i) {
        const bool target = i % 2 == 1;
        double stat = 0.0;
        for (std::uint64_t k = 0; k < m; ++k) {
            const double x = standard_normal(rng) * (target ? std::sqrt(l1) : 1.0);
            const double y = standard_normal(rng) * (target ? std::sqrt(l2) : 1.0);
            stat += a * x * x + b * y * y;
        }
        const bool say_background = stat > tau;
        errors += say_background == target ? 1 : 0;
    }
    const double p = static_cast<double>(errors) / trials;
    const double ref = opa_homodyne_error_ideal(ns, kt, m, QuadraturePair::Matched);
    EXPECT_NEAR(p, ref, 4.0 * std::sqrt(ref * (1 - ref) / trials));
}

TEST(Receivers, ClassicalNullers) {
    // (m=10, p=0.1): p = exp(-M N_S d) with M N_S d = ln 10.
    const double d = std::pow(1.0 - std::sqrt(0.5), 2);
    const double ns = std::log(10.0) / d;
    EXPECT_NEAR(nuller_miss_probability(1.0, 0.5, ns, 1), 0.1, 1e-14);
    EXPECT_NEAR(classical_unconditional_nuller(10, 1.0, 0.5, ns, 1), 0.09, 1e-14);
    EXPECT_NEAR(classical_conditional_nuller(10, 1.0, 0.5, ns, 1), std::pow(0.9, 10) / 10.0, 1e-14);
    EXPECT_NEAR(classical_conditional_nuller(10, 1.0, 0.5, ns, 1), 0.0348678, 1e-7);
    EXPECT_DOUBLE_EQ(classical_unconditional_nuller(1, 1.0, 0.5, ns, 1), 0.0);
    EXPECT_DOUBLE_EQ(classical_conditional_nuller(1, 1.0, 0.5, ns, 1), 0.0);
    EXPECT_NEAR(classical_unconditional_nuller(10, 0.8, 0.8, 1.0, 5), 0.9, 1e-15);
}

TEST(Receivers, ConditionalNullerOrderingAndAsymptotics) {
    for (std::uint64_t m : {2u, 3u, 10u, 100u}) {
        for (double ns : {0.01, 0.1, 1.0, 10.0, 100.0}) {
            EXPECT_LE(classical_conditional_nuller(m, 0.95, 0.75, ns, 10),
                      classical_unconditional_nuller(m, 0.95, 0.75, ns, 10) + 1e-17);
        }
        for (std::uint64_t big_m : {600u, 1000u, 3000u}) {
            const double p = nuller_miss_probability(0.95, 0.75, 1.0, big_m);
            ASSERT_LE(p, 1e-3);
            const double ratio = classical_conditional_nuller(m, 0.95, 0.75, 1.0, big_m) /
                                 ((static_cast<double>(m) - 1.0) / 2.0 * p * p);
            EXPECT_NEAR(ratio, 1.0, 0.05) << m << " " << big_m;
        }
    }
}
