#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Dense>

#include "eaas/gaussian.h"
#include "eaas/photon_stats.h"

using namespace eaas;

namespace {

Eigen::Matrix4d covariance(const TwoModeState &st) {
    Eigen::Matrix4d v = Eigen::Matrix4d::Zero();
    v(0, 0) = v(1, 1) = st.e();
    v(2, 2) = v(3, 3) = st.s();
    v(0, 2) = v(2, 0) = st.c();
    v(1, 3) = v(3, 1) = -st.c();
    return v;
}

Eigen::Matrix4d omega() {
    Eigen::Matrix4d w = Eigen::Matrix4d::Zero();
    w(0, 1) = w(2, 3) = 1.0;
    w(1, 0) = w(3, 2) = -1.0;
    return w;
}

/// Quadrature transform of a_S -> sqrt(G) a_S - sqrt(G-1) a_I^dag (and S <-> I).
Eigen::Matrix4d squeezer(double g) {
    const double ch = std::sqrt(g);
    const double sh = std::sqrt(g - 1.0);
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
    m(0, 0) = m(1, 1) = m(2, 2) = m(3, 3) = ch;
    m(0, 2) = m(2, 0) = -sh;
    m(1, 3) = m(3, 1) = sh;
    return m;
}

void expect_state(const TwoModeState &st, double e, double s, double c, double tol) {
    EXPECT_NEAR(st.e(), e, tol);
    EXPECT_NEAR(st.s(), s, tol);
    EXPECT_NEAR(st.c(), c, tol);
}

}  // namespace

TEST(Gaussian, TmsvState) {
    expect_state(tmsv_state(0.0), 1.0, 1.0, 0.0, 0.0);
    expect_state(tmsv_state(1.0), 3.0, 3.0, 2.0 * std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(tmsv_state(0.1).c(), 0.66332495807107994, 1e-14);
    EXPECT_THROW(tmsv_state(-0.1), DomainError);
}

TEST(Gaussian, TmsvIsPure) {
    for (double n : {0.0, 0.1, 1.0, 10.0}) {
        const auto sp = symplectic_eigenvalues(tmsv_state(n));
        EXPECT_NEAR(sp.nu_minus, 1.0, 1e-10) << n;
        EXPECT_NEAR(sp.nu_plus, 1.0, 1e-10) << n;
        EXPECT_TRUE(sp.physical);
    }
}

TEST(Gaussian, ReturnState) {
    expect_state(return_state(1.0, 1.0, ChannelEnv{}), 3.0, 3.0, 2.0 * std::sqrt(2.0), 1e-15);
    expect_state(return_state(1.0, 0.75, ChannelEnv{}), 2.5, 3.0, 2.0 * std::sqrt(1.5), 1e-15);
    expect_state(return_state(1.0, 0.0, ChannelEnv{}), 1.0, 3.0, 0.0, 0.0);
    expect_state(return_state(0.5, 0.6, ChannelEnv(0.2, 0.7)), 2.0 * (0.3 + 0.2) + 1.0, 2.0 * 0.35 + 1.0,
                 2.0 * std::sqrt(0.6 * 0.7 * 0.5 * 1.5), 1e-15);
    EXPECT_THROW(return_state(1.0, 1.2, ChannelEnv{}), DomainError);
    EXPECT_THROW(ChannelEnv(-0.1, 1.0), DomainError);
    EXPECT_THROW(ChannelEnv(0.0, 1.1), DomainError);
}

TEST(Gaussian, ReturnStateMonotoneInKappa) {
    double prev = 0.0;
    for (double k = 0.0; k <= 1.0; k += 0.05) {
        const auto st = return_state(0.7, k, ChannelEnv(0.1, 0.9));
        EXPECT_GT(st.e(), prev);
        prev = st.e();
        EXPECT_EQ(st.c() == 0.0, k == 0.0);
    }
}

TEST(Gaussian, UnphysicalStatesRejected) {
    EXPECT_THROW(TwoModeState(1.0, 1.0, 0.5), DomainError);
    EXPECT_THROW(TwoModeState(0.5, 1.0, 0.0), DomainError);
    const auto sp = symplectic_eigenvalues(1.0, 1.0, 0.5);
    EXPECT_FALSE(sp.physical);
    EXPECT_THROW(Gain(0.99), DomainError);
}

TEST(Gaussian, SymplecticEigenvaluesMatchEigenDecomposition) {
    const TwoModeState states[] = {TwoModeState(2.5, 3.0, 2.0 * std::sqrt(1.5)), TwoModeState(3.0, 3.0, 0.0),
                                   return_state(2.0, 0.3, ChannelEnv(0.4, 0.6)),
                                   opa_output(1.0, 0.75, ChannelEnv(0.1, 0.8), Gain(1.5))};
    for (const auto &st : states) {
        const Eigen::Matrix4d m = omega() * covariance(st);
        const Eigen::Vector4cd ev = m.eigenvalues();
        std::vector<double> nu;
        for (int i = 0; i < 4; ++i) {
            nu.push_back(std::abs(ev[i].imag()));
        }
        std::sort(nu.begin(), nu.end());
        const auto sp = symplectic_eigenvalues(st);
        EXPECT_NEAR(sp.nu_minus, nu[0], 1e-10);
        EXPECT_NEAR(sp.nu_plus, nu[3], 1e-10);
        EXPECT_NEAR(sp.nu_minus * sp.nu_plus, std::sqrt(covariance(st).determinant()), 1e-10);
        EXPECT_GE(sp.nu_minus, 1.0 - 1e-12);
    }
    const auto sp = symplectic_eigenvalues(3.0, 3.0, 0.0);
    EXPECT_DOUBLE_EQ(sp.nu_minus, 3.0);
    EXPECT_DOUBLE_EQ(sp.nu_plus, 3.0);
}

TEST(Gaussian, OpaIsTheSymplecticSqueezer) {
    const auto in = return_state(1.3, 0.6, ChannelEnv(0.2, 0.9));
    for (double g : {1.0, 1.2, 2.0, 5.0}) {
        const Eigen::Matrix4d s = squeezer(g);
        EXPECT_TRUE((s * omega() * s.transpose()).isApprox(omega(), 1e-13));
        const Eigen::Matrix4d expected = s * covariance(in) * s.transpose();
        EXPECT_TRUE(covariance(apply_opa(in, Gain(g))).isApprox(expected, 1e-12)) << g;
    }
}

TEST(Gaussian, OpaAtUnitGainIsIdentity) {
    const auto in = return_state(0.8, 0.4, ChannelEnv(0.3, 0.5));
    const auto out = apply_opa(in, Gain(1.0));
    EXPECT_EQ(out.e(), in.e());
    EXPECT_EQ(out.s(), in.s());
    EXPECT_EQ(out.c(), in.c());
}

TEST(Gaussian, OpaInverseRoundTrip) {
    for (double g : {1.1, 1.9, 3.5}) {
        const auto in = return_state(1.0, 0.7, ChannelEnv(0.05, 0.85));
        const auto back = apply_inverse_opa(apply_opa(in, Gain(g)), Gain(g));
        expect_state(back, in.e(), in.s(), in.c(), 1e-10);
    }
}

TEST(Gaussian, OpaNullsTheBackground) {
    expect_state(opa_output(1.0, 1.0, ChannelEnv{}, Gain(2.0)), 1.0, 1.0, 0.0, 1e-12);
    const auto out = opa_output(1.0, 0.95, ChannelEnv{}, nulling_gain(1.0, 0.95));
    expect_state(out, 1.0, 1.1, 0.0, 1e-12);
    for (double n : {0.01, 0.5, 3.0}) {
        for (double k : {0.2, 0.8, 1.0}) {
            const auto st = opa_output(n, k, ChannelEnv{}, nulling_gain(n, k));
            EXPECT_NEAR(st.e(), 1.0, 1e-12);
            EXPECT_NEAR(st.c(), 0.0, 1e-12);
        }
    }
}

TEST(Gaussian, OpaMatchesTermByTermReceiverEquations) {
    // Independent mpmath evaluation of the post-OPA expressions
    // (n_s=1, kappa_s=0.75, kappa_i=0.8, N_B=0.1, G=1.5).
    const auto st = opa_output(1.0, 0.75, ChannelEnv(0.1, 0.8), Gain(1.5));
    EXPECT_NEAR(st.e(), 1.5552668077979448, 1e-13);
    EXPECT_NEAR(st.s(), 1.4552668077979448, 1e-13);
    EXPECT_NEAR(std::abs(st.c()), 0.20815418001619592, 1e-13);
}

TEST(Gaussian, NullingGain) {
    EXPECT_DOUBLE_EQ(nulling_gain(1.0, 1.0).g, 2.0);
    EXPECT_NEAR(nulling_gain(1.0, 0.95).g, 1.9047619047619047, 1e-15);
    EXPECT_DOUBLE_EQ(nulling_gain(0.0, 0.3).g, 1.0);
}

TEST(Gaussian, MinSignalGain) {
    // Ideal environment: the minimum is the nulling gain, where the signal is vacuum.
    EXPECT_NEAR(min_signal_gain(1.0, 0.95, ChannelEnv{}).g, nulling_gain(1.0, 0.95).g, 1e-8);
    EXPECT_DOUBLE_EQ(min_signal_gain(0.0, 0.5, ChannelEnv{}).g, 1.0);
    // Closed-form stationary point evaluated in mpmath.
    const double g = min_signal_gain(1.0, 0.95, ChannelEnv(0.0, 0.8)).g;
    EXPECT_NEAR(g, 1.629289648235625, 1.629289648235625 * 1e-9);
    EXPECT_LT(g, nulling_gain(1.0, 0.95).g);
}

TEST(Gaussian, MinSignalGainBeatsDenseGrid) {
    const ChannelEnv env(0.0, 0.8);
    const double best = opa_output(1.0, 0.95, env, min_signal_gain(1.0, 0.95, env)).e();
    for (double g = 1.0; g <= 11.0; g += 1e-3) {
        EXPECT_LE(best, opa_output(1.0, 0.95, env, Gain(g)).e() + 1e-12);
    }
}

TEST(Gaussian, QcbIdenticalStates) {
    const auto st = return_state(1.0, 0.8, ChannelEnv(0.1, 0.9));
    const auto b = qcb(st, st, 7);
    EXPECT_NEAR(b.q_tilde, 1.0, 1e-12);
    EXPECT_NEAR(b.bound, 0.5, 1e-12);
}

TEST(Gaussian, QcbIdealCase) {
    const auto t = return_state(1.0, 0.75, ChannelEnv{});
    const auto b = return_state(1.0, 1.0, ChannelEnv{});
    const auto r = qcb(t, b, 1);
    const double expected = std::pow(1.0 / (1.0 + (1.0 - std::sqrt(0.75))), 2);
    EXPECT_NEAR(r.q_tilde, expected, 1e-9);
    EXPECT_NEAR(r.q_tilde, 0.7776664251017992, 1e-9);
}

TEST(Gaussian, QcbProperties) {
    const auto t = return_state(0.7, 0.6, ChannelEnv(0.2, 0.9));
    const auto b = return_state(0.7, 0.95, ChannelEnv(0.2, 0.9));
    const auto r1 = qcb(t, b, 1);
    const auto r2 = qcb(t, b, 2);
    EXPECT_NEAR(r2.bound, 2.0 * r1.bound * r1.bound, 1e-14);
    EXPECT_NEAR(qcb(b, t, 3).bound, qcb(t, b, 3).bound, 1e-12);
    double prev = 0.5;
    for (std::uint64_t m = 1; m <= 64; m *= 2) {
        const double v = qcb(t, b, m).bound;
        EXPECT_LE(v, prev);
        EXPECT_LE(v, 0.5);
        prev = v;
    }
}

TEST(Gaussian, ChernoffOverlapMatchesFockDensityMatrices) {
    // Independent check: Tr rho^s sigma^(1-s) from eigendecompositions of the
    // truncated Fock-basis density matrices.
    const std::size_t cutoff = 22;
    const auto rho = return_state(0.3, 0.5, ChannelEnv(0.05, 0.9));
    const auto sigma = return_state(0.3, 0.95, ChannelEnv(0.05, 0.9));
    const int n = static_cast<int>((cutoff + 1) * (cutoff + 1));
    auto to_matrix = [&](const TwoModeState &st) {
        const auto d = fock_density_matrix(st, cutoff);
        return Eigen::Map<const Eigen::MatrixXd>(d.data(), n, n).eval();
    };
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> er(to_matrix(rho));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_matrix(sigma));
    for (double s : {0.3, 0.5, 0.8}) {
        auto power = [](const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> &e, double p) {
            Eigen::VectorXd lam = e.eigenvalues().cwiseMax(0.0).array().pow(p);
            return (e.eigenvectors() * lam.asDiagonal() * e.eigenvectors().transpose()).eval();
        };
        const double brute = (power(er, s) * power(es, 1.0 - s)).trace();
        EXPECT_NEAR(chernoff_overlap(rho, sigma, s), brute, 2e-6) << s;
    }
}
