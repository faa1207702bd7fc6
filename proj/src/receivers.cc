#include "eaas/receivers.h"

#include <array>
#include <cmath>

#include "eaas/errors.h"
#include "eaas/special_functions.h"

namespace eaas {

namespace {

void check_unit(double kappa, const char *name) {
    if (!(kappa >= 0.0 && kappa <= 1.0)) {
        throw DomainError(std::string(name) + " must lie in [0, 1]");
    }
}

void check_source(double n_s, std::uint64_t m_copies) {
    if (!(n_s >= 0.0) || !std::isfinite(n_s)) {
        throw DomainError("n_s must be >= 0");
    }
    if (m_copies < 1) {
        throw DomainError("m_copies must be >= 1");
    }
}

double guess_floor(std::uint64_t m) {
    return m == 1 ? 0.5 : static_cast<double>(m - 1) / static_cast<double>(m);
}

}  // namespace

double ea_error_ideal(double n_s, double kappa_t, std::uint64_t m_copies, std::uint64_t m_slots, double kappa_b,
                      const ChannelEnv &env) {
    check_source(n_s, m_copies);
    check_unit(kappa_t, "kappa_t");
    if (m_slots < 1) {
        throw DomainError("m_slots must be >= 1");
    }
    if (kappa_b != 1.0 || !env.ideal()) {
        throw ContractError("ea_error_ideal holds only for kappa_b = 1, kappa_i = 1, n_b = 0");
    }
    const double per_copy = -2.0 * std::log1p(n_s * (1.0 - std::sqrt(kappa_t)));
    return guess_floor(m_slots) * std::exp(static_cast<double>(m_copies) * per_copy);
}

double bell_variance(double n_s, double kappa) {
    return 1 + n_s + n_s * kappa - 2 * std::sqrt(n_s * (1 + n_s) * kappa);
}

double bell_receiver_error(double n_s, double kappa_b, double kappa_t, std::uint64_t m_copies) {
    check_source(n_s, m_copies);
    check_unit(kappa_b, "kappa_b");
    check_unit(kappa_t, "kappa_t");
    const double vt = bell_variance(n_s, kappa_t);
    const double vb = bell_variance(n_s, kappa_b);
    if (vt == vb) {
        return 0.5;
    }
    const double m = static_cast<double>(m_copies);
    const double t = 2 * m * vt * vb * std::log(vt / vb) / (vt - vb);
    const double ft = gamma_q(m, t / (2 * vt));
    const double fb = gamma_q(m, t / (2 * vb));
    return (1.0 - std::abs(ft - fb)) / 2;
}

double opa_homodyne_error_ideal(double n_s, double kappa_t, std::uint64_t m_copies, QuadraturePair pair) {
    check_source(n_s, m_copies);
    check_unit(kappa_t, "kappa_t");
    // The nulling gain maps the kappa_b = 1 return state to vacuum, so only
    // the target hypothesis has non-trivial quadrature statistics.
    const TwoModeState target = opa_output(n_s, kappa_t, ChannelEnv{}, nulling_gain(n_s, 1.0));
    const double e = target.e();
    const double s = target.s();
    const double c = pair == QuadraturePair::Matched ? target.c() : 0.0;
    const double mean = (e + s) / 2;
    const double radius = std::hypot((e - s) / 2, c);
    const std::array<double, 2> lambda{mean + radius, mean - radius};

    // Decide "target" iff sum_i (1/lambda_i - 1) x_i^2 < -M ln(lambda_1 lambda_2).
    const double m = static_cast<double>(m_copies);
    const double tau = -m * (std::log(lambda[0]) + std::log(lambda[1]));
    std::array<WeightedChiSquare, 2> under_background{};
    std::array<WeightedChiSquare, 2> under_target{};
    for (std::size_t i = 0; i < 2; ++i) {
        const double a = 1.0 / lambda[i] - 1.0;
        under_background[i] = {a, m};
        under_target[i] = {a * lambda[i], m};
    }
    const double fb = weighted_chi_square_cdf(under_background, tau);
    const double ft = weighted_chi_square_cdf(under_target, tau);
    return 0.5 * (fb + 1.0 - ft);
}

double nuller_miss_probability(double kappa_b, double kappa_t, double n_s, std::uint64_t m_copies) {
    check_source(n_s, m_copies);
    check_unit(kappa_b, "kappa_b");
    check_unit(kappa_t, "kappa_t");
    const double d = std::sqrt(kappa_b) - std::sqrt(kappa_t);
    return std::exp(-static_cast<double>(m_copies) * n_s * d * d);
}

double classical_unconditional_nuller(std::uint64_t m, double kappa_b, double kappa_t, double n_s,
                                      std::uint64_t m_copies) {
    if (m < 1) {
        throw DomainError("m must be >= 1");
    }
    const double p = nuller_miss_probability(kappa_b, kappa_t, n_s, m_copies);
    return static_cast<double>(m - 1) / static_cast<double>(m) * p;
}

double classical_conditional_nuller(std::uint64_t m, double kappa_b, double kappa_t, double n_s,
                                    std::uint64_t m_copies) {
    if (m < 1) {
        throw DomainError("m must be >= 1");
    }
    const double p = nuller_miss_probability(kappa_b, kappa_t, n_s, m_copies);
    const double md = static_cast<double>(m);
    if (md * p < 0.5) {
        // (1-p)^m + m p - 1 = sum_{j>=2} C(m, j) (-p)^j; terms shrink geometrically.
        double term = 1.0;
        double sum = 0.0;
        for (std::uint64_t j = 1; j <= m; ++j) {
            term *= -p * static_cast<double>(m - j + 1) / static_cast<double>(j);
            if (j >= 2) {
                sum += term;
            }
            if (j >= 2 && std::abs(term) < 1e-18 * std::abs(sum)) {
                break;
            }
        }
        return sum / md;
    }
    return (std::pow(1.0 - p, md) + md * p - 1.0) / md;
}

}  // namespace eaas
