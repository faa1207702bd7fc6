#include "eaas/special_functions.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include "eaas/errors.h"

namespace eaas {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Series for P(a, x); converges quickly for x < a + 1.
double lower_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 100000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEps) {
            break;
        }
    }
    return sum * std::exp(a * std::log(x) - x - log_gamma(a));
}

/// Modified Lentz continued fraction for Q(a, x); converges for x > a + 1.
double upper_fraction(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 100000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) {
            d = tiny;
        }
        c = b + an / c;
        if (std::abs(c) < tiny) {
            c = tiny;
        }
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEps) {
            break;
        }
    }
    return std::exp(a * std::log(x) - x - log_gamma(a)) * h;
}

void check_gamma_args(double a, double x) {
    if (!(a > 0.0) || !(x >= 0.0)) {
        throw DomainError("incomplete gamma needs a > 0 and x >= 0");
    }
}

}  // namespace

double log_gamma(double x) {
#if defined(__GLIBC__)
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

double gamma_p(double a, double x) {
    check_gamma_args(a, x);
    if (x == 0.0) {
        return 0.0;
    }
    return x < a + 1.0 ? lower_series(a, x) : 1.0 - upper_fraction(a, x);
}

double gamma_q(double a, double x) {
    check_gamma_args(a, x);
    if (x == 0.0) {
        return 1.0;
    }
    return x < a + 1.0 ? 1.0 - lower_series(a, x) : upper_fraction(a, x);
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double weighted_chi_square_cdf(std::span<const WeightedChiSquare> terms, double x, double abs_tol) {
    // Imhof: P(Q > x) = 1/2 + (1/pi) int_0^inf sin(phi(u) - x u / 2) / (u rho(u)) du with
    // phi(u) = sum k/2 atan(w u) and rho(u) = prod (1 + w^2 u^2)^(k/4).
    // Expanding the sine separates a smooth envelope from a pure Fourier kernel,
    // which the Ooura double-exponential rules integrate to the upper limit.
    bool any = false;
    for (const auto &t : terms) {
        any = any || (t.weight != 0.0 && t.dof > 0.0);
    }
    if (!any) {
        return x >= 0.0 ? 1.0 : 0.0;
    }
    auto phase = [&](double u) {
        double phi = 0.0;
        for (const auto &t : terms) {
            phi += t.dof / 2 * std::atan(t.weight * u);
        }
        return phi;
    };
    auto inv_u_rho = [&](double u) {
        double log_rho = 0.0;
        for (const auto &t : terms) {
            log_rho += t.dof / 4 * std::log1p(t.weight * t.weight * u * u);
        }
        return std::exp(-log_rho) / u;
    };
    // sin(phi(u)) / u -> phi'(0) as u -> 0; evaluating the quotient there would overflow.
    auto sin_part = [&](double u) {
        if (u < 1e-100) {
            double d = 0.0;
            for (const auto &t : terms) {
                d += t.dof * t.weight / 2;
            }
            return d;
        }
        return std::sin(phase(u)) * inv_u_rho(u);
    };
    auto cos_part = [&](double u) {
        return std::cos(phase(u)) * inv_u_rho(u);
    };

    const double tol = std::max(abs_tol, 1e-14);
    double integral = 0.0;
    if (x == 0.0) {
        boost::math::quadrature::exp_sinh<double> rule;
        integral = rule.integrate(sin_part, 0.0, std::numeric_limits<double>::infinity(), tol);
    } else {
        const double omega = std::abs(x) / 2;
        thread_local boost::math::quadrature::ooura_fourier_sin<double> sin_rule(tol);
        thread_local boost::math::quadrature::ooura_fourier_cos<double> cos_rule(tol);
        const double a = cos_rule.integrate(sin_part, omega).first;
        const double b = sin_rule.integrate(cos_part, omega).first;
        integral = x > 0.0 ? a - b : a + b;
    }
    const double upper_tail = 0.5 + integral / std::numbers::pi;
    return std::clamp(1.0 - upper_tail, 0.0, 1.0);
}

}  // namespace eaas
