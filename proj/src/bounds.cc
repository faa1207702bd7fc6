#include "eaas/bounds.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "eaas/errors.h"
#include "eaas/simplex.h"
#include "eaas/special_functions.h"

namespace eaas {

namespace {

double amplitude_gap2(double kappa_b, double kappa_t) {
    const double d = std::sqrt(kappa_b) - std::sqrt(kappa_t);
    return d * d;
}

void check_unit(double kappa, const char *name) {
    if (!(kappa >= 0.0 && kappa <= 1.0)) {
        throw DomainError(std::string(name) + " must lie in [0, 1]");
    }
}

void check_common(double n_s, std::uint64_t m_copies, double n_b) {
    if (!(n_s >= 0.0) || !std::isfinite(n_s)) {
        throw DomainError("n_s must be >= 0");
    }
    if (m_copies < 1) {
        throw DomainError("m_copies must be >= 1");
    }
    if (!(n_b >= 0.0) || !std::isfinite(n_b)) {
        throw DomainError("n_b must be >= 0");
    }
}

/// Per-mode passive-signature factor c of the Gaussian fidelity.
double passive_factor(const PhaseInsensitiveChannel &a, const PhaseInsensitiveChannel &b) {
    const double d = std::sqrt(a.e_noise * (1 + b.e_noise)) - std::sqrt(b.e_noise * (1 + a.e_noise));
    return 1.0 / (1.0 + d * d);
}

double exponent_rate(const PhaseInsensitiveChannel &a, const PhaseInsensitiveChannel &b) {
    return amplitude_gap2(a.mu, b.mu) / (1 + a.e_noise + b.e_noise);
}

/// Binomial coefficient as a double; exact for m <= 60.
double choose(std::uint64_t m, std::uint64_t k) {
    if (k > m) {
        return 0.0;
    }
    if (m <= 60) {
        std::uint64_t r = 1;
        k = std::min(k, m - k);
        for (std::uint64_t i = 1; i <= k; ++i) {
            r = r * (m - k + i) / i;  // exact: r * (m-k+i) is divisible by i
        }
        return static_cast<double>(r);
    }
    return std::exp(log_gamma(m + 1.0) - log_gamma(k + 1.0) - log_gamma(m - k + 1.0));
}

/// Hypothesis pairs of a pattern with their fidelity constants.
struct PairTerms {
    std::vector<std::vector<double>> rate;  // B_l per pair
    std::vector<double> log_c;              // log C per pair
    std::size_t hypotheses = 0;
    std::size_t slots = 0;
};

PairTerms pair_terms(const TransmissivityPattern &pattern, std::uint64_t m_copies, double n_b) {
    PairTerms t;
    t.hypotheses = pattern.hypotheses();
    t.slots = pattern.slots();
    for (std::size_t h = 0; h < t.hypotheses; ++h) {
        for (std::size_t g = h + 1; g < t.hypotheses; ++g) {
            std::vector<double> rate(t.slots);
            double log_c = 0.0;
            for (std::size_t l = 0; l < t.slots; ++l) {
                const auto a = PhaseInsensitiveChannel::thermal_loss(pattern.kappa(h, l), n_b);
                const auto b = PhaseInsensitiveChannel::thermal_loss(pattern.kappa(g, l), n_b);
                rate[l] = exponent_rate(a, b);
                log_c += static_cast<double>(m_copies) / 2 * std::log(passive_factor(a, b));
            }
            t.rate.push_back(std::move(rate));
            t.log_c.push_back(log_c);
        }
    }
    return t;
}

/// log of f(x) = (1/K) sum_pairs C exp(-1/2 B . x), with its gradient.
double log_objective(const PairTerms &t, const std::vector<double> &x, std::vector<double> *grad) {
    const std::size_t pairs = t.rate.size();
    std::vector<double> expo(pairs);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < pairs; ++p) {
        double dot = 0.0;
        for (std::size_t l = 0; l < t.slots; ++l) {
            dot += t.rate[p][l] * x[l];
        }
        expo[p] = t.log_c[p] - 0.5 * dot;
        peak = std::max(peak, expo[p]);
    }
    double sum = 0.0;
    for (double &e : expo) {
        e = std::exp(e - peak);
        sum += e;
    }
    if (grad != nullptr) {
        grad->assign(t.slots, 0.0);
        for (std::size_t p = 0; p < pairs; ++p) {
            const double w = expo[p] / sum;
            for (std::size_t l = 0; l < t.slots; ++l) {
                (*grad)[l] -= 0.5 * w * t.rate[p][l];
            }
        }
    }
    return peak + std::log(sum) - std::log(static_cast<double>(pairs));
}

double bound_from_log_f(std::size_t h, double log_f) {
    const double hd = static_cast<double>(h);
    const double k = hd * (hd - 1) / 2;
    return k / (hd * hd) * std::exp(2 * log_f);
}

}  // namespace

PhaseInsensitiveChannel::PhaseInsensitiveChannel(double mu, double e_noise) : mu(mu), e_noise(e_noise) {
    if (!(mu >= 0.0) || !(e_noise >= 0.0) || !std::isfinite(mu) || !std::isfinite(e_noise)) {
        throw DomainError("channel needs mu >= 0 and e_noise >= 0");
    }
}

double helstrom_binary_lb(double kappa_b, double kappa_t, double n_s, std::uint64_t m_copies, double n_b) {
    check_unit(kappa_b, "kappa_b");
    check_unit(kappa_t, "kappa_t");
    check_common(n_s, m_copies, n_b);
    const double x = static_cast<double>(m_copies) * n_s * amplitude_gap2(kappa_b, kappa_t) / (1 + 2 * n_b);
    const double overlap = std::exp(-x);
    // 1 - sqrt(1 - F) = F / (1 + sqrt(1 - F)) keeps precision when F is small.
    return 0.5 * overlap / (1.0 + std::sqrt(-std::expm1(-x)));
}

double dolinar_error(double kappa_b, double kappa_t, double n_s, std::uint64_t m_copies, double n_b) {
    return helstrom_binary_lb(kappa_b, kappa_t, n_s, m_copies, n_b);
}

double peak_weight(std::uint64_t m, std::uint64_t k) {
    if (k < 1 || k >= m) {
        throw DomainError("k-peak bound needs 1 <= k < m");
    }
    return static_cast<double>(k) * choose(m - 1, k) / (choose(m, k) - 1.0);
}

double kpeak_lb(std::uint64_t m, std::uint64_t k, double kappa_b, double kappa_t, double n_s,
                std::uint64_t m_copies, double n_b) {
    check_unit(kappa_b, "kappa_b");
    check_unit(kappa_t, "kappa_t");
    check_common(n_s, m_copies, n_b);
    const double w = peak_weight(m, k);
    const double h = choose(m, k);
    const auto bg = PhaseInsensitiveChannel::thermal_loss(kappa_b, n_b);
    const auto tg = PhaseInsensitiveChannel::thermal_loss(kappa_t, n_b);
    const double md = static_cast<double>(m_copies);
    return (h - 1) / (2 * h) * std::pow(passive_factor(bg, tg), 2 * md * w) *
           std::exp(-2 * w * md * n_s * exponent_rate(bg, tg));
}

double gaussian_fidelity_kernel(const PhaseInsensitiveChannel &a, const PhaseInsensitiveChannel &b,
                                double x_energy, std::uint64_t m_copies) {
    if (!(x_energy >= 0.0)) {
        throw DomainError("x_energy must be >= 0");
    }
    return std::pow(passive_factor(a, b), static_cast<double>(m_copies) / 2) *
           std::exp(-exponent_rate(a, b) * x_energy / 2);
}

double pattern_bound_at(const TransmissivityPattern &pattern, const std::vector<double> &allocation,
                        std::uint64_t m_copies, double n_b) {
    if (allocation.size() != pattern.slots()) {
        throw DomainError("allocation length does not match the pattern");
    }
    const PairTerms t = pair_terms(pattern, m_copies, n_b);
    return bound_from_log_f(t.hypotheses, log_objective(t, allocation, nullptr));
}

PatternBound general_lb(const TransmissivityPattern &pattern, double n_s, std::uint64_t m_copies, double n_b) {
    check_common(n_s, m_copies, n_b);
    const PairTerms t = pair_terms(pattern, m_copies, n_b);
    const std::size_t m = t.slots;
    const double budget = static_cast<double>(m) * static_cast<double>(m_copies) * n_s;

    PatternBound out;
    out.allocation.assign(m, budget / static_cast<double>(m));
    double max_rate = 0.0;
    for (const auto &r : t.rate) {
        max_rate = std::max(max_rate, *std::max_element(r.begin(), r.end()));
    }
    if (max_rate == 0.0 || budget == 0.0) {
        out.degenerate = max_rate == 0.0;
        out.probability = bound_from_log_f(t.hypotheses, log_objective(t, out.allocation, nullptr));
        return out;
    }

    std::vector<double> grad;
    std::vector<double> x = out.allocation;
    double value = log_objective(t, x, &grad);
    double grad_norm = std::sqrt(std::inner_product(grad.begin(), grad.end(), grad.begin(), 0.0));
    double step = budget / std::max(grad_norm, 1e-300);
    std::vector<double> trial(m);
    std::size_t iter = 0;
    for (; iter < 100000; ++iter) {
        double next_value = value;
        std::vector<double> next;
        bool moved = false;
        while (step > 1e-300 * budget) {
            for (std::size_t l = 0; l < m; ++l) {
                trial[l] = x[l] - step * grad[l];
            }
            next = project_onto_capped_simplex(trial, budget);
            double lin = 0.0;
            double quad = 0.0;
            for (std::size_t l = 0; l < m; ++l) {
                const double d = next[l] - x[l];
                lin += grad[l] * d;
                quad += d * d;
            }
            next_value = log_objective(t, next, nullptr);
            if (next_value <= value + lin + quad / (2 * step)) {
                moved = quad > 0.0;
                break;
            }
            step /= 2;
        }
        if (!moved) {
            break;
        }
        const double change = value - next_value;
        x = std::move(next);
        value = log_objective(t, x, &grad);
        step *= 2;
        if (std::abs(change) < 1e-12) {
            break;
        }
    }
    out.allocation = std::move(x);
    out.iterations = iter;
    out.probability = bound_from_log_f(t.hypotheses, value);
    return out;
}

double general_lb_closed(const TransmissivityPattern &pattern, double n_s, std::uint64_t m_copies, double n_b) {
    check_common(n_s, m_copies, n_b);
    const PairTerms t = pair_terms(pattern, m_copies, n_b);
    const double k = static_cast<double>(t.rate.size());
    double best_rate = 0.0;
    for (std::size_t l = 0; l < t.slots; ++l) {
        double mean_rate = 0.0;
        for (const auto &r : t.rate) {
            mean_rate += r[l];
        }
        best_rate = std::max(best_rate, mean_rate / k);
    }
    const double log_cbar = std::accumulate(t.log_c.begin(), t.log_c.end(), 0.0) / k;
    const double h = static_cast<double>(t.hypotheses);
    const double budget = static_cast<double>(t.slots) * static_cast<double>(m_copies) * n_s;
    return (h - 1) / (2 * h) * std::exp(2 * log_cbar - best_rate * budget);
}

}  // namespace eaas
