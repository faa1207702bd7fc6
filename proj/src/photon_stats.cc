#include "eaas/photon_stats.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace eaas {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kFactorialCache = 2 * kDefaultPhotonCap + 2;

double log_factorial(std::uint64_t n) {
    static const std::vector<double> cache = [] {
        std::vector<double> v(kFactorialCache);
        for (std::size_t i = 0; i < v.size(); ++i) {
            v[i] = std::lgamma(static_cast<double>(i) + 1.0);
        }
        return v;
    }();
    if (n < cache.size()) {
        return cache[n];
    }
    return std::lgamma(static_cast<double>(n) + 1.0);
}

double log_choose(std::uint64_t n, std::uint64_t k) {
    return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

/// k * log(x) with 0 * log(0) = 0.
double xlog(std::uint64_t k, double log_x) {
    return k == 0 ? 0.0 : static_cast<double>(k) * log_x;
}

double safe_log(double x) {
    return x > 0.0 ? std::log(x) : kNegInf;
}

/// Coefficients of the generating function
///     1 / [alpha - beta u - gamma v + delta u v]
/// of the joint photon-number law (u, v mark signal and idler photons).
struct PmfCoefficients {
    double alpha;
    double beta;
    double gamma;
    double c2;  // (C/2)^2 = beta * gamma - alpha * delta
    double log_alpha;
    double log_beta;
    double log_gamma;
    double log_c2;
    PmfRegime regime;
    /// Marginal occupations below the dispatch tolerance are treated as exact vacuum.
    bool signal_vacuum;
    bool idler_vacuum;
};

PmfCoefficients coefficients(const TwoModeState &st) {
    const double e = st.e();
    const double s = st.s();
    const double cc = st.c() * st.c();
    PmfCoefficients k;
    k.alpha = ((e + 1) * (s + 1) - cc) / 4;
    k.beta = std::max(0.0, ((e - 1) * (s + 1) - cc) / 4);
    k.gamma = std::max(0.0, ((e + 1) * (s - 1) - cc) / 4);
    const double delta = ((e - 1) * (s - 1) - cc) / 4;
    k.c2 = cc / 4;

    const double scale = 0.25e-12 * (1 + e) * (1 + s);
    const bool no_beta = k.beta < scale;
    const bool no_gamma = k.gamma < scale;
    k.signal_vacuum = no_beta;
    k.idler_vacuum = no_gamma;
    if (std::abs(st.c()) < 1e-12) {
        k.regime = PmfRegime::ThermalProduct;
    } else if (no_beta && no_gamma) {
        k.regime = PmfRegime::Tmsv;
    } else if (no_gamma) {
        k.regime = PmfRegime::IdlerBounded;
    } else if (no_beta) {
        k.regime = PmfRegime::SignalBounded;
    } else if (std::abs(k.alpha * delta) < 1e-10 * k.beta * k.gamma) {
        // |1 - z| with z = c2 / (beta gamma), using beta gamma - c2 = alpha delta.
        k.regime = PmfRegime::Saturated;
    } else {
        k.regime = PmfRegime::Generic;
    }
    k.log_alpha = std::log(k.alpha);
    k.log_beta = safe_log(k.beta);
    k.log_gamma = safe_log(k.gamma);
    k.log_c2 = safe_log(k.c2);
    return k;
}

double log_thermal(double mean, std::uint64_t n) {
    mean = std::max(0.0, mean);
    if (mean == 0.0) {
        return n == 0 ? 0.0 : kNegInf;
    }
    return static_cast<double>(n) * std::log(mean / (1 + mean)) - std::log1p(mean);
}

/// Terminating form of the regularized hypergeometric expression:
///     P(a, b) = alpha^-(a+b+1) sum_k C(a,k) C(b,k) c2^k beta^(a-k) gamma^(b-k).
/// Every term is non-negative, so the sum is evaluated by log-sum-exp.
double log_generic(const PmfCoefficients &k, std::uint64_t a, std::uint64_t b) {
    const std::uint64_t top = std::min(a, b);
    double peak = kNegInf;
    auto term = [&](std::uint64_t j) {
        return log_choose(a, j) + log_choose(b, j) + xlog(j, k.log_c2) + xlog(a - j, k.log_beta) +
               xlog(b - j, k.log_gamma);
    };
    for (std::uint64_t j = 0; j <= top; ++j) {
        peak = std::max(peak, term(j));
    }
    if (peak == kNegInf) {
        return kNegInf;
    }
    double acc = 0.0;
    for (std::uint64_t j = 0; j <= top; ++j) {
        acc += std::exp(term(j) - peak);
    }
    return peak + std::log(acc) - static_cast<double>(a + b + 1) * k.log_alpha;
}

double log_pmf(const TwoModeState &st, const PmfCoefficients &k, std::uint64_t a, std::uint64_t b) {
    const double norm = static_cast<double>(a + b + 1) * k.log_alpha;
    switch (k.regime) {
        case PmfRegime::ThermalProduct:
            return log_thermal(k.signal_vacuum ? 0.0 : st.signal_mean(), a) +
                   log_thermal(k.idler_vacuum ? 0.0 : st.idler_mean(), b);
        case PmfRegime::Tmsv:
            if (a != b) {
                return kNegInf;
            }
            return static_cast<double>(a) * k.log_c2 - norm;
        case PmfRegime::IdlerBounded:
            if (b > a) {
                return kNegInf;
            }
            return log_choose(a, b) + xlog(b, k.log_c2) + xlog(a - b, k.log_beta) - norm;
        case PmfRegime::SignalBounded:
            if (a > b) {
                return kNegInf;
            }
            return log_choose(b, a) + xlog(a, k.log_c2) + xlog(b - a, k.log_gamma) - norm;
        case PmfRegime::Saturated:
            return log_choose(a + b, a) + xlog(a, k.log_beta) + xlog(b, k.log_gamma) - norm;
        case PmfRegime::Generic:
            return log_generic(k, a, b);
    }
    return kNegInf;
}

/// Smallest n with q^(n+1) <= bound for the geometric tail of a thermal mode.
std::size_t geometric_cutoff(double mean, double bound) {
    if (mean <= 0.0) {
        return 0;
    }
    const double log_q = std::log(mean / (1 + mean));
    const double n = std::ceil(std::log(bound) / log_q - 1.0);
    return n > 1e9 ? static_cast<std::size_t>(1e9) : static_cast<std::size_t>(std::max(0.0, n));
}

}  // namespace

PmfRegime classify_pmf_regime(const TwoModeState &state) {
    return coefficients(state).regime;
}

double joint_pmf_log(const TwoModeState &state, std::uint64_t n_signal, std::uint64_t n_idler) {
    return log_pmf(state, coefficients(state), n_signal, n_idler);
}

double joint_pmf_eval(const TwoModeState &state, std::uint64_t n_signal, std::uint64_t n_idler) {
    return std::exp(joint_pmf_log(state, n_signal, n_idler));
}

double thermal_pmf(double mean, std::uint64_t n) {
    return std::exp(log_thermal(mean, n));
}

JointPhotonPMF::JointPhotonPMF(const TwoModeState &state, std::size_t n_max, std::vector<double> table)
    : state_(state), n_max_(n_max), table_(std::move(table)) {
    cdf_.resize(table_.size());
    long double acc = 0.0L;
    for (std::size_t i = 0; i < table_.size(); ++i) {
        acc += table_[i];
        cdf_[i] = static_cast<double>(acc);
    }
    tail_mass_ = std::max(0.0, static_cast<double>(1.0L - acc));

    guide_.resize(table_.size());
    std::size_t j = 0;
    const double buckets = static_cast<double>(guide_.size());
    for (std::size_t i = 0; i < guide_.size(); ++i) {
        const double level = static_cast<double>(i) / buckets;
        while (j + 1 < cdf_.size() && cdf_[j] <= level) {
            ++j;
        }
        guide_[i] = static_cast<std::uint32_t>(j);
    }
}

CountPair JointPhotonPMF::sample(Rng &rng) const {
    const double u = rng.uniform();
    std::size_t j = guide_[static_cast<std::size_t>(u * static_cast<double>(guide_.size()))];
    while (j + 1 < cdf_.size() && cdf_[j] <= u) {
        ++j;
    }
    return {static_cast<std::uint32_t>(j / side()), static_cast<std::uint32_t>(j % side())};
}

CountPair joint_pmf_sample(const JointPhotonPMF &pmf, Rng &rng) {
    return pmf.sample(rng);
}

JointPhotonPMF joint_pmf_table(const TwoModeState &state, double tail_bound, std::size_t cap) {
    if (!(tail_bound > 0.0 && tail_bound < 1.0)) {
        throw DomainError("tail_bound must lie in (0, 1)");
    }
    const PmfCoefficients k = coefficients(state);
    std::size_t n_max = std::max(geometric_cutoff(state.signal_mean(), tail_bound),
                                 geometric_cutoff(state.idler_mean(), tail_bound));
    while (true) {
        if (n_max > cap) {
            throw ResourceError("joint photon table needs n_max > " + std::to_string(cap));
        }
        const std::size_t side = n_max + 1;
        std::vector<double> table(side * side);
        long double total = 0.0L;
        for (std::size_t a = 0; a < side; ++a) {
            for (std::size_t b = 0; b < side; ++b) {
                const double p = std::exp(log_pmf(state, k, a, b));
                table[a * side + b] = p;
                total += p;
            }
        }
        if (1.0L - total <= tail_bound) {
            return JointPhotonPMF(state, n_max, std::move(table));
        }
        n_max += std::max<std::size_t>(2, n_max / 8);
    }
}

}  // namespace eaas
