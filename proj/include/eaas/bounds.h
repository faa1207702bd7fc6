#ifndef EAAS_BOUNDS_H
#define EAAS_BOUNDS_H

#include <cstdint>
#include <vector>

#include "eaas/pattern.h"

namespace eaas {

/// Single-mode phase-insensitive Gaussian channel: amplitude gain sqrt(mu)
/// and added thermal noise e_noise.
struct PhaseInsensitiveChannel {
    PhaseInsensitiveChannel(double mu, double e_noise);
    /// Thermal-loss channel with transmissivity kappa and environment noise n_b.
    static PhaseInsensitiveChannel thermal_loss(double kappa, double n_b) {
        return {kappa, n_b};
    }
    double mu;
    double e_noise;
};

/// Binary Helstrom-type classical bound
///     1/2 (1 - sqrt(1 - exp(-nu M N_S (sqrt(kappa_b) - sqrt(kappa_t))^2))),  nu = 1/(1 + 2 N_B).
/// Also the error the Dolinar receiver attains with coherent states.
double helstrom_binary_lb(double kappa_b, double kappa_t, double n_s, std::uint64_t m_copies, double n_b);

/// Error of the Dolinar receiver; identical to helstrom_binary_lb.
double dolinar_error(double kappa_b, double kappa_t, double n_s, std::uint64_t m_copies, double n_b);

/// Exponent weight k C(m-1, k) / (C(m, k) - 1) of the k-peak bound.
double peak_weight(std::uint64_t m, std::uint64_t k);

/// Classical lower bound for locating k absorbing slots among m.
double kpeak_lb(std::uint64_t m, std::uint64_t k, double kappa_b, double kappa_t, double n_s,
                std::uint64_t m_copies, double n_b);

/// Fidelity between classical-state outputs of two channels when x_energy
/// photons in total are sent through M uses: c^(M/2) exp(-B x / 2).
double gaussian_fidelity_kernel(const PhaseInsensitiveChannel &a, const PhaseInsensitiveChannel &b,
                                double x_energy, std::uint64_t m_copies);

struct PatternBound {
    double probability;
    /// Photons per slot, summed over the M probes (sum <= m M N_S).
    std::vector<double> allocation;
    /// All hypotheses are indistinguishable; the bound is the guessing floor.
    bool degenerate = false;
    std::size_t iterations = 0;
};

/// Fidelity-based lower bound for equal-prior recognition among the pattern's
/// hypotheses, minimized over energy allocations by projected gradient.
PatternBound general_lb(const TransmissivityPattern &pattern, double n_s, std::uint64_t m_copies, double n_b);

/// Looser closed form ((H-1)/(2H)) cbar^2 exp(-B* m M N_S).
double general_lb_closed(const TransmissivityPattern &pattern, double n_s, std::uint64_t m_copies, double n_b);

/// The objective of general_lb, (K/H^2) f(x)^2, at a given allocation.
double pattern_bound_at(const TransmissivityPattern &pattern, const std::vector<double> &allocation,
                        std::uint64_t m_copies, double n_b);

}  // namespace eaas

#endif
