#ifndef EAAS_RECEIVERS_H
#define EAAS_RECEIVERS_H

#include <cstdint>

#include "eaas/gaussian.h"

namespace eaas {

/// Error of the entanglement-assisted nulling receiver with photon counting in
/// the ideal regime (kappa_b = 1, kappa_i = 1, N_B = 0):
///     R_m [1 / (1 + N_S (1 - sqrt(kappa_t)))]^(2M),  R_1 = 1/2, R_m = (m-1)/m.
/// Throws ContractError for any other kappa_b or environment.
double ea_error_ideal(double n_s, double kappa_t, std::uint64_t m_copies, std::uint64_t m_slots,
                      double kappa_b = 1.0, const ChannelEnv &env = ChannelEnv{});

/// Quadrature variance of the Bell-receiver outputs for transmissivity kappa.
double bell_variance(double n_s, double kappa);

/// Bell (beamsplitter + dual homodyne) receiver with a chi-square threshold
/// test; noiseless channel and lossless idler.
double bell_receiver_error(double n_s, double kappa_b, double kappa_t, std::uint64_t m_copies);

enum class QuadraturePair {
    /// q on both modes (or p on both).
    Matched,
    /// q on the signal and p on the idler (or the reverse).
    Crossed,
};

/// Maximum-likelihood error of homodyne detection after the nulling
/// amplifier, for kappa_b = 1 and an ideal environment.
double opa_homodyne_error_ideal(double n_s, double kappa_t, std::uint64_t m_copies, QuadraturePair pair);

/// exp(-M N_S (sqrt(kappa_b) - sqrt(kappa_t))^2): probability that a nulled
/// coherent probe registers no click on an absorbing slot.
double nuller_miss_probability(double kappa_b, double kappa_t, double n_s, std::uint64_t m_copies);

/// Classical nuller with the same displacement on every slot: ((m-1)/m) p.
double classical_unconditional_nuller(std::uint64_t m, double kappa_b, double kappa_t, double n_s,
                                      std::uint64_t m_copies);

/// Classical nuller that stops at the first click: ((1-p)^m + m p - 1) / m.
double classical_conditional_nuller(std::uint64_t m, double kappa_b, double kappa_t, double n_s,
                                    std::uint64_t m_copies);

}  // namespace eaas

#endif
