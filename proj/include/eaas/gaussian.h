#ifndef EAAS_GAUSSIAN_H
#define EAAS_GAUSSIAN_H

#include <cstdint>

#include "eaas/errors.h"

namespace eaas {

/// Tolerance on symplectic eigenvalues (and marginal variances) below the vacuum value 1.
inline constexpr double kPhysicalityTol = 1e-9;

/// Mean signal photon number per mode and number of identical probe copies M.
struct SourceParams {
    SourceParams(double n_s, std::uint64_t m_copies);
    double n_s;
    std::uint64_t m_copies;
};

/// Environment of the signal and idler arms: thermal noise N_B on the signal
/// channel and transmissivity kappa_I of the idler storage.
struct ChannelEnv {
    ChannelEnv(double n_b = 0.0, double kappa_i = 1.0);
    bool ideal() const {
        return n_b == 0.0 && kappa_i == 1.0;
    }
    double n_b;
    double kappa_i;
};

/// Two-mode squeezer gain G >= 1.
struct Gain {
    explicit Gain(double g);
    double g;
};

/// Zero-mean two-mode Gaussian state in standard form.
///
/// Covariance (quadrature order q_S, p_S, q_I, p_I, vacuum variance 1):
///
///     [ e*I   c*Z ]
///     [ c*Z   s*I ]
///
/// with Z = diag(1, -1). Construction rejects states whose symplectic
/// eigenvalues fall below 1 - kPhysicalityTol.
class TwoModeState {
   public:
    TwoModeState(double e, double s, double c);

    double e() const {
        return e_;
    }
    double s() const {
        return s_;
    }
    double c() const {
        return c_;
    }
    /// Mean photon numbers of the signal and idler marginals.
    double signal_mean() const {
        return (e_ - 1.0) / 2.0;
    }
    double idler_mean() const {
        return (s_ - 1.0) / 2.0;
    }

    bool operator==(const TwoModeState &) const = default;

   private:
    double e_;
    double s_;
    double c_;
};

struct SymplecticSpectrum {
    double nu_minus;
    double nu_plus;
    /// False when nu_minus < 1 - kPhysicalityTol.
    bool physical;
};

/// Symplectic eigenvalues of a standard-form covariance. Does not throw on
/// unphysical input; the result is flagged instead.
SymplecticSpectrum symplectic_eigenvalues(double e, double s, double c);
SymplecticSpectrum symplectic_eigenvalues(const TwoModeState &state);

/// Two-mode squeezed vacuum with n_s photons per mode.
TwoModeState tmsv_state(double n_s);

/// Signal through a thermal-loss channel (kappa_s, N_B); idler through a pure
/// loss channel kappa_I.
TwoModeState return_state(double n_s, double kappa_s, const ChannelEnv &env);

/// Applies the receiver two-mode squeezer
///     a_S -> sqrt(G) a_S - sqrt(G-1) a_I^dag,   a_I -> sqrt(G) a_I - sqrt(G-1) a_S^dag.
/// G = 1 is the identity.
TwoModeState apply_opa(const TwoModeState &state, Gain gain);

/// Inverse of apply_opa with the same gain.
TwoModeState apply_inverse_opa(const TwoModeState &state, Gain gain);

/// Post-receiver state for one signal-idler pair: apply_opa(return_state(...), gain).
TwoModeState opa_output(double n_s, double kappa_s, const ChannelEnv &env, Gain gain);

/// Gain that maps the signal mode of the kappa_b return state to vacuum when
/// the idler is lossless and the channel noiseless:
///     G = 1 + n_s kappa_b / (1 + n_s (1 - kappa_b)).
Gain nulling_gain(double n_s, double kappa_b);

/// Gain in [1, 1 + 10 n_s] minimizing the post-receiver signal occupation
/// (E - 1)/2, located by golden-section search.
Gain min_signal_gain(double n_s, double kappa_s, const ChannelEnv &env);

struct ChernoffBound {
    /// inf_s Tr rho^s sigma^(1-s) for a single copy.
    double q_tilde;
    /// Location of the infimum.
    double s_star;
    /// q_tilde^M / 2.
    double bound;
};

/// Single-copy Chernoff overlap Tr rho^s sigma^(1-s) between two standard-form states.
double chernoff_overlap(const TwoModeState &rho, const TwoModeState &sigma, double s);

/// Quantum Chernoff bound on the symmetric binary error with M copies.
ChernoffBound qcb(const TwoModeState &state_t, const TwoModeState &state_b, std::uint64_t m_copies);

}  // namespace eaas

#endif
