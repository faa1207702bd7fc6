#ifndef EAAS_PHOTON_STATS_H
#define EAAS_PHOTON_STATS_H

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "eaas/gaussian.h"
#include "eaas/rng.h"

namespace eaas {

inline constexpr double kDefaultTailBound = 1e-10;
inline constexpr std::size_t kDefaultPhotonCap = 4096;

/// Which closed form joint_pmf_eval uses for a state.
enum class PmfRegime {
    /// No cross-correlation: product of two thermal laws.
    ThermalProduct,
    /// Pure two-mode squeezed vacuum: photons appear only in pairs.
    Tmsv,
    /// The signal count never exceeds the idler count.
    SignalBounded,
    /// The idler count never exceeds the signal count.
    IdlerBounded,
    /// Cross-correlation saturates its classical bound: binomial-weighted
    /// negative binomial law.
    Saturated,
    Generic,
};

PmfRegime classify_pmf_regime(const TwoModeState &state);

struct CountPair {
    std::uint32_t signal;
    std::uint32_t idler;
    bool operator==(const CountPair &) const = default;
};

/// Exact P(n_signal, n_idler) of a standard-form state.
double joint_pmf_eval(const TwoModeState &state, std::uint64_t n_signal, std::uint64_t n_idler);

/// log P(n_signal, n_idler); -infinity for impossible outcomes.
double joint_pmf_log(const TwoModeState &state, std::uint64_t n_signal, std::uint64_t n_idler);

/// Truncated joint photon-number table with an O(1) inverse-CDF sampler.
class JointPhotonPMF {
   public:
    const TwoModeState &state() const {
        return state_;
    }
    /// Largest tabulated count on either mode.
    std::size_t n_max() const {
        return n_max_;
    }
    std::size_t side() const {
        return n_max_ + 1;
    }
    /// 1 - sum(table) >= 0.
    double tail_mass() const {
        return tail_mass_;
    }
    double at(std::size_t n_signal, std::size_t n_idler) const {
        return table_[n_signal * side() + n_idler];
    }
    /// Row-major (signal, idler) probabilities.
    std::span<const double> table() const {
        return table_;
    }

    /// Inverse-CDF draw over the row-major table. The tail mass is assigned
    /// to the cell (n_max, n_max).
    CountPair sample(Rng &rng) const;

   private:
    friend JointPhotonPMF joint_pmf_table(const TwoModeState &, double, std::size_t);
    JointPhotonPMF(const TwoModeState &state, std::size_t n_max, std::vector<double> table);

    TwoModeState state_;
    std::size_t n_max_;
    double tail_mass_;
    std::vector<double> table_;
    std::vector<double> cdf_;
    std::vector<std::uint32_t> guide_;
};

/// Tabulates the PMF, growing n_max until the omitted mass is at most tail_bound.
/// Throws ResourceError if that needs n_max > cap.
JointPhotonPMF joint_pmf_table(const TwoModeState &state, double tail_bound = kDefaultTailBound,
                               std::size_t cap = kDefaultPhotonCap);

CountPair joint_pmf_sample(const JointPhotonPMF &pmf, Rng &rng);

/// Thermal (geometric) law with the given mean photon number.
double thermal_pmf(double mean, std::uint64_t n);

/// Brute-force P(n_signal, n_idler) for 0 <= n <= n_max, computed in a
/// truncated Fock basis from the Williamson decomposition of the state
/// (two thermal modes through a two-mode squeezer). Row-major, size
/// (n_max+1)^2. Throws DomainError if the truncated table misses more than
/// 1e-6 of the probability mass.
std::vector<double> fock_oracle(const TwoModeState &state, std::size_t n_max);

/// Real symmetric density matrix of the state on the basis |n_signal, n_idler>,
/// 0 <= n <= cutoff, row-major with index n_signal * (cutoff+1) + n_idler.
std::vector<double> fock_density_matrix(const TwoModeState &state, std::size_t cutoff);

}  // namespace eaas

#endif
