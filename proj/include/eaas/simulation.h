#ifndef EAAS_SIMULATION_H
#define EAAS_SIMULATION_H

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "eaas/gaussian.h"
#include "eaas/pattern.h"
#include "eaas/photon_stats.h"
#include "eaas/rng.h"

namespace eaas {

/// Everything that fixes the photon-count statistics of one experiment.
struct ExperimentConfig {
    TransmissivityPattern pattern;
    ChannelEnv env;
    /// Mean signal photons per mode on each slot.
    std::vector<double> n_s_per_slot;
    /// Receiver gain on each slot.
    std::vector<double> gains;
    std::uint64_t m_copies = 1;
    /// Hypothesis priors; empty means uniform.
    std::vector<double> priors;

    /// Throws DomainError on length mismatches, negative energies, gains
    /// below 1 or priors that are not a probability vector.
    void validate() const;
};

/// Uniform source energy and gain across all slots.
ExperimentConfig uniform_experiment(TransmissivityPattern pattern, ChannelEnv env, double n_s, double gain,
                                    std::uint64_t m_copies);

/// Per-slot gain nulling the most transmissive hypothesis on that slot.
std::vector<double> slot_nulling_gains(const TransmissivityPattern &pattern, std::span<const double> n_s_per_slot);

struct ErrorEstimate {
    double p_hat = 0.0;
    double std_error = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t errors = 0;
    std::uint64_t seed = 0;
    /// Trials in which every hypothesis had zero likelihood and the decision was a uniform guess.
    std::uint64_t blind_guesses = 0;
};

ErrorEstimate make_estimate(std::uint64_t errors, std::uint64_t trials, std::uint64_t seed,
                            std::uint64_t blind_guesses = 0);

/// Log-likelihood stored in fixed point (2^-40 resolution) so that sums are
/// exact and independent of accumulation order. Impossible outcomes are
/// counted separately rather than carried as -infinity.
struct LogLikelihood {
    __int128 scaled = 0;
    std::uint64_t impossible = 0;
    bool operator==(const LogLikelihood &) const = default;
};

inline constexpr double kLogScale = 1099511627776.0;  // 2^40

/// Conditional photon-count tables for every (hypothesis, slot), with
/// deduplication of identical post-receiver states.
class LikelihoodModel {
   public:
    explicit LikelihoodModel(const ExperimentConfig &config, double tail_bound = kDefaultTailBound);

    std::size_t hypotheses() const {
        return hypotheses_;
    }
    std::size_t slots() const {
        return slots_;
    }
    std::uint64_t m_copies() const {
        return m_copies_;
    }
    std::size_t distinct_tables() const {
        return pmfs_.size();
    }
    std::size_t table_index(std::size_t h, std::size_t slot) const {
        return index_[h * slots_ + slot];
    }
    const JointPhotonPMF &pmf(std::size_t table) const {
        return pmfs_[table];
    }
    /// Shared truncation of the fixed-point log tables.
    std::size_t n_max() const {
        return side_ - 1;
    }
    /// Fixed-point log prior of hypothesis h; nullopt if the prior is zero.
    std::optional<std::int64_t> log_prior(std::size_t h) const;

    /// Fixed-point log P(counts | table); nullopt when the outcome is impossible.
    /// Counts outside the tabulated range are evaluated exactly on demand.
    std::optional<std::int64_t> log_weight(std::size_t table, CountPair counts) const;

    /// Distinct tables used at a slot, and for hypothesis h which of them it uses.
    std::span<const std::size_t> slot_tables(std::size_t slot) const {
        return slot_tables_[slot];
    }
    std::size_t local_table(std::size_t h, std::size_t slot) const {
        return local_[h * slots_ + slot];
    }
    /// Most common local table at each slot, and the slots where h departs from it.
    std::size_t base_local(std::size_t slot) const {
        return base_local_[slot];
    }
    std::span<const std::size_t> deviations(std::size_t h) const {
        return deviations_[h];
    }

   private:
    std::size_t hypotheses_;
    std::size_t slots_;
    std::uint64_t m_copies_;
    std::size_t side_ = 1;
    std::vector<JointPhotonPMF> pmfs_;
    std::vector<std::size_t> index_;
    std::vector<std::vector<std::int64_t>> log_tables_;
    std::vector<std::optional<std::int64_t>> log_priors_;
    std::vector<std::vector<std::size_t>> slot_tables_;
    std::vector<std::size_t> local_;
    std::vector<std::size_t> base_local_;
    std::vector<std::vector<std::size_t>> deviations_;
};

/// Photon counts of one trial, slot-major: counts[slot * M + copy].
using TrialCounts = std::vector<CountPair>;

/// Draws M count pairs per slot from the tables of hypothesis true_h.
TrialCounts sample_trial(const LikelihoodModel &model, std::size_t true_h, Rng &rng);
void sample_trial_into(const LikelihoodModel &model, std::size_t true_h, Rng &rng, TrialCounts &out);

struct Decision {
    std::size_t hypothesis;
    /// No hypothesis could explain the counts; the decision is a uniform guess.
    bool blind = false;
};

/// Maximum a-posteriori decision; ties are broken uniformly at random.
/// Straightforward loop over hypotheses, slots and copies.
Decision ml_decide(std::span<const CountPair> counts, const LikelihoodModel &model, Rng &rng);

/// Same decision as ml_decide, computed from per-slot sufficient statistics:
/// each distinct table is scored once per slot and hypotheses are assembled
/// from a shared baseline plus their deviating slots.
Decision ml_decide_fast(std::span<const CountPair> counts, const LikelihoodModel &model, Rng &rng);

/// Total log-likelihood of every hypothesis (including log priors).
std::vector<LogLikelihood> hypothesis_scores(std::span<const CountPair> counts, const LikelihoodModel &model);

/// How the true hypothesis of each trial is chosen.
struct TruthMode {
    static TruthMode uniform() {
        return TruthMode{};
    }
    static TruthMode fixed(std::size_t h) {
        return TruthMode{h};
    }
    std::optional<std::size_t> fixed_h;
};

struct TrialTally {
    std::uint64_t trials = 0;
    std::uint64_t errors = 0;
    std::uint64_t blind_guesses = 0;
    TrialTally &operator+=(const TrialTally &o) {
        trials += o.trials;
        errors += o.errors;
        blind_guesses += o.blind_guesses;
        return *this;
    }
};

/// Runs trials [first, last). Trial i uses Rng::derive(seed, i), so tallies of
/// disjoint ranges add up to the tally of their union for any thread count.
TrialTally run_trials(const LikelihoodModel &model, std::uint64_t first, std::uint64_t last, std::uint64_t seed,
                      TruthMode truth, unsigned threads = 1);

ErrorEstimate estimate_error(const LikelihoodModel &model, std::uint64_t trials, std::uint64_t seed,
                             TruthMode truth = TruthMode::uniform(), unsigned threads = 1);
ErrorEstimate estimate_error(const ExperimentConfig &config, std::uint64_t trials, std::uint64_t seed,
                             TruthMode truth = TruthMode::uniform(), unsigned threads = 1);

/// Standard normal draw (Box-Muller on two uniforms).
double standard_normal(Rng &rng);

/// Coherent-state homodyne benchmark: every slot receives allocation[slot]
/// photons in total over its M modes, and the per-slot summed quadrature
/// is decided by nearest mean. Uniform truth, equal priors.
ErrorEstimate estimate_homodyne_benchmark(const TransmissivityPattern &pattern, std::span<const double> allocation,
                                          double n_b, std::uint64_t trials, std::uint64_t seed);

/// Exact value of the homodyne benchmark for two hypotheses.
double homodyne_benchmark_binary(const TransmissivityPattern &pattern, std::span<const double> allocation,
                                 double n_b);

}  // namespace eaas

#endif
