#ifndef EAAS_OPTIMIZER_H
#define EAAS_OPTIMIZER_H

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "eaas/simulation.h"

namespace eaas {

enum class OptimizationTarget { Energy, Gain, Both };

/// Gain sequences a_k = a0 / (A + k + 1)^alpha and c_k = c0 / (k + 1)^gamma.
/// a0 <= 0 selects a0 so that the first step covers 10% of the feasible diameter.
/// Step and perturbation sizes are in units of the budget (energies) and of
/// gain_cap (gains).
struct SpsaCoefficients {
    double a0 = 0.0;
    double c0 = 0.1;
    double big_a = 10.0;
    double alpha = 0.602;
    double gamma = 0.101;
};

struct OptimizationSpec {
    OptimizationTarget target = OptimizationTarget::Energy;
    /// Mean photons per slot; energies satisfy sum = m * budget.
    double budget = 1.0;
    /// Gains are kept in [1, 1 + gain_cap]; <= 0 selects 4 * budget.
    double gain_cap = 0.0;
    std::size_t iterations = 100;
    SpsaCoefficients coefficients;
    std::uint64_t trials_per_eval = 10000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    /// With target Energy, re-derive the per-slot nulling gains from the
    /// current energies instead of holding the config's gains fixed.
    bool null_gains = false;

    double effective_gain_cap() const {
        return gain_cap > 0.0 ? gain_cap : 4.0 * budget;
    }
    void validate() const;
};

/// Euclidean projection onto {x >= 0, sum(x) = m * budget}.
std::vector<double> project_energy(std::span<const double> x, double budget, std::size_t m);

/// Componentwise clamp to [1, 1 + gain_cap].
std::vector<double> project_gain(std::span<const double> g, double gain_cap);

struct ObjectiveValue {
    /// Quantity the optimizer descends.
    double value;
    /// Error probability behind the value (equal to value for closed forms).
    double p_hat;
    double std_error;
};

/// Objective evaluated at params with a given Monte-Carlo seed and trial count.
using Objective = std::function<ObjectiveValue(std::span<const double> params, std::uint64_t seed,
                                               std::uint64_t trials)>;
using Projection = std::function<std::vector<double>(std::span<const double>)>;

struct SpsaSettings {
    SpsaCoefficients coefficients;
    std::size_t iterations = 100;
    std::uint64_t trials_per_eval = 10000;
    std::uint64_t seed = 1;
    /// Diameter of the feasible set, used to size the first step.
    double diameter = 1.0;
};

struct TraceRow {
    std::size_t iteration;
    std::vector<double> params;
    double objective;
    double p_hat;
    double std_error;
    bool skipped;
};

struct SpsaRun {
    std::vector<double> best;
    ObjectiveValue best_value;
    /// Start point re-evaluated alongside the candidates.
    ObjectiveValue start_value;
    std::vector<TraceRow> trace;
    /// Some iteration produced a non-finite objective and was skipped.
    bool flagged = false;
};

/// Projected SPSA with Rademacher perturbations and common random numbers
/// within each +/- pair. The returned point is the best of {start, best
/// iterate, final iterate} re-evaluated at 10x trials_per_eval.
SpsaRun spsa(const Objective &objective, const Projection &project, std::vector<double> start,
             const SpsaSettings &settings);

struct SpsaResult {
    std::vector<double> energy;
    std::vector<double> gains;
    ErrorEstimate best_error;
    ErrorEstimate start_error;
    std::vector<TraceRow> trace;
    bool flagged = false;
};

/// Optimizes per-slot energies and/or gains of the config against the
/// Monte-Carlo error. The config supplies the starting point; energies are
/// first projected onto the budget.
SpsaResult spsa_minimize(const ExperimentConfig &config, const OptimizationSpec &spec);

struct GainComparison {
    ErrorEstimate unity;
    ErrorEstimate nulling;
    ErrorEstimate optimized;
    std::vector<double> nulling_gains;
    std::vector<double> optimized_gains;
};

/// Error at G = 1, at the per-slot nulling gains, and at SPSA-optimized gains
/// (started from the nulling gains), all evaluated with the same seed.
GainComparison evaluate_gain_presets(const ExperimentConfig &config, const OptimizationSpec &gain_spec,
                                     std::uint64_t trials);

}  // namespace eaas

#endif
