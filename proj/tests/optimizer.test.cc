#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "eaas/errors.h"
#include "eaas/optimizer.h"
#include "eaas/receivers.h"
#include "eaas/simplex.h"
#include "eaas/spectra_io.h"

using namespace eaas;

namespace {

// Two slots sharing a budget of 2: f = (exp(-x0) + exp(-3 x1)) / 2.
double toy(std::span<const double> x) {
    return 0.5 * (std::exp(-x[0]) + std::exp(-3.0 * x[1]));
}

Objective toy_objective() {
    return [](std::span<const double> x, std::uint64_t, std::uint64_t) {
        const double f = toy(x);
        return ObjectiveValue{std::log(f), f, 0.0};
    };
}

Projection toy_projection() {
    return [](std::span<const double> x) { return project_onto_simplex(x, 2.0); };
}

double sum(const std::vector<double> &v) {
    return std::accumulate(v.begin(), v.end(), 0.0);
}

}  // namespace

TEST(Optimizer, Projections) {
    const std::vector<double> x{3.0, -1.0, 0.5};
    const auto e = project_energy(x, 1.0, 3);
    EXPECT_NEAR(sum(e), 3.0, 1e-14);
    EXPECT_NEAR(e[0], 2.75, 1e-14);
    EXPECT_NEAR(e[2], 0.25, 1e-14);
    EXPECT_THROW(project_energy(x, 1.0, 2), DomainError);
    EXPECT_EQ(project_gain(std::vector<double>{0.2, 1.5, 9.0}, 4.0), (std::vector<double>{1.0, 1.5, 5.0}));
}

TEST(Optimizer, SpecValidation) {
    OptimizationSpec spec;
    EXPECT_NO_THROW(spec.validate());
    EXPECT_DOUBLE_EQ(spec.effective_gain_cap(), 4.0);
    spec.budget = 0.0;
    EXPECT_THROW(spec.validate(), DomainError);
    spec = {};
    spec.coefficients.alpha = 0.0;
    EXPECT_THROW(spec.validate(), DomainError);
    spec = {};
    spec.trials_per_eval = 0;
    EXPECT_THROW(spec.validate(), DomainError);
}

TEST(Optimizer, ConvergesOnClosedFormToy) {
    double grid_best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 200000; ++i) {
        const double x0 = 2.0 * i / 200000.0;
        const double v[] = {x0, 2.0 - x0};
        grid_best = std::min(grid_best, toy(v));
    }
    SpsaSettings settings;
    settings.iterations = 300;
    settings.diameter = 2.0 * std::sqrt(2.0);
    settings.coefficients.c0 = 0.05;
    const auto run = spsa(toy_objective(), toy_projection(), {1.0, 1.0}, settings);
    EXPECT_FALSE(run.flagged);
    EXPECT_NEAR(sum(run.best), 2.0, 1e-12);
    EXPECT_LE(run.best_value.p_hat, run.start_value.p_hat);
    EXPECT_NEAR(run.best_value.p_hat, grid_best, 1e-3);
    EXPECT_EQ(run.trace.size(), 300u);
}

TEST(Optimizer, IteratesStayFeasible) {
    SpsaSettings settings;
    settings.iterations = 50;
    settings.coefficients.a0 = 5.0;  // deliberately oversized steps
    const auto run = spsa(toy_objective(), toy_projection(), {2.0, 0.0}, settings);
    for (const auto &row : run.trace) {
        EXPECT_NEAR(sum(row.params), 2.0, 1e-12);
        for (double v : row.params) {
            EXPECT_GE(v, 0.0);
        }
    }
}

TEST(Optimizer, NonFiniteEvaluationsAreSkippedAndFlagged) {
    Objective sometimes_nan = [](std::span<const double> x, std::uint64_t, std::uint64_t) {
        const double f = toy(x);
        return ObjectiveValue{x[0] > 1.2 ? std::nan("") : std::log(f), f, 0.0};
    };
    SpsaSettings settings;
    settings.iterations = 40;
    const auto run = spsa(sometimes_nan, toy_projection(), {1.0, 1.0}, settings);
    EXPECT_TRUE(run.flagged);
    EXPECT_TRUE(std::any_of(run.trace.begin(), run.trace.end(), [](const TraceRow &r) { return r.skipped; }));
}

TEST(Optimizer, MonteCarloRunIsDeterministicAndFeasible) {
    const auto config = uniform_experiment(builtin_pattern("wine"), ChannelEnv{}, 1.0, 1.5, 3);
    OptimizationSpec spec;
    spec.target = OptimizationTarget::Both;
    spec.iterations = 8;
    spec.trials_per_eval = 1500;
    spec.seed = 17;
    const auto a = spsa_minimize(config, spec);
    const auto b = spsa_minimize(config, spec);
    EXPECT_EQ(a.energy, b.energy);
    EXPECT_EQ(a.gains, b.gains);
    EXPECT_EQ(a.best_error.errors, b.best_error.errors);
    ASSERT_EQ(a.trace.size(), 8u);
    for (std::size_t k = 0; k < a.trace.size(); ++k) {
        EXPECT_EQ(a.trace[k].params, b.trace[k].params);
        EXPECT_EQ(a.trace[k].params.size(), 8u);
        const std::vector<double> energy(a.trace[k].params.begin(), a.trace[k].params.begin() + 4);
        EXPECT_NEAR(sum(energy), 4.0, 1e-12);
        for (std::size_t l = 4; l < 8; ++l) {
            EXPECT_GE(a.trace[k].params[l], 1.0);
            EXPECT_LE(a.trace[k].params[l], 5.0);
        }
    }
    EXPECT_LE(a.best_error.p_hat, a.start_error.p_hat);
    EXPECT_EQ(a.best_error.trials, 15000u);
}

// In the ideal regime only all-dark trials are misclassified, and the decision
// then favors the least-probed slot: P_err = (sum_h q_h - max_h q_h) / m with
// q_h the all-dark probability of slot h. Uniform energy is a kink of this
// function, not a minimum, so the optimizer should leave it.
double peak_error(std::span<const double> energy, double kappa_t, std::uint64_t m_copies) {
    double total = 0.0, worst = 0.0;
    for (double n : energy) {
        const double q = std::pow(1.0 + n * (1.0 - std::sqrt(kappa_t)), -2.0 * static_cast<double>(m_copies));
        total += q;
        worst = std::max(worst, q);
    }
    return (total - worst) / static_cast<double>(energy.size());
}

TEST(Optimizer, PeakErrorFormulaMatchesMonteCarlo) {
    const std::vector<double> energy{0.2, 1.5, 1.0, 1.3};
    auto config = uniform_experiment(kpeak_patterns(4, 1, 0.75, 1.0), ChannelEnv{}, 1.0, 1.0, 5);
    config.n_s_per_slot = energy;
    config.gains = slot_nulling_gains(config.pattern, energy);
    const auto e = estimate_error(config, 40000, 6);
    const double ref = peak_error(energy, 0.75, 5);
    EXPECT_NEAR(e.p_hat, ref, 4.0 * std::sqrt(ref * (1 - ref) / 40000.0));
    const std::vector<double> uniform(4, 1.0);
    EXPECT_NEAR(peak_error(uniform, 0.75, 5), ea_error_ideal(1.0, 0.75, 5, 4), 1e-15);
}

TEST(Optimizer, SymmetricPeakImprovesOnUniform) {
    const std::uint64_t m = 5;
    auto config = uniform_experiment(kpeak_patterns(4, 1, 0.75, 1.0), ChannelEnv{}, 1.0, 1.0, m);
    config.gains = slot_nulling_gains(config.pattern, config.n_s_per_slot);
    OptimizationSpec spec;
    spec.target = OptimizationTarget::Energy;
    spec.iterations = 30;
    spec.trials_per_eval = 4000;
    spec.seed = 3;
    spec.null_gains = true;
    const auto r = spsa_minimize(config, spec);
    EXPECT_EQ(r.gains, slot_nulling_gains(config.pattern, r.energy));
    const double uniform = ea_error_ideal(1.0, 0.75, m, 4);
    const double se = std::sqrt(uniform * (1 - uniform) / static_cast<double>(r.best_error.trials));
    EXPECT_LE(r.best_error.p_hat, uniform + 3.0 * se);
    EXPECT_LT(peak_error(r.energy, 0.75, m), uniform);
}

TEST(Optimizer, GainPresetsShareTheEvaluationSeed) {
    const auto config = uniform_experiment(builtin_pattern("drug"), ChannelEnv{}, 1.0, 1.0, 2);
    OptimizationSpec spec;
    spec.iterations = 4;
    spec.trials_per_eval = 1000;
    const auto cmp = evaluate_gain_presets(config, spec, 5000);
    EXPECT_EQ(cmp.unity.seed, cmp.nulling.seed);
    EXPECT_EQ(cmp.nulling.seed, cmp.optimized.seed);
    EXPECT_EQ(cmp.nulling_gains, slot_nulling_gains(config.pattern, config.n_s_per_slot));
    EXPECT_EQ(cmp.optimized_gains.size(), 4u);
    for (double g : cmp.optimized_gains) {
        EXPECT_GE(g, 1.0);
        EXPECT_LE(g, 5.0);
    }
}

TEST(Optimizer, NullingPresetMatchesIdealFormula) {
    const TransmissivityPattern detect({{1.0}, {0.75}}, {"b", "t"});
    const auto config = uniform_experiment(detect, ChannelEnv{}, 1.0, 1.0, 10);
    OptimizationSpec spec;
    spec.iterations = 4;
    spec.trials_per_eval = 2000;
    const auto cmp = evaluate_gain_presets(config, spec, 40000);
    const double ref = ea_error_ideal(1.0, 0.75, 10, 1);
    EXPECT_NEAR(cmp.nulling.p_hat, ref, 3.0 * std::sqrt(ref * (1 - ref) / 40000.0));
}

TEST(Optimizer, TunedGainsAddLittleOverNullingUnderNoise) {
    const TransmissivityPattern detect({{1.0}, {0.75}}, {"b", "t"});
    const auto config = uniform_experiment(detect, ChannelEnv(0.1, 1.0), 1.0, 1.0, 10);
    OptimizationSpec spec;
    spec.iterations = 20;
    spec.trials_per_eval = 5000;
    spec.seed = 8;
    const auto cmp = evaluate_gain_presets(config, spec, 40000);
    EXPECT_NEAR(cmp.optimized.p_hat, cmp.nulling.p_hat,
                3.0 * std::hypot(cmp.optimized.std_error, cmp.nulling.std_error));
}
