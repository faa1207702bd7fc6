#include "eaas/optimizer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "eaas/errors.h"
#include "eaas/simplex.h"

namespace eaas {

namespace {

constexpr std::uint64_t kPerturbationStream = 0x5045525455524245ULL;
constexpr std::uint64_t kFinalStream = 0x46494E414C455641ULL;

std::uint64_t iteration_seed(std::uint64_t seed, std::uint64_t k) {
    return mix64(seed ^ mix64(k + 1));
}

ErrorEstimate to_estimate(const ObjectiveValue &v, std::uint64_t trials, std::uint64_t seed) {
    const auto errors = static_cast<std::uint64_t>(std::llround(v.p_hat * static_cast<double>(trials)));
    return make_estimate(errors, trials, seed);
}

}  // namespace

void OptimizationSpec::validate() const {
    if (!(budget > 0.0) || !std::isfinite(budget)) {
        throw DomainError("budget must be > 0");
    }
    if (!(effective_gain_cap() > 0.0)) {
        throw DomainError("gain_cap must be > 0");
    }
    const auto &c = coefficients;
    if (!(c.c0 > 0.0 && c.big_a >= 0.0 && c.alpha > 0.0 && c.gamma > 0.0 && c.a0 >= 0.0)) {
        throw DomainError("SPSA coefficients must be positive");
    }
    if (trials_per_eval < 1) {
        throw DomainError("trials_per_eval must be >= 1");
    }
}

std::vector<double> project_energy(std::span<const double> x, double budget, std::size_t m) {
    if (x.size() != m) {
        throw DomainError("energy vector length does not match the slot count");
    }
    return project_onto_simplex(x, static_cast<double>(m) * budget);
}

std::vector<double> project_gain(std::span<const double> g, double gain_cap) {
    std::vector<double> out(g.size());
    std::transform(g.begin(), g.end(), out.begin(), [gain_cap](double v) {
        return std::clamp(v, 1.0, 1.0 + gain_cap);
    });
    return out;
}

SpsaRun spsa(const Objective &objective, const Projection &project, std::vector<double> start,
             const SpsaSettings &settings) {
    const auto &co = settings.coefficients;
    const std::size_t n = start.size();
    std::vector<double> u = project(start);
    const std::vector<double> origin = u;

    SpsaRun run;
    std::vector<double> best_iterate = u;
    double best_seen = std::numeric_limits<double>::infinity();
    double a0 = co.a0;
    double step_scale = 1.0;
    std::vector<double> delta(n);
    std::vector<double> shifted(n);

    for (std::size_t k = 0; k < settings.iterations; ++k) {
        const double kd = static_cast<double>(k);
        const double c = co.c0 / std::pow(kd + 1.0, co.gamma);
        Rng pert = Rng::derive(settings.seed ^ kPerturbationStream, k);
        for (double &d : delta) {
            d = (pert() >> 63) != 0 ? 1.0 : -1.0;
        }
        for (std::size_t i = 0; i < n; ++i) {
            shifted[i] = u[i] + c * delta[i];
        }
        const std::vector<double> plus = project(shifted);
        for (std::size_t i = 0; i < n; ++i) {
            shifted[i] = u[i] - c * delta[i];
        }
        const std::vector<double> minus = project(shifted);

        const std::uint64_t eval_seed = iteration_seed(settings.seed, k);
        const ObjectiveValue fp = objective(plus, eval_seed, settings.trials_per_eval);
        const ObjectiveValue fm = objective(minus, eval_seed, settings.trials_per_eval);
        TraceRow row{k, u, 0.5 * (fp.value + fm.value), 0.5 * (fp.p_hat + fm.p_hat),
                     0.5 * std::hypot(fp.std_error, fm.std_error), false};
        if (!std::isfinite(fp.value) || !std::isfinite(fm.value)) {
            row.skipped = true;
            run.flagged = true;
            step_scale *= 0.5;
            run.trace.push_back(std::move(row));
            continue;
        }
        if (row.p_hat < best_seen) {
            best_seen = row.p_hat;
            best_iterate = u;
        }

        std::vector<double> grad(n);
        double norm2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            grad[i] = (fp.value - fm.value) / (2.0 * c * delta[i]);
            norm2 += grad[i] * grad[i];
        }
        if (a0 <= 0.0 && norm2 > 0.0) {
            a0 = 0.1 * settings.diameter * std::pow(co.big_a + kd + 1.0, co.alpha) / std::sqrt(norm2);
        }
        const double a = a0 > 0.0 ? step_scale * a0 / std::pow(co.big_a + kd + 1.0, co.alpha) : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            shifted[i] = u[i] - a * grad[i];
        }
        u = project(shifted);
        run.trace.push_back(std::move(row));
    }

    const std::uint64_t final_seed = mix64(settings.seed ^ kFinalStream);
    const std::uint64_t final_trials = 10 * settings.trials_per_eval;
    run.start_value = objective(origin, final_seed, final_trials);
    run.best = origin;
    run.best_value = run.start_value;
    for (const auto *candidate : {&best_iterate, &u}) {
        const ObjectiveValue v = objective(*candidate, final_seed, final_trials);
        if (v.p_hat < run.best_value.p_hat) {
            run.best_value = v;
            run.best = *candidate;
        }
    }
    return run;
}

SpsaResult spsa_minimize(const ExperimentConfig &config, const OptimizationSpec &spec) {
    config.validate();
    spec.validate();
    const std::size_t m = config.pattern.slots();
    const double budget = spec.budget;
    const double cap = spec.effective_gain_cap();
    const bool tune_energy = spec.target != OptimizationTarget::Gain;
    const bool tune_gain = spec.target != OptimizationTarget::Energy;

    const std::vector<double> energy0 = project_energy(config.n_s_per_slot, budget, m);
    const std::vector<double> gains0 = project_gain(config.gains, cap);

    // Work in normalized coordinates: energies in units of the budget, gains
    // as (G - 1) / gain_cap.
    std::vector<double> start;
    if (tune_energy) {
        for (double x : energy0) {
            start.push_back(x / budget);
        }
    }
    if (tune_gain) {
        for (double g : gains0) {
            start.push_back((g - 1.0) / cap);
        }
    }
    auto unpack = [&](std::span<const double> p, std::vector<double> &energy, std::vector<double> &gains) {
        energy = energy0;
        gains = gains0;
        std::size_t off = 0;
        if (tune_energy) {
            for (std::size_t l = 0; l < m; ++l) {
                energy[l] = p[l] * budget;
            }
            off = m;
        }
        if (tune_gain) {
            for (std::size_t l = 0; l < m; ++l) {
                gains[l] = 1.0 + p[off + l] * cap;
            }
        } else if (spec.null_gains) {
            gains = slot_nulling_gains(config.pattern, energy);
        }
    };
    Projection project = [&](std::span<const double> p) {
        std::vector<double> out(p.begin(), p.end());
        std::size_t off = 0;
        if (tune_energy) {
            const auto e = project_onto_simplex(p.subspan(0, m), static_cast<double>(m));
            std::copy(e.begin(), e.end(), out.begin());
            off = m;
        }
        if (tune_gain) {
            for (std::size_t l = 0; l < m; ++l) {
                out[off + l] = std::clamp(p[off + l], 0.0, 1.0);
            }
        }
        return out;
    };
    Objective objective = [&](std::span<const double> p, std::uint64_t seed, std::uint64_t trials) {
        ExperimentConfig cfg = config;
        unpack(p, cfg.n_s_per_slot, cfg.gains);
        const ErrorEstimate e = estimate_error(LikelihoodModel(cfg), trials, seed, TruthMode::uniform(), spec.threads);
        return ObjectiveValue{std::log(e.p_hat + 0.5 / static_cast<double>(trials)), e.p_hat, e.std_error};
    };

    SpsaSettings settings;
    settings.coefficients = spec.coefficients;
    settings.iterations = spec.iterations;
    settings.trials_per_eval = spec.trials_per_eval;
    settings.seed = spec.seed;
    const double md = static_cast<double>(m);
    settings.diameter = std::sqrt((tune_energy ? 2.0 * md * md : 0.0) + (tune_gain ? md : 0.0));

    SpsaRun run = spsa(objective, project, start, settings);

    SpsaResult out;
    unpack(run.best, out.energy, out.gains);
    const std::uint64_t final_trials = 10 * spec.trials_per_eval;
    const std::uint64_t final_seed = mix64(spec.seed ^ kFinalStream);
    out.best_error = to_estimate(run.best_value, final_trials, final_seed);
    out.start_error = to_estimate(run.start_value, final_trials, final_seed);
    out.flagged = run.flagged;
    for (auto &row : run.trace) {
        std::vector<double> energy;
        std::vector<double> gains;
        unpack(row.params, energy, gains);
        row.params.clear();
        if (tune_energy) {
            row.params.insert(row.params.end(), energy.begin(), energy.end());
        }
        if (tune_gain) {
            row.params.insert(row.params.end(), gains.begin(), gains.end());
        }
    }
    out.trace = std::move(run.trace);
    return out;
}

GainComparison evaluate_gain_presets(const ExperimentConfig &config, const OptimizationSpec &gain_spec,
                                     std::uint64_t trials) {
    GainComparison out;
    out.nulling_gains = slot_nulling_gains(config.pattern, config.n_s_per_slot);

    ExperimentConfig nulled = config;
    nulled.gains = out.nulling_gains;
    OptimizationSpec spec = gain_spec;
    spec.target = OptimizationTarget::Gain;
    // The comparison keeps the config's energies; gains are the only free variable.
    const double total = std::accumulate(config.n_s_per_slot.begin(), config.n_s_per_slot.end(), 0.0);
    spec.budget = total / static_cast<double>(config.pattern.slots());
    if (gain_spec.gain_cap <= 0.0) {
        spec.gain_cap = 4.0 * spec.budget;
    }
    const SpsaResult tuned = spsa_minimize(nulled, spec);
    out.optimized_gains = tuned.gains;

    const std::uint64_t seed = mix64(gain_spec.seed ^ kFinalStream ^ 0x47);
    auto eval = [&](const std::vector<double> &gains) {
        ExperimentConfig cfg = config;
        cfg.gains = gains;
        return estimate_error(LikelihoodModel(cfg), trials, seed, TruthMode::uniform(), gain_spec.threads);
    };
    out.unity = eval(std::vector<double>(config.pattern.slots(), 1.0));
    out.nulling = eval(out.nulling_gains);
    out.optimized = eval(out.optimized_gains);
    return out;
}

}  // namespace eaas
