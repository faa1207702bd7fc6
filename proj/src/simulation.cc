#include "eaas/simulation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <string>
#include <thread>
#include <tuple>

#include "eaas/errors.h"
#include "eaas/special_functions.h"

namespace eaas {

namespace {

constexpr std::int64_t kImpossible = std::numeric_limits<std::int64_t>::min();

std::int64_t to_fixed(double log_value) {
    return static_cast<std::int64_t>(std::llround(log_value * kLogScale));
}

Decision pick(const std::vector<LogLikelihood> &scores, Rng &rng) {
    std::vector<std::size_t> best;
    const LogLikelihood *top = nullptr;
    for (std::size_t h = 0; h < scores.size(); ++h) {
        if (scores[h].impossible != 0) {
            continue;
        }
        if (top == nullptr || scores[h].scaled > top->scaled) {
            top = &scores[h];
            best.assign(1, h);
        } else if (scores[h].scaled == top->scaled) {
            best.push_back(h);
        }
    }
    if (best.empty()) {
        return {static_cast<std::size_t>(rng.below(scores.size())), true};
    }
    if (best.size() == 1) {
        return {best.front(), false};
    }
    return {best[rng.below(best.size())], false};
}

void add_weight(LogLikelihood &acc, std::optional<std::int64_t> w) {
    if (w) {
        acc.scaled += *w;
    } else {
        ++acc.impossible;
    }
}

}  // namespace

void ExperimentConfig::validate() const {
    const std::size_t m = pattern.slots();
    if (n_s_per_slot.size() != m) {
        throw DomainError("n_s_per_slot has " + std::to_string(n_s_per_slot.size()) + " entries, pattern has " +
                          std::to_string(m) + " slots");
    }
    if (gains.size() != m) {
        throw DomainError("gains has " + std::to_string(gains.size()) + " entries, pattern has " +
                          std::to_string(m) + " slots");
    }
    for (double n : n_s_per_slot) {
        if (!(n >= 0.0) || !std::isfinite(n)) {
            throw DomainError("n_s_per_slot entries must be finite and >= 0");
        }
    }
    for (double g : gains) {
        if (!(g >= 1.0) || !std::isfinite(g)) {
            throw DomainError("gains must be finite and >= 1");
        }
    }
    if (m_copies < 1) {
        throw DomainError("m_copies must be >= 1");
    }
    if (!priors.empty()) {
        if (priors.size() != pattern.hypotheses()) {
            throw DomainError("priors must have one entry per hypothesis");
        }
        double total = 0.0;
        for (double p : priors) {
            if (!(p >= 0.0)) {
                throw DomainError("priors must be >= 0");
            }
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-12) {
            throw DomainError("priors must sum to 1");
        }
    }
}

ExperimentConfig uniform_experiment(TransmissivityPattern pattern, ChannelEnv env, double n_s, double gain,
                                    std::uint64_t m_copies) {
    const std::size_t m = pattern.slots();
    ExperimentConfig cfg{std::move(pattern), env, std::vector<double>(m, n_s), std::vector<double>(m, gain),
                         m_copies, {}};
    cfg.validate();
    return cfg;
}

std::vector<double> slot_nulling_gains(const TransmissivityPattern &pattern, std::span<const double> n_s_per_slot) {
    if (n_s_per_slot.size() != pattern.slots()) {
        throw DomainError("n_s_per_slot length does not match the pattern");
    }
    std::vector<double> gains(pattern.slots());
    for (std::size_t l = 0; l < pattern.slots(); ++l) {
        double kappa = 0.0;
        for (std::size_t h = 0; h < pattern.hypotheses(); ++h) {
            kappa = std::max(kappa, pattern.kappa(h, l));
        }
        gains[l] = nulling_gain(n_s_per_slot[l], kappa).g;
    }
    return gains;
}

ErrorEstimate make_estimate(std::uint64_t errors, std::uint64_t trials, std::uint64_t seed,
                            std::uint64_t blind_guesses) {
    ErrorEstimate e;
    e.trials = trials;
    e.errors = errors;
    e.seed = seed;
    e.blind_guesses = blind_guesses;
    if (trials > 0) {
        e.p_hat = static_cast<double>(errors) / static_cast<double>(trials);
        e.std_error = std::sqrt(e.p_hat * (1.0 - e.p_hat) / static_cast<double>(trials));
    }
    return e;
}

LikelihoodModel::LikelihoodModel(const ExperimentConfig &config, double tail_bound)
    : hypotheses_(config.pattern.hypotheses()), slots_(config.pattern.slots()), m_copies_(config.m_copies) {
    config.validate();
    std::map<std::tuple<double, double, double>, std::size_t> seen;
    index_.resize(hypotheses_ * slots_);
    for (std::size_t h = 0; h < hypotheses_; ++h) {
        for (std::size_t l = 0; l < slots_; ++l) {
            const auto key = std::make_tuple(config.n_s_per_slot[l], config.pattern.kappa(h, l), config.gains[l]);
            auto it = seen.find(key);
            if (it == seen.end()) {
                const TwoModeState state =
                    opa_output(config.n_s_per_slot[l], config.pattern.kappa(h, l), config.env, Gain(config.gains[l]));
                pmfs_.push_back(joint_pmf_table(state, tail_bound));
                it = seen.emplace(key, pmfs_.size() - 1).first;
            }
            index_[h * slots_ + l] = it->second;
        }
    }

    for (const auto &p : pmfs_) {
        side_ = std::max(side_, p.side());
    }
    for (const auto &p : pmfs_) {
        std::vector<std::int64_t> logs(side_ * side_);
        for (std::size_t a = 0; a < side_; ++a) {
            for (std::size_t b = 0; b < side_; ++b) {
                const double v = joint_pmf_log(p.state(), a, b);
                logs[a * side_ + b] = std::isinf(v) ? kImpossible : to_fixed(v);
            }
        }
        log_tables_.push_back(std::move(logs));
    }

    log_priors_.resize(hypotheses_);
    for (std::size_t h = 0; h < hypotheses_; ++h) {
        const double p = config.priors.empty() ? 1.0 / static_cast<double>(hypotheses_) : config.priors[h];
        if (p > 0.0) {
            log_priors_[h] = to_fixed(std::log(p));
        }
    }

    slot_tables_.resize(slots_);
    local_.resize(hypotheses_ * slots_);
    base_local_.resize(slots_);
    for (std::size_t l = 0; l < slots_; ++l) {
        std::vector<std::size_t> uses;
        for (std::size_t h = 0; h < hypotheses_; ++h) {
            const std::size_t t = table_index(h, l);
            auto pos = std::find(slot_tables_[l].begin(), slot_tables_[l].end(), t);
            if (pos == slot_tables_[l].end()) {
                slot_tables_[l].push_back(t);
                uses.push_back(0);
                pos = slot_tables_[l].end() - 1;
            }
            const auto j = static_cast<std::size_t>(pos - slot_tables_[l].begin());
            local_[h * slots_ + l] = j;
            ++uses[j];
        }
        base_local_[l] = static_cast<std::size_t>(std::max_element(uses.begin(), uses.end()) - uses.begin());
    }
    deviations_.resize(hypotheses_);
    for (std::size_t h = 0; h < hypotheses_; ++h) {
        for (std::size_t l = 0; l < slots_; ++l) {
            if (local_table(h, l) != base_local_[l]) {
                deviations_[h].push_back(l);
            }
        }
    }
}

std::optional<std::int64_t> LikelihoodModel::log_prior(std::size_t h) const {
    return log_priors_[h];
}

std::optional<std::int64_t> LikelihoodModel::log_weight(std::size_t table, CountPair counts) const {
    if (counts.signal < side_ && counts.idler < side_) {
        const std::int64_t v = log_tables_[table][counts.signal * side_ + counts.idler];
        if (v == kImpossible) {
            return std::nullopt;
        }
        return v;
    }
    const double v = joint_pmf_log(pmfs_[table].state(), counts.signal, counts.idler);
    if (std::isinf(v)) {
        return std::nullopt;
    }
    return to_fixed(v);
}

void sample_trial_into(const LikelihoodModel &model, std::size_t true_h, Rng &rng, TrialCounts &out) {
    if (true_h >= model.hypotheses()) {
        throw DomainError("true hypothesis index out of range");
    }
    const auto m = static_cast<std::size_t>(model.m_copies());
    out.resize(model.slots() * m);
    for (std::size_t l = 0; l < model.slots(); ++l) {
        const JointPhotonPMF &pmf = model.pmf(model.table_index(true_h, l));
        for (std::size_t c = 0; c < m; ++c) {
            out[l * m + c] = pmf.sample(rng);
        }
    }
}

TrialCounts sample_trial(const LikelihoodModel &model, std::size_t true_h, Rng &rng) {
    TrialCounts out;
    sample_trial_into(model, true_h, rng, out);
    return out;
}

std::vector<LogLikelihood> hypothesis_scores(std::span<const CountPair> counts, const LikelihoodModel &model) {
    const auto m = static_cast<std::size_t>(model.m_copies());
    if (counts.size() != model.slots() * m) {
        throw DomainError("count vector has the wrong length");
    }
    std::vector<LogLikelihood> scores(model.hypotheses());
    for (std::size_t h = 0; h < model.hypotheses(); ++h) {
        add_weight(scores[h], model.log_prior(h));
        for (std::size_t l = 0; l < model.slots(); ++l) {
            const std::size_t t = model.table_index(h, l);
            for (std::size_t c = 0; c < m; ++c) {
                add_weight(scores[h], model.log_weight(t, counts[l * m + c]));
            }
        }
    }
    return scores;
}

Decision ml_decide(std::span<const CountPair> counts, const LikelihoodModel &model, Rng &rng) {
    return pick(hypothesis_scores(counts, model), rng);
}

Decision ml_decide_fast(std::span<const CountPair> counts, const LikelihoodModel &model, Rng &rng) {
    const auto m = static_cast<std::size_t>(model.m_copies());
    if (counts.size() != model.slots() * m) {
        throw DomainError("count vector has the wrong length");
    }
    std::vector<std::vector<LogLikelihood>> per_slot(model.slots());
    LogLikelihood base;
    for (std::size_t l = 0; l < model.slots(); ++l) {
        const auto tables = model.slot_tables(l);
        per_slot[l].resize(tables.size());
        for (std::size_t j = 0; j < tables.size(); ++j) {
            LogLikelihood &acc = per_slot[l][j];
            for (std::size_t c = 0; c < m; ++c) {
                add_weight(acc, model.log_weight(tables[j], counts[l * m + c]));
            }
        }
        const LogLikelihood &b = per_slot[l][model.base_local(l)];
        base.scaled += b.scaled;
        base.impossible += b.impossible;
    }
    std::vector<LogLikelihood> scores(model.hypotheses(), base);
    for (std::size_t h = 0; h < model.hypotheses(); ++h) {
        LogLikelihood &s = scores[h];
        add_weight(s, model.log_prior(h));
        for (std::size_t l : model.deviations(h)) {
            const LogLikelihood &own = per_slot[l][model.local_table(h, l)];
            const LogLikelihood &b = per_slot[l][model.base_local(l)];
            s.scaled += own.scaled - b.scaled;
            s.impossible = s.impossible + own.impossible - b.impossible;
        }
    }
    return pick(scores, rng);
}

TrialTally run_trials(const LikelihoodModel &model, std::uint64_t first, std::uint64_t last, std::uint64_t seed,
                      TruthMode truth, unsigned threads) {
    if (truth.fixed_h && *truth.fixed_h >= model.hypotheses()) {
        throw DomainError("fixed true hypothesis out of range");
    }
    if (last <= first) {
        return {};
    }
    auto work = [&](std::uint64_t lo, std::uint64_t hi) {
        TrialTally tally;
        TrialCounts counts;
        for (std::uint64_t i = lo; i < hi; ++i) {
            Rng rng = Rng::derive(seed, i);
            const std::size_t h = truth.fixed_h ? *truth.fixed_h : static_cast<std::size_t>(rng.below(model.hypotheses()));
            sample_trial_into(model, h, rng, counts);
            const Decision d = ml_decide_fast(counts, model, rng);
            ++tally.trials;
            tally.errors += d.hypothesis != h ? 1 : 0;
            tally.blind_guesses += d.blind ? 1 : 0;
        }
        return tally;
    };
    const std::uint64_t n = last - first;
    threads = std::max(1u, static_cast<unsigned>(std::min<std::uint64_t>(threads, n)));
    if (threads == 1) {
        return work(first, last);
    }
    std::vector<TrialTally> parts(threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        const std::uint64_t lo = first + n * t / threads;
        const std::uint64_t hi = first + n * (t + 1) / threads;
        pool.emplace_back([&, t, lo, hi] {
            parts[t] = work(lo, hi);
        });
    }
    for (auto &th : pool) {
        th.join();
    }
    TrialTally total;
    for (const auto &p : parts) {
        total += p;
    }
    return total;
}

ErrorEstimate estimate_error(const LikelihoodModel &model, std::uint64_t trials, std::uint64_t seed, TruthMode truth,
                             unsigned threads) {
    if (trials < 1) {
        throw DomainError("trials must be >= 1");
    }
    const TrialTally t = run_trials(model, 0, trials, seed, truth, threads);
    return make_estimate(t.errors, t.trials, seed, t.blind_guesses);
}

ErrorEstimate estimate_error(const ExperimentConfig &config, std::uint64_t trials, std::uint64_t seed,
                             TruthMode truth, unsigned threads) {
    return estimate_error(LikelihoodModel(config), trials, seed, truth, threads);
}

double standard_normal(Rng &rng) {
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

std::vector<std::vector<double>> homodyne_means(const TransmissivityPattern &pattern,
                                                std::span<const double> allocation, double n_b) {
    if (allocation.size() != pattern.slots()) {
        throw DomainError("allocation length does not match the pattern");
    }
    if (!(n_b >= 0.0)) {
        throw DomainError("n_b must be >= 0");
    }
    std::vector<std::vector<double>> mu(pattern.hypotheses(), std::vector<double>(pattern.slots()));
    for (std::size_t h = 0; h < pattern.hypotheses(); ++h) {
        for (std::size_t l = 0; l < pattern.slots(); ++l) {
            if (!(allocation[l] >= 0.0)) {
                throw DomainError("allocation entries must be >= 0");
            }
            mu[h][l] = 2.0 * std::sqrt(pattern.kappa(h, l) * allocation[l] / (1 + 2 * n_b));
        }
    }
    return mu;
}

}  // namespace

ErrorEstimate estimate_homodyne_benchmark(const TransmissivityPattern &pattern, std::span<const double> allocation,
                                          double n_b, std::uint64_t trials, std::uint64_t seed) {
    const auto mu = homodyne_means(pattern, allocation, n_b);
    const std::size_t hyps = pattern.hypotheses();
    const std::size_t m = pattern.slots();
    std::uint64_t errors = 0;
    std::vector<double> y(m);
    std::vector<std::size_t> best;
    for (std::uint64_t i = 0; i < trials; ++i) {
        Rng rng = Rng::derive(seed, i);
        const auto h = static_cast<std::size_t>(rng.below(hyps));
        for (std::size_t l = 0; l < m; ++l) {
            y[l] = mu[h][l] + standard_normal(rng);
        }
        double best_d = std::numeric_limits<double>::infinity();
        best.clear();
        for (std::size_t g = 0; g < hyps; ++g) {
            double d = 0.0;
            for (std::size_t l = 0; l < m; ++l) {
                d += (y[l] - mu[g][l]) * (y[l] - mu[g][l]);
            }
            if (d < best_d) {
                best_d = d;
                best.assign(1, g);
            } else if (d == best_d) {
                best.push_back(g);
            }
        }
        const std::size_t decided = best.size() == 1 ? best.front() : best[rng.below(best.size())];
        errors += decided != h ? 1 : 0;
    }
    return make_estimate(errors, trials, seed);
}

double homodyne_benchmark_binary(const TransmissivityPattern &pattern, std::span<const double> allocation,
                                 double n_b) {
    if (pattern.hypotheses() != 2) {
        throw DomainError("the closed-form homodyne benchmark needs exactly two hypotheses");
    }
    const auto mu = homodyne_means(pattern, allocation, n_b);
    double d2 = 0.0;
    for (std::size_t l = 0; l < pattern.slots(); ++l) {
        d2 += (mu[0][l] - mu[1][l]) * (mu[0][l] - mu[1][l]);
    }
    return normal_cdf(-std::sqrt(d2) / 2);
}

}  // namespace eaas
