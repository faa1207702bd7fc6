#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include "eaas/bounds.h"
#include "eaas/cli.h"
#include "eaas/gaussian.h"
#include "eaas/receivers.h"
#include "eaas/simulation.h"

namespace eaas::cli {

namespace {

using nlohmann::json;
using Row = std::vector<std::string>;

std::string cell(std::uint64_t v) {
    return std::to_string(v);
}

std::string cell(std::optional<double> v) {
    return v ? format_double(*v) : std::string();
}

std::string iso_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string render_table(Command command, const Row &header, const std::vector<Row> &rows) {
    std::ostringstream out;
    out << "# eaas-results v1 " << command_name(command) << '\n';
    auto line = [&](const Row &r) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            out << (i ? "," : "") << r[i];
        }
        out << '\n';
    };
    line(header);
    for (const auto &r : rows) {
        line(r);
    }
    return out.str();
}

/// Seed of one sweep point; depends on the point's M so that editing the
/// sweep list leaves the other points unchanged.
std::uint64_t point_seed(std::uint64_t seed, std::uint64_t m_copies) {
    return mix64(seed ^ mix64(m_copies));
}

constexpr std::uint64_t kBenchmarkStream = 0x686f6d6f64796e65ULL;

/// Completed rows and the partial tally of the point in progress, persisted
/// so an interrupted sweep resumes where it stopped.
class Checkpoint {
   public:
    Checkpoint(std::filesystem::path path, std::string fingerprint, std::ostream &log)
        : path_(std::move(path)), fingerprint_(std::move(fingerprint)) {
        std::ifstream in(path_);
        if (!in) {
            return;
        }
        try {
            const json j = json::parse(in);
            if (j.at("fingerprint").get<std::string>() != fingerprint_) {
                log << "ignoring checkpoint from a different config\n";
                return;
            }
            rows_ = j.at("rows").get<std::vector<Row>>();
            const auto &p = j.at("partial");
            partial_point_ = p.at("point").get<std::size_t>();
            partial_.trials = p.at("trials").get<std::uint64_t>();
            partial_.errors = p.at("errors").get<std::uint64_t>();
            partial_.blind_guesses = p.at("blind").get<std::uint64_t>();
            log << "resuming from checkpoint: " << rows_.size() << " completed points\n";
        } catch (const json::exception &) {
            log << "ignoring unreadable checkpoint\n";
            rows_.clear();
            partial_ = {};
        }
    }

    std::size_t completed() const {
        return rows_.size();
    }
    const std::vector<Row> &rows() const {
        return rows_;
    }

    void finish_point(Row row) {
        rows_.push_back(std::move(row));
        partial_ = {};
        save();
    }

    /// Trials [0, total) of one point in chunks, checkpointing between chunks.
    TrialTally monte_carlo(const LikelihoodModel &model, std::uint64_t total, std::uint64_t seed,
                           unsigned threads) {
        TrialTally tally;
        if (partial_point_ == rows_.size() && partial_.trials <= total) {
            tally = partial_;
        }
        while (tally.trials < total) {
            const std::uint64_t last = std::min(total, tally.trials + kCheckpointTrials);
            tally += run_trials(model, tally.trials, last, seed, TruthMode::uniform(), threads);
            partial_ = tally;
            partial_point_ = rows_.size();
            if (tally.trials < total) {
                save();
            }
        }
        return tally;
    }

    void remove() const {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }

   private:
    void save() const {
        json j;
        j["fingerprint"] = fingerprint_;
        j["rows"] = rows_;
        j["partial"] = {{"point", partial_point_},
                        {"trials", partial_.trials},
                        {"errors", partial_.errors},
                        {"blind", partial_.blind_guesses}};
        write_atomically(path_, j.dump());
    }

    std::filesystem::path path_;
    std::string fingerprint_;
    std::vector<Row> rows_;
    std::size_t partial_point_ = 0;
    TrialTally partial_;
};

std::vector<double> receiver_gains(const RunConfig &cfg, const TransmissivityPattern &pattern,
                                   const std::vector<double> &energy) {
    switch (cfg.gain.mode) {
        case GainMode::Nulling:
            return slot_nulling_gains(pattern, energy);
        case GainMode::Unity:
            return std::vector<double>(pattern.slots(), 1.0);
        case GainMode::Fixed:
            break;
    }
    return std::vector<double>(pattern.slots(), cfg.gain.value);
}

ExperimentConfig experiment(const RunConfig &cfg, std::uint64_t m_copies) {
    const auto &pattern = *cfg.pattern;
    ExperimentConfig e{pattern, ChannelEnv(cfg.physics.n_b, cfg.physics.kappa_i),
                       std::vector<double>(pattern.slots(), cfg.physics.n_s), {}, m_copies, {}};
    e.gains = receiver_gains(cfg, pattern, e.n_s_per_slot);
    return e;
}

bool ideal_nulling(const RunConfig &cfg) {
    return cfg.physics.kappa_b == 1.0 && cfg.physics.kappa_i == 1.0 && cfg.physics.n_b == 0.0 &&
           cfg.gain.mode == GainMode::Nulling;
}

struct MonteCarloCells {
    std::string p_hat, std_error, trials;
    std::uint64_t blind = 0;
};

MonteCarloCells simulate(const RunConfig &cfg, std::uint64_t m_copies, Checkpoint &checkpoint) {
    const LikelihoodModel model(experiment(cfg, m_copies));
    const std::uint64_t seed = point_seed(cfg.seed, m_copies);
    const TrialTally t = checkpoint.monte_carlo(model, cfg.trials, seed, cfg.threads);
    const ErrorEstimate e = make_estimate(t.errors, t.trials, seed, t.blind_guesses);
    return {format_double(e.p_hat), format_double(e.std_error), cell(e.trials), e.blind_guesses};
}

struct Sweep {
    Row header;
    std::function<Row(std::uint64_t m_copies, Checkpoint &)> point;
};

Sweep detect_sweep(const RunConfig &cfg) {
    const Physics ph = cfg.physics;
    const ChannelEnv env(ph.n_b, ph.kappa_i);
    const bool ideal_env = env.ideal();
    Row header{"m_copies",    "ea_error",  "ea_std_error",   "ea_trials",      "ea_ideal",
               "helstrom_lb", "qcb",       "bell_error",     "opa_homodyne_qq", "opa_homodyne_qp",
               "gain",        "blind_guesses"};
    auto point = [cfg, ph, env, ideal_env](std::uint64_t m, Checkpoint &ck) {
        const auto mc = simulate(cfg, m, ck);
        const auto gains = receiver_gains(cfg, *cfg.pattern, {ph.n_s});
        std::optional<double> ideal, bell, qq, qp;
        if (ideal_nulling(cfg)) {
            ideal = ea_error_ideal(ph.n_s, ph.kappa_t, m, 1);
        }
        if (ideal_env) {
            bell = bell_receiver_error(ph.n_s, ph.kappa_b, ph.kappa_t, m);
            if (ph.kappa_b == 1.0) {
                qq = opa_homodyne_error_ideal(ph.n_s, ph.kappa_t, m, QuadraturePair::Matched);
                qp = opa_homodyne_error_ideal(ph.n_s, ph.kappa_t, m, QuadraturePair::Crossed);
            }
        }
        const double helstrom = helstrom_binary_lb(ph.kappa_b, ph.kappa_t, ph.n_s, m, ph.n_b);
        const double chernoff =
            qcb(return_state(ph.n_s, ph.kappa_t, env), return_state(ph.n_s, ph.kappa_b, env), m).bound;
        return Row{cell(m),           mc.p_hat,          mc.std_error,          mc.trials,
                   cell(ideal),       format_double(helstrom), format_double(chernoff), cell(bell),
                   cell(qq),          cell(qp),          format_double(gains.front()), cell(mc.blind)};
    };
    return {header, point};
}

Sweep position_sweep(const RunConfig &cfg) {
    const Physics ph = cfg.physics;
    Row header{"m_copies",   "ea_error",   "ea_std_error", "ea_trials", "ea_ideal", "kpeak_lb",
               "classical_unconditional_nuller", "classical_conditional_nuller", "homodyne_error",
               "homodyne_std_error", "blind_guesses"};
    auto point = [cfg, ph](std::uint64_t m, Checkpoint &ck) {
        const auto mc = simulate(cfg, m, ck);
        std::optional<double> ideal, unconditional, conditional;
        if (cfg.k_peaks == 1) {
            if (ideal_nulling(cfg)) {
                ideal = ea_error_ideal(ph.n_s, ph.kappa_t, m, cfg.m_slots);
            }
            unconditional = classical_unconditional_nuller(cfg.m_slots, ph.kappa_b, ph.kappa_t, ph.n_s, m);
            conditional = classical_conditional_nuller(cfg.m_slots, ph.kappa_b, ph.kappa_t, ph.n_s, m);
        }
        const double lb = kpeak_lb(cfg.m_slots, cfg.k_peaks, ph.kappa_b, ph.kappa_t, ph.n_s, m, ph.n_b);
        const std::vector<double> alloc(cfg.m_slots, static_cast<double>(m) * ph.n_s);
        const auto hom = estimate_homodyne_benchmark(*cfg.pattern, alloc, ph.n_b, cfg.trials,
                                                     point_seed(cfg.seed, m) ^ kBenchmarkStream);
        return Row{cell(m),         mc.p_hat,         mc.std_error,           mc.trials,
                   cell(ideal),     format_double(lb), cell(unconditional),    cell(conditional),
                   format_double(hom.p_hat), format_double(hom.std_error), cell(mc.blind)};
    };
    return {header, point};
}

Sweep recognize_sweep(const RunConfig &cfg) {
    const Physics ph = cfg.physics;
    Row header{"m_copies",  "ea_error",          "ea_std_error",   "ea_trials",          "general_lb",
               "general_lb_closed", "homodyne_error", "homodyne_std_error", "homodyne_exact", "blind_guesses"};
    auto point = [cfg, ph](std::uint64_t m, Checkpoint &ck) {
        const auto &pattern = *cfg.pattern;
        const auto mc = simulate(cfg, m, ck);
        const auto lb = general_lb(pattern, ph.n_s, m, ph.n_b);
        const double closed = general_lb_closed(pattern, ph.n_s, m, ph.n_b);
        const std::vector<double> alloc(pattern.slots(), static_cast<double>(m) * ph.n_s);
        const auto hom = estimate_homodyne_benchmark(pattern, alloc, ph.n_b, cfg.trials,
                                                     point_seed(cfg.seed, m) ^ kBenchmarkStream);
        std::optional<double> exact;
        if (pattern.hypotheses() == 2) {
            exact = homodyne_benchmark_binary(pattern, alloc, ph.n_b);
        }
        return Row{cell(m),
                   mc.p_hat,
                   mc.std_error,
                   mc.trials,
                   format_double(lb.probability),
                   format_double(closed),
                   format_double(hom.p_hat),
                   format_double(hom.std_error),
                   cell(exact),
                   cell(mc.blind)};
    };
    return {header, point};
}

Sweep bounds_sweep(const RunConfig &cfg) {
    const Physics ph = cfg.physics;
    const std::size_t slots = cfg.pattern->slots();
    Row header{"m_copies", "general_lb", "uniform_bound", "general_lb_closed", "degenerate", "iterations"};
    for (std::size_t l = 0; l < slots; ++l) {
        header.push_back("allocation_" + std::to_string(l));
    }
    auto point = [cfg, ph, slots](std::uint64_t m, Checkpoint &) {
        const auto &pattern = *cfg.pattern;
        const auto lb = general_lb(pattern, ph.n_s, m, ph.n_b);
        const std::vector<double> uniform(slots, static_cast<double>(m) * ph.n_s);
        Row row{cell(m),
                format_double(lb.probability),
                format_double(pattern_bound_at(pattern, uniform, m, ph.n_b)),
                format_double(general_lb_closed(pattern, ph.n_s, m, ph.n_b)),
                lb.degenerate ? "1" : "0",
                cell(static_cast<std::uint64_t>(lb.iterations))};
        for (double a : lb.allocation) {
            row.push_back(format_double(a));
        }
        return row;
    };
    return {header, point};
}

bool row_finite(const Row &row) {
    for (const auto &c : row) {
        if (c == "nan" || c == "-nan" || c == "inf" || c == "-inf") {
            return false;
        }
    }
    return true;
}

struct Outputs {
    std::vector<std::string> files;
    bool flagged = false;
};

Outputs run_sweep(const RunConfig &cfg, const Sweep &sweep, const std::filesystem::path &out_dir, std::ostream &log) {
    Checkpoint checkpoint(out_dir / "checkpoint.json", cfg.resolved.dump(), log);
    for (std::size_t i = checkpoint.completed(); i < cfg.m_copies.size(); ++i) {
        const auto m = cfg.m_copies[i];
        log << command_name(cfg.command) << ": M = " << m << '\n';
        Row row = sweep.point(m, checkpoint);
        if (!row_finite(row)) {
            throw std::runtime_error("non-finite value at M = " + std::to_string(m));
        }
        checkpoint.finish_point(std::move(row));
    }
    write_atomically(out_dir / "results.csv", render_table(cfg.command, sweep.header, checkpoint.rows()));
    checkpoint.remove();
    return {{"results.csv"}, false};
}

Outputs run_optimize(const RunConfig &cfg, const std::filesystem::path &out_dir, std::ostream &log) {
    const auto &pattern = *cfg.pattern;
    const std::size_t slots = pattern.slots();
    const auto target = cfg.optimize.target;
    const bool energy = target != OptimizationTarget::Gain;
    const bool gain = target != OptimizationTarget::Energy;

    Row trace_header{"m_copies", "iteration", "objective", "p_hat", "std_error", "skipped"};
    for (std::size_t l = 0; energy && l < slots; ++l) {
        trace_header.push_back("energy_" + std::to_string(l));
    }
    for (std::size_t l = 0; gain && l < slots; ++l) {
        trace_header.push_back("gain_" + std::to_string(l));
    }
    Row cmp_header{"m_copies", "preset", "p_hat", "std_error", "trials"};
    for (std::size_t l = 0; l < slots; ++l) {
        cmp_header.push_back("energy_" + std::to_string(l));
    }
    for (std::size_t l = 0; l < slots; ++l) {
        cmp_header.push_back("gain_" + std::to_string(l));
    }

    std::vector<Row> trace;
    std::vector<Row> comparison;
    bool flagged = false;
    auto preset_row = [&](std::uint64_t m, const std::string &name, const ErrorEstimate &e,
                          const std::vector<double> &en, const std::vector<double> &g) {
        Row r{cell(m), name, format_double(e.p_hat), format_double(e.std_error), cell(e.trials)};
        for (double v : en) {
            r.push_back(format_double(v));
        }
        for (double v : g) {
            r.push_back(format_double(v));
        }
        comparison.push_back(std::move(r));
    };

    for (const auto m : cfg.m_copies) {
        log << "optimize: M = " << m << '\n';
        ExperimentConfig exp = experiment(cfg, m);
        exp.n_s_per_slot.assign(slots, cfg.optimize.budget);
        exp.gains = receiver_gains(cfg, pattern, exp.n_s_per_slot);
        OptimizationSpec spec = cfg.optimize;
        spec.seed = point_seed(cfg.seed, m);
        spec.null_gains = cfg.gain.mode == GainMode::Nulling;
        const SpsaResult r = spsa_minimize(exp, spec);
        flagged = flagged || r.flagged;
        for (const auto &t : r.trace) {
            Row row{cell(m), cell(static_cast<std::uint64_t>(t.iteration)), format_double(t.objective),
                    format_double(t.p_hat), format_double(t.std_error), t.skipped ? "1" : "0"};
            for (double v : t.params) {
                row.push_back(format_double(v));
            }
            trace.push_back(std::move(row));
        }
        preset_row(m, "start", r.start_error, exp.n_s_per_slot, exp.gains);
        preset_row(m, "optimized", r.best_error, r.energy, r.gains);
        if (cfg.compare_gains) {
            const GainComparison g = evaluate_gain_presets(exp, spec, cfg.trials);
            preset_row(m, "gain_unity", g.unity, exp.n_s_per_slot, std::vector<double>(slots, 1.0));
            preset_row(m, "gain_nulling", g.nulling, exp.n_s_per_slot, g.nulling_gains);
            preset_row(m, "gain_optimized", g.optimized, exp.n_s_per_slot, g.optimized_gains);
        }
        if (!row_finite(comparison.back())) {
            throw std::runtime_error("non-finite value at M = " + std::to_string(m));
        }
    }
    if (flagged) {
        log << "warning: some SPSA iterations produced a non-finite objective and were skipped\n";
    }
    write_atomically(out_dir / "results.csv", render_table(Command::Optimize, trace_header, trace));
    write_atomically(out_dir / "comparison.csv", render_table(Command::Optimize, cmp_header, comparison));
    return {{"results.csv", "comparison.csv"}, flagged};
}

}  // namespace

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_atomically(const std::filesystem::path &path, const std::string &contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write " + tmp.string());
        }
        out << contents;
        out.flush();
        if (!out) {
            throw std::runtime_error("write failed for " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

int run(const RunConfig &config, const std::filesystem::path &out_dir, std::ostream &log) {
    std::filesystem::create_directories(out_dir);
    json manifest;
    manifest["command"] = command_name(config.command);
    manifest["config"] = config.resolved;
    manifest["seed"] = config.seed;
    manifest["tool_version"] = kToolVersion;
    manifest["started_at"] = iso_now();

    int code = 0;
    Outputs outputs;
    try {
        switch (config.command) {
            case Command::Detect:
                outputs = run_sweep(config, detect_sweep(config), out_dir, log);
                break;
            case Command::Position:
                outputs = run_sweep(config, position_sweep(config), out_dir, log);
                break;
            case Command::Recognize:
                outputs = run_sweep(config, recognize_sweep(config), out_dir, log);
                break;
            case Command::Bounds:
                outputs = run_sweep(config, bounds_sweep(config), out_dir, log);
                break;
            case Command::Optimize:
                outputs = run_optimize(config, out_dir, log);
                break;
        }
        manifest["status"] = "ok";
    } catch (const std::exception &e) {
        log << "numeric failure: " << e.what() << '\n';
        manifest["status"] = "numeric_failure";
        manifest["error"] = e.what();
        code = 3;
    }
    manifest["finished_at"] = iso_now();
    manifest["outputs"] = outputs.files;
    manifest["spsa_flagged"] = outputs.flagged;
    write_atomically(out_dir / "manifest.json", manifest.dump(2) + "\n");
    return code;
}

}  // namespace eaas::cli
