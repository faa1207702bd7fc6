#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "eaas/cli.h"
#include "eaas/gaussian.h"
#include "eaas/spectra_io.h"

namespace eaas::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const YAML::Node &node, const std::string &msg) {
    const auto mark = node.Mark();
    if (mark.is_null()) {
        throw ConfigError(msg, 0, 0);
    }
    throw ConfigError(msg, static_cast<std::size_t>(mark.line) + 1, static_cast<std::size_t>(mark.column) + 1);
}

void require_map(const YAML::Node &node, const std::string &where) {
    if (!node.IsMap()) {
        fail(node, "'" + where + "' must be a mapping");
    }
}

void check_keys(const YAML::Node &node, const std::set<std::string> &allowed, const std::string &where) {
    for (const auto &kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) {
            std::string list;
            for (const auto &a : allowed) {
                list += (list.empty() ? "" : ", ") + a;
            }
            fail(kv.first, "unknown key '" + key + "' in " + where + " (allowed: " + list + ")");
        }
    }
}

double as_double(const YAML::Node &node, const std::string &name) {
    if (!node.IsScalar()) {
        fail(node, "'" + name + "' must be a number");
    }
    try {
        return node.as<double>();
    } catch (const YAML::Exception &) {
        fail(node, "'" + name + "' must be a number, got '" + node.Scalar() + "'");
    }
}

std::uint64_t as_count(const YAML::Node &node, const std::string &name, std::uint64_t min_value) {
    if (!node.IsScalar()) {
        fail(node, "'" + name + "' must be an integer");
    }
    const std::string &text = node.Scalar();
    std::uint64_t value = 0;
    bool ok = !text.empty();
    if (ok) {
        // Accept plain integers and exact scientific forms such as 1e6.
        try {
            std::size_t used = 0;
            value = std::stoull(text, &used);
            if (used != text.size()) {
                const double d = std::stod(text, &used);
                ok = used == text.size() && d >= 0.0 && d < 1.8e19 && d == std::floor(d);
                value = ok ? static_cast<std::uint64_t>(d) : 0;
            }
        } catch (const std::exception &) {
            ok = false;
        }
        ok = ok && text.front() != '-';
    }
    if (!ok) {
        fail(node, "'" + name + "' must be a non-negative integer, got '" + text + "'");
    }
    if (value < min_value) {
        fail(node, "'" + name + "' must be >= " + std::to_string(min_value));
    }
    return value;
}

double ranged(const YAML::Node &node, const std::string &name, double lo, double hi, bool lo_open = false) {
    const double v = as_double(node, name);
    if (!(lo_open ? v > lo : v >= lo) || !(v <= hi)) {
        std::ostringstream msg;
        msg << "'" << name << "' = " << node.Scalar() << " is outside " << (lo_open ? "(" : "[") << lo << ", " << hi
            << "]";
        fail(node, msg.str());
    }
    return v;
}

std::string as_string(const YAML::Node &node, const std::string &name) {
    if (!node.IsScalar()) {
        fail(node, "'" + name + "' must be a string");
    }
    return node.Scalar();
}

Physics parse_physics(const YAML::Node &node) {
    Physics p;
    if (!node) {
        return p;
    }
    require_map(node, "physics");
    check_keys(node, {"n_s", "kappa_t", "kappa_b", "kappa_i", "n_b"}, "physics");
    constexpr double kHuge = 1e12;
    if (node["n_s"]) {
        p.n_s = ranged(node["n_s"], "n_s", 0.0, kHuge, true);
    }
    if (node["kappa_t"]) {
        p.kappa_t = ranged(node["kappa_t"], "kappa_t", 0.0, 1.0);
    }
    if (node["kappa_b"]) {
        p.kappa_b = ranged(node["kappa_b"], "kappa_b", 0.0, 1.0);
    }
    if (node["kappa_i"]) {
        p.kappa_i = ranged(node["kappa_i"], "kappa_i", 0.0, 1.0, true);
    }
    if (node["n_b"]) {
        p.n_b = ranged(node["n_b"], "n_b", 0.0, kHuge);
    }
    return p;
}

std::vector<std::uint64_t> parse_sweep(const YAML::Node &node) {
    std::vector<std::uint64_t> out;
    if (node.IsScalar()) {
        out.push_back(as_count(node, "m_copies", 1));
    } else if (node.IsSequence()) {
        for (const auto &item : node) {
            out.push_back(as_count(item, "m_copies", 1));
        }
    } else {
        fail(node, "'m_copies' must be an integer or a list of integers");
    }
    if (out.empty()) {
        fail(node, "'m_copies' sweep list is empty");
    }
    return out;
}

std::filesystem::path resolve_path(const YAML::Node &node, const std::string &name,
                                   const std::filesystem::path &base_dir) {
    std::filesystem::path p = as_string(node, name);
    return p.is_absolute() ? p : base_dir / p;
}

TransmissivityPattern load_pattern_or_fail(const YAML::Node &node, const std::filesystem::path &path) {
    try {
        return load_pattern_csv(path);
    } catch (const ParseError &e) {
        fail(node, path.string() + ":" + std::to_string(e.row) + ":" + std::to_string(e.col) + ": " + e.what());
    }
}

TransmissivityPattern parse_pattern(const YAML::Node &node, const Physics &physics,
                                    const std::filesystem::path &base_dir, json &resolved) {
    require_map(node, "pattern");
    check_keys(node, {"builtin", "csv", "kpeak", "spectra"}, "pattern");
    if (node.size() != 1) {
        fail(node, "'pattern' needs exactly one of builtin, csv, kpeak, spectra");
    }
    try {
        if (node["builtin"]) {
            const auto name = as_string(node["builtin"], "builtin");
            if (name != "wine" && name != "drug") {
                fail(node["builtin"], "unknown built-in pattern '" + name + "' (expected wine or drug)");
            }
            resolved = {{"builtin", name}};
            return builtin_pattern(name);
        }
        if (node["csv"]) {
            const auto path = resolve_path(node["csv"], "csv", base_dir);
            resolved = {{"csv", path.string()}};
            return load_pattern_or_fail(node["csv"], path);
        }
        if (node["kpeak"]) {
            const auto &k = node["kpeak"];
            require_map(k, "kpeak");
            check_keys(k, {"m_slots", "k_peaks"}, "kpeak");
            if (!k["m_slots"]) {
                fail(k, "'kpeak' requires m_slots");
            }
            const auto m = as_count(k["m_slots"], "m_slots", 2);
            const auto kk = k["k_peaks"] ? as_count(k["k_peaks"], "k_peaks", 1) : 1;
            if (kk >= m) {
                fail(k, "'k_peaks' must be smaller than 'm_slots'");
            }
            resolved = {{"kpeak", {{"m_slots", m}, {"k_peaks", kk}}}};
            return kpeak_patterns(m, kk, physics.kappa_t, physics.kappa_b);
        }
        const auto &s = node["spectra"];
        require_map(s, "spectra");
        check_keys(s, {"files", "centers", "half_width"}, "spectra");
        if (!s["files"] || !s["files"].IsSequence() || s["files"].size() < 2) {
            fail(s, "'spectra.files' must list at least two {label, path} entries");
        }
        if (!s["centers"] || !s["centers"].IsSequence() || s["centers"].size() == 0) {
            fail(s, "'spectra.centers' must be a non-empty list of wavenumbers");
        }
        SlotGrid grid;
        for (const auto &c : s["centers"]) {
            grid.centers.push_back(as_double(c, "centers"));
        }
        if (s["half_width"]) {
            grid.half_width = ranged(s["half_width"], "half_width", 0.0, 1e6, true);
        }
        std::vector<std::vector<double>> rows;
        std::vector<std::string> labels;
        json files = json::array();
        for (const auto &f : s["files"]) {
            require_map(f, "spectra.files entry");
            check_keys(f, {"label", "path"}, "spectra.files entry");
            if (!f["label"] || !f["path"]) {
                fail(f, "each spectra file needs 'label' and 'path'");
            }
            const auto path = resolve_path(f["path"], "path", base_dir);
            labels.push_back(as_string(f["label"], "label"));
            try {
                rows.push_back(discretize_spectrum(load_spectrum_csv(path), grid));
            } catch (const ParseError &e) {
                fail(f["path"], path.string() + ":" + std::to_string(e.row) + ":" + std::to_string(e.col) + ": " +
                                    e.what());
            } catch (const DomainError &e) {
                fail(f["path"], path.string() + ": " + e.what());
            }
            files.push_back({{"label", labels.back()}, {"path", path.string()}});
        }
        resolved = {{"spectra", {{"files", files}, {"centers", grid.centers}, {"half_width", grid.half_width}}}};
        return TransmissivityPattern(std::move(rows), std::move(labels));
    } catch (const DomainError &e) {
        fail(node, std::string("invalid pattern: ") + e.what());
    } catch (const ResourceError &e) {
        fail(node, std::string("invalid pattern: ") + e.what());
    }
}

GainChoice parse_gain(const YAML::Node &node) {
    GainChoice g;
    if (!node) {
        return g;
    }
    require_map(node, "receiver");
    check_keys(node, {"gain"}, "receiver");
    const auto &v = node["gain"];
    if (!v) {
        return g;
    }
    if (v.IsScalar() && v.Scalar() == "nulling") {
        g.mode = GainMode::Nulling;
    } else if (v.IsScalar() && v.Scalar() == "unity") {
        g.mode = GainMode::Unity;
        g.value = 1.0;
    } else {
        g.mode = GainMode::Fixed;
        g.value = as_double(v, "gain");
        if (!(g.value >= 1.0) || !std::isfinite(g.value)) {
            fail(v, "'gain' must be 'nulling', 'unity' or a number >= 1");
        }
    }
    return g;
}

void parse_optimize(const YAML::Node &node, RunConfig &cfg) {
    auto &spec = cfg.optimize;
    spec.budget = cfg.physics.n_s;
    if (!node) {
        return;
    }
    require_map(node, "optimize");
    check_keys(node,
               {"target", "budget", "gain_cap", "iterations", "trials_per_eval", "a0", "c0", "big_a", "alpha",
                "gamma", "compare_gains"},
               "optimize");
    if (node["target"]) {
        const auto t = as_string(node["target"], "target");
        if (t == "energy") {
            spec.target = OptimizationTarget::Energy;
        } else if (t == "gain") {
            spec.target = OptimizationTarget::Gain;
        } else if (t == "both") {
            spec.target = OptimizationTarget::Both;
        } else {
            fail(node["target"], "'target' must be energy, gain or both");
        }
    }
    if (node["budget"]) {
        spec.budget = ranged(node["budget"], "budget", 0.0, 1e12, true);
    }
    if (node["gain_cap"]) {
        spec.gain_cap = ranged(node["gain_cap"], "gain_cap", 0.0, 1e12);
    }
    if (node["iterations"]) {
        spec.iterations = as_count(node["iterations"], "iterations", 1);
    }
    if (node["trials_per_eval"]) {
        spec.trials_per_eval = as_count(node["trials_per_eval"], "trials_per_eval", 1);
    }
    auto &co = spec.coefficients;
    if (node["a0"]) {
        co.a0 = ranged(node["a0"], "a0", 0.0, 1e12);
    }
    if (node["c0"]) {
        co.c0 = ranged(node["c0"], "c0", 0.0, 1.0, true);
    }
    if (node["big_a"]) {
        co.big_a = ranged(node["big_a"], "big_a", 0.0, 1e12);
    }
    if (node["alpha"]) {
        co.alpha = ranged(node["alpha"], "alpha", 0.0, 10.0, true);
    }
    if (node["gamma"]) {
        co.gamma = ranged(node["gamma"], "gamma", 0.0, 10.0);
    }
    if (node["compare_gains"]) {
        try {
            cfg.compare_gains = node["compare_gains"].as<bool>();
        } catch (const YAML::Exception &) {
            fail(node["compare_gains"], "'compare_gains' must be true or false");
        }
    }
}

std::string_view target_name(OptimizationTarget t) {
    switch (t) {
        case OptimizationTarget::Energy:
            return "energy";
        case OptimizationTarget::Gain:
            return "gain";
        case OptimizationTarget::Both:
            return "both";
    }
    return "energy";
}

}  // namespace

std::string_view command_name(Command command) {
    switch (command) {
        case Command::Detect:
            return "detect";
        case Command::Position:
            return "position";
        case Command::Recognize:
            return "recognize";
        case Command::Bounds:
            return "bounds";
        case Command::Optimize:
            return "optimize";
    }
    return "detect";
}

RunConfig parse_config(const std::string &text, Command command, const std::filesystem::path &base_dir,
                       const Overrides &overrides) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException &e) {
        throw ConfigError("YAML syntax error: " + e.msg, static_cast<std::size_t>(e.mark.line) + 1,
                          static_cast<std::size_t>(e.mark.column) + 1);
    }
    if (!root || root.IsNull()) {
        throw ConfigError("config is empty", 1, 1);
    }
    require_map(root, "config root");

    std::set<std::string> allowed{"physics", "m_copies", "trials", "seed", "threads"};
    switch (command) {
        case Command::Detect:
            allowed.insert("receiver");
            break;
        case Command::Position:
            allowed.insert({"receiver", "m_slots", "k_peaks"});
            break;
        case Command::Recognize:
            allowed.insert({"receiver", "pattern"});
            break;
        case Command::Bounds:
            allowed.insert("pattern");
            allowed.erase("trials");
            allowed.erase("threads");
            break;
        case Command::Optimize:
            allowed.insert({"receiver", "pattern", "optimize"});
            break;
    }
    check_keys(root, allowed, std::string(command_name(command)) + " config");

    RunConfig cfg;
    cfg.command = command;
    cfg.physics = parse_physics(root["physics"]);
    if (!root["m_copies"]) {
        fail(root, "'m_copies' is required");
    }
    cfg.m_copies = parse_sweep(root["m_copies"]);
    if (root["trials"]) {
        cfg.trials = as_count(root["trials"], "trials", 1);
    }
    if (root["seed"]) {
        cfg.seed = as_count(root["seed"], "seed", 0);
    }
    if (root["threads"]) {
        cfg.threads = static_cast<unsigned>(as_count(root["threads"], "threads", 1));
    }
    if (overrides.trials) {
        cfg.trials = *overrides.trials;
    }
    if (overrides.seed) {
        cfg.seed = *overrides.seed;
    }
    if (overrides.threads) {
        cfg.threads = *overrides.threads;
    }
    if (cfg.trials == 0 || cfg.threads == 0) {
        throw ConfigError("trials and threads must be >= 1", 0, 0);
    }
    cfg.gain = parse_gain(root["receiver"]);

    try {
        ChannelEnv env{cfg.physics.n_b, cfg.physics.kappa_i};
        (void)tmsv_state(cfg.physics.n_s);
        (void)return_state(cfg.physics.n_s, cfg.physics.kappa_t, env);
    } catch (const DomainError &e) {
        fail(root["physics"] ? root["physics"] : root, std::string("invalid physics: ") + e.what());
    }

    json resolved;
    resolved["command"] = command_name(command);
    resolved["physics"] = {{"n_s", cfg.physics.n_s},
                           {"kappa_t", cfg.physics.kappa_t},
                           {"kappa_b", cfg.physics.kappa_b},
                           {"kappa_i", cfg.physics.kappa_i},
                           {"n_b", cfg.physics.n_b}};
    resolved["m_copies"] = cfg.m_copies;
    resolved["seed"] = cfg.seed;
    if (command != Command::Bounds) {
        resolved["trials"] = cfg.trials;
        resolved["threads"] = cfg.threads;
        resolved["receiver"] = {{"gain", cfg.gain.mode == GainMode::Nulling  ? json("nulling")
                                         : cfg.gain.mode == GainMode::Unity ? json("unity")
                                                                            : json(cfg.gain.value)}};
    }

    if (command == Command::Position) {
        if (!root["m_slots"]) {
            fail(root, "'m_slots' is required for position");
        }
        cfg.m_slots = as_count(root["m_slots"], "m_slots", 2);
        cfg.k_peaks = root["k_peaks"] ? as_count(root["k_peaks"], "k_peaks", 1) : 1;
        if (cfg.k_peaks >= cfg.m_slots) {
            fail(root["k_peaks"] ? root["k_peaks"] : root, "'k_peaks' must be smaller than 'm_slots'");
        }
        try {
            cfg.pattern = kpeak_patterns(cfg.m_slots, cfg.k_peaks, cfg.physics.kappa_t, cfg.physics.kappa_b);
        } catch (const std::exception &e) {
            fail(root["m_slots"], e.what());
        }
        resolved["m_slots"] = cfg.m_slots;
        resolved["k_peaks"] = cfg.k_peaks;
    } else if (command == Command::Detect) {
        cfg.pattern = TransmissivityPattern({{cfg.physics.kappa_b}, {cfg.physics.kappa_t}}, {"background", "target"});
    } else {
        if (!root["pattern"]) {
            fail(root, "'pattern' is required for " + std::string(command_name(command)));
        }
        json p;
        cfg.pattern = parse_pattern(root["pattern"], cfg.physics, base_dir, p);
        resolved["pattern"] = p;
    }

    if (command == Command::Optimize) {
        cfg.optimize.seed = cfg.seed;
        cfg.optimize.threads = cfg.threads;
        parse_optimize(root["optimize"], cfg);
        try {
            cfg.optimize.validate();
        } catch (const DomainError &e) {
            fail(root["optimize"] ? root["optimize"] : root, e.what());
        }
        const auto &o = cfg.optimize;
        resolved["optimize"] = {{"target", target_name(o.target)},
                                {"budget", o.budget},
                                {"gain_cap", o.effective_gain_cap()},
                                {"iterations", o.iterations},
                                {"trials_per_eval", o.trials_per_eval},
                                {"a0", o.coefficients.a0},
                                {"c0", o.coefficients.c0},
                                {"big_a", o.coefficients.big_a},
                                {"alpha", o.coefficients.alpha},
                                {"gamma", o.coefficients.gamma},
                                {"compare_gains", cfg.compare_gains}};
    }
    cfg.resolved = std::move(resolved);
    return cfg;
}

RunConfig load_config(const std::filesystem::path &path, Command command, const Overrides &overrides) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path.string(), 0, 0);
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), command, path.parent_path(), overrides);
}

}  // namespace eaas::cli
