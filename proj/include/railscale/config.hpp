#pragma once

// JSON run configuration and bundled-data lookup.
//
// Precedence: command-line overrides > config file > built-in defaults.
// Relative paths in a config file resolve against the file's directory;
// bare profile names resolve to <data dir>/profiles/<name>.json.

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "railscale/characterization.hpp"
#include "railscale/error.hpp"
#include "railscale/optimizer.hpp"
#include "railscale/simulator.hpp"
#include "railscale/timing_power.hpp"
#include "railscale/workload.hpp"

#ifndef RAILSCALE_DEFAULT_DATA_DIR
#define RAILSCALE_DEFAULT_DATA_DIR "data"
#endif

namespace railscale {

inline constexpr const char* data_dir_env = "RAILSCALE_DATA_DIR";

inline std::filesystem::path default_data_dir()
{
    if (const char* env = std::getenv(data_dir_env); env != nullptr && *env != '\0') {
        return env;
    }
    return RAILSCALE_DEFAULT_DATA_DIR;
}

inline std::filesystem::path default_curves_path(const std::filesystem::path& data_dir)
{
    return data_dir / "default_curves.csv";
}

inline const std::vector<std::string>& bundled_profile_names()
{
    static const std::vector<std::string> names{"tabla", "dnnweaver", "diannao", "stripes", "proteus"};
    return names;
}

inline AppProfile load_named_profile(const std::string& name, const std::filesystem::path& data_dir)
{
    const auto path = data_dir / "profiles" / (name + ".json");
    if (name.empty() || name.find('/') != std::string::npos || !std::filesystem::exists(path)) {
        throw ConfigError("profile: unknown profile '" + name + "' (looked for " + path.string() + ")");
    }
    return load_profile_file(path.string());
}

inline std::shared_ptr<const ResourceCurves> load_default_curves(const std::filesystem::path& data_dir)
{
    return std::make_shared<const ResourceCurves>(
        load_curves_file(default_curves_path(data_dir).string()));
}

struct ConfigOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> profile;
    std::optional<std::size_t> n_steps;
    std::optional<std::vector<Scheme>> schemes;
};

namespace detail {

inline void reject_unknown_keys(
    const nlohmann::json& j, const std::set<std::string>& known, const std::string& where)
{
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.contains(it.key())) {
            throw ConfigError(where + ": unknown field '" + it.key() + "'");
        }
    }
}

template <typename T>
T field(const nlohmann::json& j, const char* key, T fallback, const std::string& where)
{
    if (!j.contains(key)) {
        return fallback;
    }
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p)
{
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

inline GenParams gen_params_from_json(const nlohmann::json& j, GenParams p = {})
{
    reject_unknown_keys(j, {"mean_load", "hurst", "idc", "lambda", "n_steps", "seed", "tau_s"},
        "trace.generate");
    const std::string w = "trace.generate";
    p.mean_load = field(j, "mean_load", p.mean_load, w);
    p.hurst = field(j, "hurst", p.hurst, w);
    p.idc = field(j, "idc", p.idc, w);
    p.lambda_rate = field(j, "lambda", p.lambda_rate, w);
    p.n_steps = field(j, "n_steps", p.n_steps, w);
    p.seed = field(j, "seed", p.seed, w);
    p.tau_s = field(j, "tau_s", p.tau_s, w);
    return p;
}

} // namespace detail

struct LoadedConfig {
    SimConfig sim;
    std::optional<GenParams> generated_from;  // set when the trace is synthetic
};

inline LoadedConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir,
    const std::filesystem::path& data_dir, const ConfigOverrides& ov = {})
{
    using detail::field;
    if (!j.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    detail::reject_unknown_keys(j,
        {"profile", "curves_file", "schemes", "n_nodes", "core_weights", "grid", "predictor", "pll",
            "frequency_menu_mhz", "trace", "seed"},
        "config");

    LoadedConfig out;
    SimConfig& cfg = out.sim;

    if (ov.profile) {
        cfg.profile = load_named_profile(*ov.profile, data_dir);
    } else if (!j.contains("profile")) {
        throw ConfigError("config: missing field 'profile'");
    } else if (j.at("profile").is_string()) {
        const auto name = j.at("profile").get<std::string>();
        if (name.ends_with(".json")) {
            cfg.profile = load_profile_file(detail::resolve(base_dir, name).string());
        } else {
            cfg.profile = load_named_profile(name, data_dir);
        }
    } else {
        cfg.profile = profile_from_json(j.at("profile"));
    }

    cfg.curves = j.contains("curves_file")
        ? std::make_shared<const ResourceCurves>(load_curves_file(
            detail::resolve(base_dir, field<std::string>(j, "curves_file", "", "config")).string()))
        : load_default_curves(data_dir);

    if (ov.schemes) {
        cfg.schemes = *ov.schemes;
    } else if (j.contains("schemes")) {
        cfg.schemes.clear();
        for (const auto& s : field<std::vector<std::string>>(j, "schemes", {}, "config")) {
            const auto parsed = parse_scheme(s);
            if (!parsed) {
                throw ConfigError("schemes: unknown scheme '" + s + "'");
            }
            cfg.schemes.push_back(*parsed);
        }
    }

    cfg.n_nodes = field(j, "n_nodes", cfg.n_nodes, "config");

    if (j.contains("core_weights")) {
        const auto& w = j.at("core_weights");
        detail::reject_unknown_keys(w, {"logic", "routing", "dsp"}, "core_weights");
        cfg.weights.logic = field(w, "logic", cfg.weights.logic, "core_weights");
        cfg.weights.routing = field(w, "routing", cfg.weights.routing, "core_weights");
        cfg.weights.dsp = field(w, "dsp", cfg.weights.dsp, "core_weights");
    }
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        detail::reject_unknown_keys(g, {"v_min", "step"}, "grid");
        cfg.grid.v_min = field(g, "v_min", cfg.grid.v_min, "grid");
        cfg.grid.step = field(g, "step", cfg.grid.step, "grid");
    }
    if (j.contains("predictor")) {
        const auto& p = j.at("predictor");
        detail::reject_unknown_keys(p,
            {"bins", "warmup_steps", "margin", "refresh_threshold", "pretrained_file", "phase_priors"},
            "predictor");
        cfg.predictor.bins = field(p, "bins", cfg.predictor.bins, "predictor");
        cfg.predictor.warmup_steps = field(p, "warmup_steps", cfg.predictor.warmup_steps, "predictor");
        cfg.predictor.margin = field(p, "margin", cfg.predictor.margin, "predictor");
        cfg.predictor.refresh_threshold =
            field(p, "refresh_threshold", cfg.predictor.refresh_threshold, "predictor");
        if (p.contains("pretrained_file")) {
            const auto path = detail::resolve(
                base_dir, field<std::string>(p, "pretrained_file", "", "predictor"));
            try {
                cfg.pretrained_predictor = nlohmann::json::parse(text::read_file(path.string()));
            } catch (const nlohmann::json::exception& e) {
                throw ConfigError("predictor.pretrained_file: " + std::string(e.what()));
            }
        }
        if (p.contains("phase_priors")) {
            const auto& pp = p.at("phase_priors");
            detail::reject_unknown_keys(pp, {"bins", "weight"}, "predictor.phase_priors");
            PhasePriors priors;
            priors.bins = field<std::vector<BinIndex>>(pp, "bins", {}, "predictor.phase_priors");
            priors.weight = field(pp, "weight", priors.weight, "predictor.phase_priors");
            cfg.phase_priors = priors;
        }
    }
    if (j.contains("pll")) {
        const auto& p = j.at("pll");
        detail::reject_unknown_keys(p, {"p_pll_w", "t_lock_s", "dual"}, "pll");
        cfg.pll.p_pll_w = field(p, "p_pll_w", cfg.pll.p_pll_w, "pll");
        cfg.pll.t_lock_s = field(p, "t_lock_s", cfg.pll.t_lock_s, "pll");
        cfg.pll.dual = field(p, "dual", cfg.pll.dual, "pll");
    }
    cfg.frequency_menu_mhz = field(j, "frequency_menu_mhz", cfg.frequency_menu_mhz, "config");

    // Trace: either a CSV file or generator parameters (default generator
    // when the section is absent).
    nlohmann::json trace = j.value("trace", nlohmann::json::object());
    detail::reject_unknown_keys(trace, {"file", "generate", "tau_s"}, "trace");
    const double tau = field(trace, "tau_s", 1.0, "trace");
    if (trace.contains("file") && trace.contains("generate")) {
        throw ConfigError("trace: give either 'file' or 'generate', not both");
    }
    if (trace.contains("file")) {
        const auto path = detail::resolve(base_dir, field<std::string>(trace, "file", "", "trace"));
        cfg.trace = load_trace_file(path.string(), tau);
        if (ov.n_steps) {
            throw ConfigError("--steps only applies to generated traces");
        }
    } else {
        GenParams gp;
        gp.tau_s = tau;
        if (j.contains("seed")) {
            gp.seed = field(j, "seed", gp.seed, "config");
        }
        if (trace.contains("generate")) {
            gp = detail::gen_params_from_json(trace.at("generate"), gp);
        }
        if (ov.seed) {
            gp.seed = *ov.seed;
        }
        if (ov.n_steps) {
            gp.n_steps = *ov.n_steps;
        }
        cfg.trace = generate(gp);
        out.generated_from = gp;
    }

    cfg.validate();
    return out;
}

inline LoadedConfig load_config_file(const std::filesystem::path& path,
    const std::filesystem::path& data_dir, const ConfigOverrides& ov = {})
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text::read_file(path.string()));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config file '" + path.string() + "': " + e.what());
    }
    return config_from_json(j, path.parent_path(), data_dir, ov);
}

} // namespace railscale
