#pragma once

// Critical-path timing, the workload-stretched timing constraint, and the
// two-rail circuit power model.

#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "railscale/characterization.hpp"
#include "railscale/error.hpp"

namespace railscale {

struct VoltagePair {
    double v_core = 0.0;
    double v_bram = 0.0;

    friend bool operator==(const VoltagePair&, const VoltagePair&) = default;
};

inline VoltagePair nominal_pair(const ResourceCurves& curves)
{
    return {curves.v_core_nominal(), curves.v_bram_nominal()};
}

inline void check_pair(const ResourceCurves& curves, const VoltagePair& p)
{
    const double crash = curves.v_crash();
    if (!(p.v_core >= crash && p.v_core <= curves.v_core_nominal())) {
        throw RangeError("v_core " + text::format_double(p.v_core) + " V outside ["
            + text::format_double(crash) + ", " + text::format_double(curves.v_core_nominal())
            + "] V");
    }
    if (!(p.v_bram >= crash && p.v_bram <= curves.v_bram_nominal())) {
        throw RangeError("v_bram " + text::format_double(p.v_bram) + " V outside ["
            + text::format_double(crash) + ", " + text::format_double(curves.v_bram_nominal())
            + "] V");
    }
}

// Allowed stretch of the clock period; 1/load.
class WorkloadFactor {
public:
    explicit WorkloadFactor(double s_w) : value_(s_w)
    {
        if (!(s_w >= 1.0) || !std::isfinite(s_w)) {
            throw RangeError("workload factor must be >= 1, got " + text::format_double(s_w));
        }
    }

    static WorkloadFactor from_load(double load)
    {
        if (!(load > 0.0 && load <= 1.0)) {
            throw RangeError("load must be in (0, 1], got " + text::format_double(load));
        }
        return WorkloadFactor(1.0 / load);
    }

    double value() const noexcept { return value_; }

private:
    double value_;
};

// Utilization weights used to fold logic, routing and DSP curves into a
// single core-rail factor.
struct CoreWeights {
    double logic = 0.45;
    double routing = 0.45;
    double dsp = 0.10;

    void validate() const
    {
        if (!(logic >= 0.0 && routing >= 0.0 && dsp >= 0.0) || !(logic + routing + dsp > 0.0)) {
            throw ConfigError("core weights must be non-negative with a positive sum");
        }
    }
};

struct AppProfile {
    std::string name;
    double d_l0_ns = 0.0;  // logic+routing share of the nominal critical path
    double d_m0_ns = 0.0;  // BRAM share
    double beta = 0.0;
    double p_core_dyn0_w = 0.0;
    double p_core_stat0_w = 0.0;
    double p_bram_dyn0_w = 0.0;
    double p_bram_stat0_w = 0.0;
    double f_nom_mhz = 0.0;

    static constexpr double f_nom_tolerance = 1e-6;

    double alpha() const noexcept { return d_m0_ns / d_l0_ns; }
    double nominal_delay_ns() const noexcept { return d_l0_ns + d_m0_ns; }

    void validate() const
    {
        const auto fail = [this](const std::string& what) {
            throw ConfigError("profile '" + name + "': " + what);
        };
        if (!(d_l0_ns > 0.0)) fail("d_l0_ns must be > 0");
        if (!(d_m0_ns >= 0.0)) fail("d_m0_ns must be >= 0");
        if (!(beta >= 0.0)) fail("beta must be >= 0");
        if (!(p_core_dyn0_w >= 0.0 && p_core_stat0_w >= 0.0 && p_bram_dyn0_w >= 0.0
                && p_bram_stat0_w >= 0.0)) {
            fail("nominal powers must be >= 0");
        }
        if (!(f_nom_mhz > 0.0)) fail("f_nom_mhz must be > 0");
        const double implied = 1000.0 / nominal_delay_ns();
        if (std::abs(implied - f_nom_mhz) > f_nom_tolerance * f_nom_mhz) {
            fail("f_nom_mhz " + text::format_double(f_nom_mhz)
                + " inconsistent with critical path (1/(d_l0+d_m0) = "
                + text::format_double(implied) + " MHz)");
        }
    }
};

// Builds a profile from its nominal frequency and delay ratio alpha.
inline AppProfile make_profile(std::string name, double f_nom_mhz, double alpha, double beta,
    double p_core_dyn0_w, double p_core_stat0_w, double p_bram_dyn0_w, double p_bram_stat0_w)
{
    const double total = 1000.0 / f_nom_mhz;
    AppProfile p{std::move(name), total / (1.0 + alpha), total * alpha / (1.0 + alpha), beta,
        p_core_dyn0_w, p_core_stat0_w, p_bram_dyn0_w, p_bram_stat0_w, f_nom_mhz};
    p.validate();
    return p;
}

// Same nominal critical path length and powers, different alpha.
inline AppProfile with_alpha(AppProfile p, double alpha)
{
    const double total = p.nominal_delay_ns();
    p.d_l0_ns = total / (1.0 + alpha);
    p.d_m0_ns = total * alpha / (1.0 + alpha);
    return p;
}

inline AppProfile with_beta(AppProfile p, double beta)
{
    p.beta = beta;
    return p;
}

inline void to_json(nlohmann::json& j, const AppProfile& p)
{
    j = nlohmann::json{{"name", p.name}, {"d_l0_ns", p.d_l0_ns}, {"d_m0_ns", p.d_m0_ns},
        {"beta", p.beta}, {"p_core_dyn0_w", p.p_core_dyn0_w},
        {"p_core_stat0_w", p.p_core_stat0_w}, {"p_bram_dyn0_w", p.p_bram_dyn0_w},
        {"p_bram_stat0_w", p.p_bram_stat0_w}, {"f_nom_mhz", p.f_nom_mhz}};
}

inline AppProfile profile_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw ConfigError("profile must be a JSON object");
    }
    const auto num = [&j](const char* key) {
        if (!j.contains(key)) {
            throw ConfigError(std::string("profile is missing field '") + key + "'");
        }
        if (!j.at(key).is_number()) {
            throw ConfigError(std::string("profile field '") + key + "' must be a number");
        }
        return j.at(key).get<double>();
    };
    AppProfile p;
    if (!j.contains("name") || !j.at("name").is_string()) {
        throw ConfigError("profile is missing string field 'name'");
    }
    p.name = j.at("name").get<std::string>();
    p.d_l0_ns = num("d_l0_ns");
    p.d_m0_ns = num("d_m0_ns");
    p.beta = num("beta");
    p.p_core_dyn0_w = num("p_core_dyn0_w");
    p.p_core_stat0_w = num("p_core_stat0_w");
    p.p_bram_dyn0_w = num("p_bram_dyn0_w");
    p.p_bram_stat0_w = num("p_bram_stat0_w");
    p.f_nom_mhz = num("f_nom_mhz");
    p.validate();
    return p;
}

inline AppProfile load_profile_file(const std::string& path)
{
    try {
        return profile_from_json(nlohmann::json::parse(text::read_file(path)));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("profile file '" + path + "': " + e.what());
    }
}

// d_l0 * D_logic(v_core) + d_m0 * D_memory(v_bram), in ns.
inline double critical_path_delay(
    const AppProfile& profile, const ResourceCurves& curves, const VoltagePair& pair)
{
    check_pair(curves, pair);
    return profile.d_l0_ns * curves.factor(ResourceClass::Logic, CurveKind::Delay, pair.v_core)
        + profile.d_m0_ns * curves.factor(ResourceClass::Memory, CurveKind::Delay, pair.v_bram);
}

// D_l(v_core) + alpha * D_m(v_bram) <= (1 + alpha) * s_w
inline bool timing_feasible(const AppProfile& profile, const ResourceCurves& curves,
    const VoltagePair& pair, WorkloadFactor s_w)
{
    check_pair(curves, pair);
    const double alpha = profile.alpha();
    const double lhs = curves.factor(ResourceClass::Logic, CurveKind::Delay, pair.v_core)
        + alpha * curves.factor(ResourceClass::Memory, CurveKind::Delay, pair.v_bram);
    return lhs <= (1.0 + alpha) * s_w.value();
}

// Utilization-weighted mean of the logic/routing/DSP factors at v.
inline double core_rail_factor(
    const ResourceCurves& curves, CurveKind kind, double v, const CoreWeights& w)
{
    const double num = w.logic * curves.factor(ResourceClass::Logic, kind, v)
        + w.routing * curves.factor(ResourceClass::Routing, kind, v)
        + w.dsp * curves.factor(ResourceClass::Dsp, kind, v);
    return num / (w.logic + w.routing + w.dsp);
}

struct RailPower {
    double core_w = 0.0;
    double bram_w = 0.0;  // before the beta weight
};

inline RailPower rail_power(const AppProfile& profile, const ResourceCurves& curves,
    const VoltagePair& pair, double freq_mhz, const CoreWeights& weights = {})
{
    if (!(freq_mhz > 0.0) || !std::isfinite(freq_mhz)) {
        throw RangeError("frequency must be positive, got " + text::format_double(freq_mhz));
    }
    check_pair(curves, pair);
    const double fr = freq_mhz / profile.f_nom_mhz;
    RailPower r;
    r.core_w = profile.p_core_dyn0_w * fr
            * core_rail_factor(curves, CurveKind::DynamicPower, pair.v_core, weights)
        + profile.p_core_stat0_w
            * core_rail_factor(curves, CurveKind::StaticPower, pair.v_core, weights);
    r.bram_w = profile.p_bram_dyn0_w * fr
            * curves.factor(ResourceClass::Memory, CurveKind::DynamicPower, pair.v_bram)
        + profile.p_bram_stat0_w
            * curves.factor(ResourceClass::Memory, CurveKind::StaticPower, pair.v_bram);
    return r;
}

// P_core + beta * P_bram, in W.
inline double circuit_power(const AppProfile& profile, const ResourceCurves& curves,
    const VoltagePair& pair, double freq_mhz, const CoreWeights& weights = {})
{
    const auto r = rail_power(profile, curves, pair, freq_mhz, weights);
    return r.core_w + profile.beta * r.bram_w;
}

inline double nominal_power(
    const AppProfile& profile, const ResourceCurves& curves, const CoreWeights& weights = {})
{
    return circuit_power(profile, curves, nominal_pair(curves), profile.f_nom_mhz, weights);
}

} // namespace railscale
