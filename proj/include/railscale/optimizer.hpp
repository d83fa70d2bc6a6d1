#pragma once

// Operating-point selection for each voltage scaling scheme. All searches
// are plain exhaustive walks over the 25 mV rail grids.

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "railscale/characterization.hpp"
#include "railscale/error.hpp"
#include "railscale/timing_power.hpp"

namespace railscale {

enum class Scheme { Proposed, CoreOnly, BramOnly, FrequencyOnly, PowerGating };

inline constexpr std::string_view to_string(Scheme s) noexcept
{
    switch (s) {
    case Scheme::Proposed: return "proposed";
    case Scheme::CoreOnly: return "core-only";
    case Scheme::BramOnly: return "bram-only";
    case Scheme::FrequencyOnly: return "frequency-only";
    case Scheme::PowerGating: return "power-gating";
    }
    return "?";
}

inline std::optional<Scheme> parse_scheme(std::string_view s)
{
    for (auto v : {Scheme::Proposed, Scheme::CoreOnly, Scheme::BramOnly, Scheme::FrequencyOnly,
             Scheme::PowerGating}) {
        if (to_string(v) == s) {
            return v;
        }
    }
    return std::nullopt;
}

// Grid points are generated in integer microvolts so that e.g. 0.75 V is the
// same double a CSV parser produces for "0.75".
class VoltageGrid {
public:
    VoltageGrid(double v_min, double v_max, double step)
        : min_uv_(std::llround(v_min * 1e6)), max_uv_(std::llround(v_max * 1e6)),
          step_uv_(std::llround(step * 1e6))
    {
        if (step_uv_ <= 0 || min_uv_ <= 0 || max_uv_ < min_uv_) {
            throw ConfigError("voltage grid needs 0 < v_min <= v_max and step > 0");
        }
        if ((max_uv_ - min_uv_) % step_uv_ != 0) {
            throw ConfigError("voltage grid span " + text::format_double(v_max - v_min)
                + " V is not a multiple of the step " + text::format_double(step) + " V");
        }
    }

    double v_min() const noexcept { return static_cast<double>(min_uv_) / 1e6; }
    double v_max() const noexcept { return static_cast<double>(max_uv_) / 1e6; }
    double step() const noexcept { return static_cast<double>(step_uv_) / 1e6; }
    std::size_t size() const noexcept
    {
        return static_cast<std::size_t>((max_uv_ - min_uv_) / step_uv_) + 1;
    }
    double at(std::size_t i) const noexcept
    {
        return static_cast<double>(min_uv_ + static_cast<std::int64_t>(i) * step_uv_) / 1e6;
    }
    std::vector<double> points() const
    {
        std::vector<double> out(size());
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i] = at(i);
        }
        return out;
    }

private:
    std::int64_t min_uv_;
    std::int64_t max_uv_;
    std::int64_t step_uv_;
};

// Floor and resolution shared by both rails; each rail's grid tops out at
// its own nominal voltage.
struct GridSpec {
    double v_min = 0.50;
    double step = 0.025;
};

struct RailGrids {
    VoltageGrid core;
    VoltageGrid bram;

    static RailGrids for_curves(const ResourceCurves& curves, const GridSpec& spec = {})
    {
        if (spec.v_min < curves.v_crash() - 1e-12) {
            throw ConfigError("grid floor " + text::format_double(spec.v_min)
                + " V is below the crash voltage");
        }
        return {VoltageGrid(spec.v_min, curves.v_core_nominal(), spec.step),
            VoltageGrid(spec.v_min, curves.v_bram_nominal(), spec.step)};
    }
};

struct OperatingPoint {
    VoltagePair pair;
    double freq_mhz = 0.0;
    double power_w = 0.0;
    Scheme scheme = Scheme::Proposed;
};

namespace detail {

// Walks both axes from the top down and only replaces the incumbent on a
// strictly lower power, so equal-power ties resolve to the highest v_bram
// and then the highest v_core.
inline OperatingPoint search(const AppProfile& profile, const ResourceCurves& curves,
    WorkloadFactor s_w, const std::vector<double>& cores, const std::vector<double>& brams,
    Scheme scheme, const CoreWeights& weights)
{
    const double freq = profile.f_nom_mhz / s_w.value();
    std::optional<OperatingPoint> best;
    for (auto ib = brams.rbegin(); ib != brams.rend(); ++ib) {
        for (auto ic = cores.rbegin(); ic != cores.rend(); ++ic) {
            const VoltagePair pair{*ic, *ib};
            if (!timing_feasible(profile, curves, pair, s_w)) {
                continue;
            }
            const double p = circuit_power(profile, curves, pair, freq, weights);
            if (!best || p < best->power_w) {
                best = OperatingPoint{pair, freq, p, scheme};
            }
        }
    }
    if (!best) {
        // The nominal pair is always on the grid and feasible for s_w >= 1.
        throw std::logic_error("no timing-feasible voltage pair on the grid");
    }
    return *best;
}

} // namespace detail

inline OperatingPoint optimize_joint(const AppProfile& profile, const ResourceCurves& curves,
    WorkloadFactor s_w, const RailGrids& grid, const CoreWeights& weights = {})
{
    return detail::search(profile, curves, s_w, grid.core.points(), grid.bram.points(),
        Scheme::Proposed, weights);
}

inline OperatingPoint optimize_core_only(const AppProfile& profile, const ResourceCurves& curves,
    WorkloadFactor s_w, const RailGrids& grid, const CoreWeights& weights = {})
{
    return detail::search(profile, curves, s_w, grid.core.points(), {curves.v_bram_nominal()},
        Scheme::CoreOnly, weights);
}

inline OperatingPoint optimize_bram_only(const AppProfile& profile, const ResourceCurves& curves,
    WorkloadFactor s_w, const RailGrids& grid, const CoreWeights& weights = {})
{
    return detail::search(profile, curves, s_w, {curves.v_core_nominal()}, grid.bram.points(),
        Scheme::BramOnly, weights);
}

inline double frequency_only_power(const AppProfile& profile, const ResourceCurves& curves,
    WorkloadFactor s_w, const CoreWeights& weights = {})
{
    return circuit_power(
        profile, curves, nominal_pair(curves), profile.f_nom_mhz / s_w.value(), weights);
}

// Slack for load * n landing a rounding error above an integer.
inline constexpr double node_count_epsilon = 1e-9;

inline std::size_t active_nodes(double load, std::size_t n_nodes)
{
    if (!(load > 0.0 && load <= 1.0)) {
        throw RangeError("load must be in (0, 1], got " + text::format_double(load));
    }
    if (n_nodes < 1) {
        throw RangeError("n_nodes must be >= 1");
    }
    const double raw = std::ceil(load * static_cast<double>(n_nodes) - node_count_epsilon);
    return std::max<std::size_t>(1, static_cast<std::size_t>(raw));
}

// Per-node average power when ceil(load * n) nodes run at nominal V/f and
// the rest are gated off. Wake-up cost is not modeled.
inline double power_gating_power(const AppProfile& profile, const ResourceCurves& curves,
    double load, std::size_t n_nodes, const CoreWeights& weights = {})
{
    const auto active = active_nodes(load, n_nodes);
    return static_cast<double>(active) / static_cast<double>(n_nodes)
        * nominal_power(profile, curves, weights);
}

inline OperatingPoint optimize(Scheme scheme, const AppProfile& profile,
    const ResourceCurves& curves, WorkloadFactor s_w, const RailGrids& grid,
    const CoreWeights& weights = {})
{
    switch (scheme) {
    case Scheme::Proposed: return optimize_joint(profile, curves, s_w, grid, weights);
    case Scheme::CoreOnly: return optimize_core_only(profile, curves, s_w, grid, weights);
    case Scheme::BramOnly: return optimize_bram_only(profile, curves, s_w, grid, weights);
    case Scheme::FrequencyOnly:
        return {nominal_pair(curves), profile.f_nom_mhz / s_w.value(),
            frequency_only_power(profile, curves, s_w, weights), Scheme::FrequencyOnly};
    case Scheme::PowerGating:
        break;
    }
    throw std::invalid_argument("power gating has no voltage operating point");
}

} // namespace railscale
