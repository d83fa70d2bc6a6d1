#pragma once

// Static scheme comparisons along one axis (workload, alpha or beta), with
// the selected voltages for each point.

#include <cmath>
#include <cstddef>
#include <future>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "railscale/characterization.hpp"
#include "railscale/error.hpp"
#include "railscale/optimizer.hpp"
#include "railscale/simulator.hpp"
#include "railscale/timing_power.hpp"

namespace railscale {

enum class SweepAxis { Workload, Alpha, Beta };

inline constexpr std::string_view to_string(SweepAxis a) noexcept
{
    switch (a) {
    case SweepAxis::Workload: return "workload";
    case SweepAxis::Alpha: return "alpha";
    case SweepAxis::Beta: return "beta";
    }
    return "?";
}

inline std::optional<SweepAxis> parse_sweep_axis(std::string_view s)
{
    for (auto a : {SweepAxis::Workload, SweepAxis::Alpha, SweepAxis::Beta}) {
        if (to_string(a) == s) {
            return a;
        }
    }
    return std::nullopt;
}

struct SweepRange {
    double from;
    double to;
    double step;

    // Points are from + i*step, computed on an integer index and rounded to
    // 1e-9 so 0.1 + 0.05*i lands on the decimal values users expect.
    std::vector<double> values() const
    {
        if (!(step > 0.0) || to < from) {
            throw ConfigError("sweep range needs from <= to and step > 0");
        }
        const auto n = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = std::round((from + step * static_cast<double>(i)) * 1e9) / 1e9;
        }
        return out;
    }
};

inline SweepRange default_range(SweepAxis a)
{
    switch (a) {
    case SweepAxis::Workload: return {0.10, 1.00, 0.05};
    case SweepAxis::Alpha: return {0.0, 1.0, 0.1};
    case SweepAxis::Beta: return {0.0, 1.0, 0.1};
    }
    return {0.0, 1.0, 0.1};
}

struct SweepContext {
    AppProfile profile;
    std::shared_ptr<const ResourceCurves> curves;
    GridSpec grid;
    CoreWeights weights;
    std::size_t n_nodes = 10;
    // Load used on the alpha and beta axes.
    double base_load = 0.5;
    std::vector<Scheme> schemes = all_schemes();
};

struct SweepRow {
    SweepAxis axis;
    double value;
    Scheme scheme;
    double load;
    double power_w;
    double nominal_power_w;
    double power_reduction_x;
    double freq_mhz;
    VoltagePair pair;
};

inline std::vector<SweepRow> sweep_point(const SweepContext& ctx, SweepAxis axis, double value)
{
    AppProfile prof = ctx.profile;
    double load = ctx.base_load;
    switch (axis) {
    case SweepAxis::Workload: load = value; break;
    case SweepAxis::Alpha: prof = with_alpha(prof, value); break;
    case SweepAxis::Beta: prof = with_beta(prof, value); break;
    }
    prof.validate();
    const auto& curves = *ctx.curves;
    const auto grids = RailGrids::for_curves(curves, ctx.grid);
    const auto s_w = WorkloadFactor::from_load(load);
    const double nominal = nominal_power(prof, curves, ctx.weights);

    std::vector<SweepRow> rows;
    for (auto scheme : ctx.schemes) {
        SweepRow r{axis, value, scheme, load, 0.0, nominal, 0.0, 0.0, nominal_pair(curves)};
        if (scheme == Scheme::PowerGating) {
            r.power_w = power_gating_power(prof, curves, load, ctx.n_nodes, ctx.weights);
            r.freq_mhz = prof.f_nom_mhz;
        } else {
            const auto op = optimize(scheme, prof, curves, s_w, grids, ctx.weights);
            r.power_w = op.power_w;
            r.freq_mhz = op.freq_mhz;
            r.pair = op.pair;
        }
        r.power_reduction_x = nominal / r.power_w;
        rows.push_back(r);
    }
    return rows;
}

// Axis points are evaluated concurrently; rows come back in axis order.
inline std::vector<SweepRow> sweep(const SweepContext& ctx, SweepAxis axis, const std::vector<double>& values)
{
    if (!ctx.curves) {
        throw ConfigError("sweep needs characterization curves");
    }
    std::vector<std::future<std::vector<SweepRow>>> jobs;
    jobs.reserve(values.size());
    for (double v : values) {
        jobs.push_back(std::async(std::launch::async, [&ctx, axis, v] { return sweep_point(ctx, axis, v); }));
    }
    std::vector<SweepRow> out;
    for (auto& j : jobs) {
        auto rows = j.get();
        out.insert(out.end(), rows.begin(), rows.end());
    }
    return out;
}

inline constexpr std::string_view sweep_csv_header =
    "axis,value,scheme,load,power_w,nominal_power_w,power_reduction_x,freq_mhz,v_core,v_bram";

inline std::string sweep_to_csv(const std::vector<SweepRow>& rows)
{
    using text::format_double;
    std::string out(sweep_csv_header);
    out += '\n';
    for (const auto& r : rows) {
        out += std::string(to_string(r.axis)) + ',' + format_double(r.value) + ','
            + std::string(to_string(r.scheme)) + ',' + format_double(r.load) + ','
            + format_double(r.power_w) + ',' + format_double(r.nominal_power_w) + ','
            + format_double(r.power_reduction_x) + ',' + format_double(r.freq_mhz) + ','
            + format_double(r.pair.v_core) + ',' + format_double(r.pair.v_bram) + '\n';
    }
    return out;
}

inline std::vector<SweepRow> sweep_from_csv(std::string_view csv)
{
    const auto ls = text::lines(csv);
    if (ls.empty() || text::trim(ls[0]) != sweep_csv_header) {
        throw ConfigError("sweep CSV: unexpected header");
    }
    std::vector<SweepRow> out;
    for (std::size_t i = 1; i < ls.size(); ++i) {
        if (text::trim(ls[i]).empty()) {
            continue;
        }
        const auto f = text::split(ls[i]);
        const auto where = "sweep CSV line " + std::to_string(i + 1);
        if (f.size() != 10) {
            throw ConfigError(where + ": expected 10 fields");
        }
        const auto axis = parse_sweep_axis(f[0]);
        const auto scheme = parse_scheme(f[2]);
        if (!axis || !scheme) {
            throw ConfigError(where + ": unknown axis or scheme");
        }
        SweepRow r{*axis, 0.0, *scheme, 0.0, 0.0, 0.0, 0.0, 0.0, {}};
        const bool ok = text::parse_double(f[1], r.value) && text::parse_double(f[3], r.load)
            && text::parse_double(f[4], r.power_w) && text::parse_double(f[5], r.nominal_power_w)
            && text::parse_double(f[6], r.power_reduction_x) && text::parse_double(f[7], r.freq_mhz)
            && text::parse_double(f[8], r.pair.v_core) && text::parse_double(f[9], r.pair.v_bram);
        if (!ok) {
            throw ConfigError(where + ": malformed number");
        }
        out.push_back(r);
    }
    return out;
}

} // namespace railscale
