#pragma once

// Voltage -> delay/power scaling factors for FPGA resource classes.
//
// A characterization file holds one piecewise-linear table per
// (resource class, curve kind). All factors are normalized to 1.0 at the
// nominal voltage of the rail that powers the class.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "railscale/error.hpp"
#include "railscale/text_io.hpp"

namespace railscale {

enum class ResourceClass { Logic, Routing, Memory, Dsp };
enum class CurveKind { Delay, DynamicPower, StaticPower };
enum class Rail { Core, Bram };

inline constexpr std::array<ResourceClass, 4> all_resource_classes{
    ResourceClass::Logic, ResourceClass::Routing, ResourceClass::Memory, ResourceClass::Dsp};
inline constexpr std::array<CurveKind, 3> all_curve_kinds{
    CurveKind::Delay, CurveKind::DynamicPower, CurveKind::StaticPower};

// Logic, routing and DSP share the core rail; BRAM has its own.
constexpr Rail rail_of(ResourceClass c) noexcept
{
    return c == ResourceClass::Memory ? Rail::Bram : Rail::Core;
}

constexpr std::string_view to_string(ResourceClass c) noexcept
{
    switch (c) {
    case ResourceClass::Logic: return "logic";
    case ResourceClass::Routing: return "routing";
    case ResourceClass::Memory: return "memory";
    case ResourceClass::Dsp: return "dsp";
    }
    return "?";
}

constexpr std::string_view to_string(CurveKind k) noexcept
{
    switch (k) {
    case CurveKind::Delay: return "delay";
    case CurveKind::DynamicPower: return "pdyn";
    case CurveKind::StaticPower: return "pstat";
    }
    return "?";
}

inline std::optional<ResourceClass> parse_resource_class(std::string_view s)
{
    for (auto c : all_resource_classes) {
        if (to_string(c) == s) {
            return c;
        }
    }
    return std::nullopt;
}

inline std::optional<CurveKind> parse_curve_kind(std::string_view s)
{
    for (auto k : all_curve_kinds) {
        if (to_string(k) == s) {
            return k;
        }
    }
    return std::nullopt;
}

struct CurvePoint {
    double voltage;
    double factor;
};

class CurveTable {
public:
    CurveTable() = default;

    // Points must already be sorted by voltage; see ResourceCurves for the
    // full invariant check.
    CurveTable(CurveKind kind, std::vector<CurvePoint> points)
        : kind_(kind), points_(std::move(points))
    {
    }

    CurveKind kind() const noexcept { return kind_; }
    const std::vector<CurvePoint>& points() const noexcept { return points_; }
    double min_voltage() const { return points_.front().voltage; }
    double max_voltage() const { return points_.back().voltage; }

    // Piecewise-linear lookup; exact at knots. The caller guarantees the
    // voltage lies in [min_voltage, max_voltage].
    double interpolate(double v) const
    {
        const auto it = std::lower_bound(points_.begin(), points_.end(), v,
            [](const CurvePoint& p, double x) { return p.voltage < x; });
        if (it == points_.end()) {
            return points_.back().factor;
        }
        if (it->voltage == v || it == points_.begin()) {
            return it->factor;
        }
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double w = (v - lo.voltage) / (hi.voltage - lo.voltage);
        return lo.factor + (hi.factor - lo.factor) * w;
    }

private:
    CurveKind kind_ = CurveKind::Delay;
    std::vector<CurvePoint> points_;
};

struct RailNominals {
    double v_core_nominal = 0.80;
    double v_bram_nominal = 0.95;
    double v_crash = 0.50;
};

// Immutable once constructed; all lookups are const.
class ResourceCurves {
public:
    static constexpr double nominal_tolerance = 1e-9;

    using TableSet = std::array<std::array<CurveTable, 3>, 4>;

    ResourceCurves(TableSet tables, RailNominals nominals)
        : tables_(std::move(tables)), nominals_(nominals)
    {
        validate();
    }

    double v_core_nominal() const noexcept { return nominals_.v_core_nominal; }
    double v_bram_nominal() const noexcept { return nominals_.v_bram_nominal; }
    double v_crash() const noexcept { return nominals_.v_crash; }
    double nominal(Rail r) const noexcept
    {
        return r == Rail::Core ? nominals_.v_core_nominal : nominals_.v_bram_nominal;
    }

    const CurveTable& table(ResourceClass c, CurveKind k) const
    {
        return tables_[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
    }

    double factor(ResourceClass c, CurveKind k, double v) const
    {
        const auto& t = table(c, k);
        if (!(v >= nominals_.v_crash)) {
            throw RangeError(std::string(to_string(c)) + " " + std::string(to_string(k))
                + ": voltage " + text::format_double(v) + " V is below crash voltage "
                + text::format_double(nominals_.v_crash) + " V");
        }
        if (v < t.min_voltage() || v > t.max_voltage()) {
            throw RangeError(std::string(to_string(c)) + " " + std::string(to_string(k))
                + ": voltage " + text::format_double(v) + " V outside table range ["
                + text::format_double(t.min_voltage()) + ", "
                + text::format_double(t.max_voltage()) + "] V");
        }
        return t.interpolate(v);
    }

private:
    void validate() const
    {
        if (!(nominals_.v_crash > 0.0) || !(nominals_.v_crash <= nominals_.v_core_nominal)
            || !(nominals_.v_crash <= nominals_.v_bram_nominal)) {
            throw ConfigError("crash voltage must be positive and not above either rail nominal");
        }
        for (auto c : all_resource_classes) {
            for (auto k : all_curve_kinds) {
                validate_table(c, k);
            }
        }
    }

    void validate_table(ResourceClass c, CurveKind k) const
    {
        const auto& t = table(c, k);
        const std::string name = std::string(to_string(c)) + "/" + std::string(to_string(k));
        const auto& pts = t.points();
        if (pts.empty()) {
            throw ConfigError("missing table " + name);
        }
        if (pts.size() < 2) {
            throw ConfigError("table " + name + " must have at least 2 points");
        }
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (!std::isfinite(pts[i].voltage) || !std::isfinite(pts[i].factor)
                || pts[i].factor < 0.0) {
                throw ConfigError("table " + name + ": invalid point at "
                    + text::format_double(pts[i].voltage) + " V");
            }
            if (i == 0) {
                continue;
            }
            const auto& a = pts[i - 1];
            const auto& b = pts[i];
            if (!(b.voltage > a.voltage)) {
                throw ConfigError("table " + name + ": voltages not strictly increasing at "
                    + text::format_double(b.voltage) + " V");
            }
            const bool bad = k == CurveKind::Delay ? b.factor > a.factor : b.factor < a.factor;
            if (bad) {
                throw ConfigError("table " + name + ": non-monotone factor between "
                    + text::format_double(a.voltage) + " V and " + text::format_double(b.voltage)
                    + " V (" + (k == CurveKind::Delay ? "delay must not increase with voltage"
                                                      : "power must not decrease with voltage")
                    + ")");
            }
        }
        const double vn = nominal(rail_of(c));
        if (vn < t.min_voltage() || vn > t.max_voltage()) {
            throw ConfigError("table " + name + " does not cover the nominal voltage "
                + text::format_double(vn) + " V");
        }
        const double fn = t.interpolate(vn);
        if (std::abs(fn - 1.0) > nominal_tolerance) {
            throw ConfigError("table " + name + ": factor at nominal voltage is "
                + text::format_double(fn) + ", expected 1");
        }
    }

    TableSet tables_;
    RailNominals nominals_;
};

// Parses the `class,kind,voltage_v,factor` CSV. Rows may appear in any
// order; duplicates and malformed rows are reported with their line number.
inline ResourceCurves load_curves(std::string_view source, RailNominals nominals = {})
{
    struct Row {
        CurvePoint point;
        std::size_t line;
    };
    std::array<std::array<std::vector<Row>, 3>, 4> rows;

    const auto ls = text::lines(source);
    std::size_t first = 0;
    while (first < ls.size() && text::trim(ls[first]).empty()) {
        ++first;
    }
    if (first == ls.size()) {
        throw ConfigError("characterization file is empty");
    }
    const auto header = text::split(ls[first]);
    if (header.size() != 4 || header[0] != "class" || header[1] != "kind"
        || header[2] != "voltage_v" || header[3] != "factor") {
        throw ConfigError("line " + std::to_string(first + 1)
            + ": expected header 'class,kind,voltage_v,factor'");
    }
    for (std::size_t i = first + 1; i < ls.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (text::trim(ls[i]).empty()) {
            continue;
        }
        const auto fields = text::split(ls[i]);
        const auto where = "line " + std::to_string(line_no) + ": ";
        if (fields.size() != 4) {
            throw ConfigError(where + "expected 4 fields, got " + std::to_string(fields.size()));
        }
        const auto cls = parse_resource_class(fields[0]);
        if (!cls) {
            throw ConfigError(where + "unknown resource class '" + std::string(fields[0]) + "'");
        }
        const auto kind = parse_curve_kind(fields[1]);
        if (!kind) {
            throw ConfigError(where + "unknown curve kind '" + std::string(fields[1]) + "'");
        }
        CurvePoint p{};
        if (!text::parse_double(fields[2], p.voltage) || !std::isfinite(p.voltage)
            || p.voltage <= 0.0) {
            throw ConfigError(where + "invalid voltage '" + std::string(fields[2]) + "'");
        }
        if (!text::parse_double(fields[3], p.factor) || !std::isfinite(p.factor)
            || p.factor < 0.0) {
            throw ConfigError(where + "invalid factor '" + std::string(fields[3]) + "'");
        }
        rows[static_cast<std::size_t>(*cls)][static_cast<std::size_t>(*kind)].push_back({p, line_no});
    }

    ResourceCurves::TableSet tables;
    for (auto c : all_resource_classes) {
        for (auto k : all_curve_kinds) {
            auto& rs = rows[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)];
            std::stable_sort(rs.begin(), rs.end(),
                [](const Row& a, const Row& b) { return a.point.voltage < b.point.voltage; });
            for (std::size_t i = 1; i < rs.size(); ++i) {
                if (rs[i].point.voltage == rs[i - 1].point.voltage) {
                    throw ConfigError("line " + std::to_string(rs[i].line) + ": duplicate voltage "
                        + text::format_double(rs[i].point.voltage) + " V for "
                        + std::string(to_string(c)) + "/" + std::string(to_string(k))
                        + " (first on line " + std::to_string(rs[i - 1].line) + ")");
                }
            }
            std::vector<CurvePoint> pts;
            pts.reserve(rs.size());
            for (const auto& r : rs) {
                pts.push_back(r.point);
            }
            tables[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)] =
                CurveTable(k, std::move(pts));
        }
    }
    return ResourceCurves(std::move(tables), nominals);
}

inline ResourceCurves load_curves_file(const std::string& path, RailNominals nominals = {})
{
    return load_curves(text::read_file(path), nominals);
}

inline double factor(const ResourceCurves& curves, ResourceClass c, CurveKind k, double v)
{
    return curves.factor(c, k, v);
}

} // namespace railscale
