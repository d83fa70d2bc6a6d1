#pragma once

// Central-controller loop: per time step, predict the next load bin,
// provision frequency with the throughput margin, pick voltages per scheme
// and account energy, PLL overhead, QoS violations and mispredictions.
//
// The predictor runs once per trace and every scheme replays the same
// prediction sequence, so scheme differences come from the voltage policy
// alone.

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "railscale/characterization.hpp"
#include "railscale/error.hpp"
#include "railscale/optimizer.hpp"
#include "railscale/pll.hpp"
#include "railscale/predictor.hpp"
#include "railscale/text_io.hpp"
#include "railscale/timing_power.hpp"
#include "railscale/workload.hpp"

namespace railscale {

inline const std::vector<Scheme>& all_schemes()
{
    static const std::vector<Scheme> s{Scheme::Proposed, Scheme::CoreOnly, Scheme::BramOnly,
        Scheme::FrequencyOnly, Scheme::PowerGating};
    return s;
}

struct SimConfig {
    WorkloadTrace trace;
    AppProfile profile;
    std::shared_ptr<const ResourceCurves> curves;
    std::vector<Scheme> schemes = all_schemes();
    GridSpec grid;
    PredictorParams predictor;
    PllConfig pll;
    std::size_t n_nodes = 10;
    CoreWeights weights;
    // Empty means continuous frequency; otherwise the smallest menu entry
    // at or above the requested frequency is used (f_nom is always allowed).
    std::vector<double> frequency_menu_mhz;
    std::optional<nlohmann::json> pretrained_predictor;
    std::optional<PhasePriors> phase_priors;

    void validate() const
    {
        trace.validate();
        profile.validate();
        if (!curves) {
            throw ConfigError("no characterization curves loaded");
        }
        if (schemes.empty()) {
            throw ConfigError("scheme list is empty");
        }
        if (n_nodes < 1) {
            throw ConfigError("n_nodes must be >= 1");
        }
        predictor.validate();
        pll.validate();
        weights.validate();
        if (trace.size() <= predictor.warmup_steps) {
            throw ConfigError("trace has " + std::to_string(trace.size())
                + " steps, not more than the warm-up length "
                + std::to_string(predictor.warmup_steps));
        }
        if (!(trace.tau_s > pll.t_lock_s)) {
            throw ConfigError("step length tau_s must exceed the PLL lock time");
        }
        for (double f : frequency_menu_mhz) {
            if (!(f > 0.0 && f <= profile.f_nom_mhz)) {
                throw ConfigError("frequency menu entry " + text::format_double(f)
                    + " MHz outside (0, f_nom]");
            }
        }
        RailGrids::for_curves(*curves, grid);
    }
};

// What the controller decided before a step ran.
struct StepPlan {
    BinIndex actual_bin = 0;
    std::optional<BinIndex> predicted_bin;  // empty during warm-up
    bool mispredicted = false;
};

// Markov predictor run over the trace: train for the warm-up steps, then
// predict-and-observe.
inline std::vector<StepPlan> plan_markov(const WorkloadTrace& trace, const PredictorParams& params,
    const std::optional<nlohmann::json>& pretrained = std::nullopt,
    const std::optional<PhasePriors>& priors = std::nullopt)
{
    MarkovPredictor pred = pretrained ? MarkovPredictor::from_json(*pretrained)
                                      : MarkovPredictor(params);
    if (pred.bins() != params.bins) {
        throw ConfigError("pretrained predictor bin count differs from configuration");
    }
    if (priors) {
        pred.set_phase_priors(*priors);
    }
    std::vector<StepPlan> plan(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const BinIndex actual = discretize(trace.loads[i], params.bins);
        plan[i].actual_bin = actual;
        if (i < params.warmup_steps) {
            if (!pretrained) {
                pred.train(actual);
            } else {
                pred.observe(actual);
            }
            continue;
        }
        plan[i].predicted_bin = pred.predict_next();
        plan[i].mispredicted = pred.observe(actual);
    }
    return plan;
}

// Perfect-knowledge plan: every post-warm-up step predicts its own bin.
inline std::vector<StepPlan> plan_oracle(const WorkloadTrace& trace, const PredictorParams& params)
{
    std::vector<StepPlan> plan(trace.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
        plan[i].actual_bin = discretize(trace.loads[i], params.bins);
        if (i >= params.warmup_steps) {
            plan[i].predicted_bin = plan[i].actual_bin;
        }
    }
    return plan;
}

// Fraction of nominal throughput provisioned for a predicted bin: the bin's
// upper edge plus the margin, capped at full throughput.
inline double provisioned_capacity(BinIndex predicted, const PredictorParams& params)
{
    return std::min(1.0, bin_capacity(predicted, params.bins) + params.margin);
}

struct StepRecord {
    std::size_t step = 0;
    double actual_load = 0.0;
    std::optional<BinIndex> predicted_bin;
    double freq_mhz = 0.0;
    VoltagePair pair;
    double capacity = 1.0;
    std::size_t active_nodes = 0;
    double power_w = 0.0;         // platform power, all nodes
    double energy_j = 0.0;        // power_w * tau + pll_overhead_j
    double pll_overhead_j = 0.0;
    bool qos_violated = false;
    bool mispredicted = false;
};

struct SchemeReport {
    Scheme scheme = Scheme::Proposed;
    std::vector<StepRecord> steps;
    double total_energy_j = 0.0;
    double nominal_energy_j = 0.0;
    double pll_overhead_j = 0.0;
    double mean_power_w = 0.0;
    double power_reduction_x = 0.0;
    double qos_violation_rate = 0.0;
    double misprediction_rate = 0.0;
};

struct SimReport {
    std::string profile;
    std::size_t n_steps = 0;
    std::size_t warmup_steps = 0;
    double tau_s = 0.0;
    std::size_t n_nodes = 0;
    double nominal_power_w = 0.0;  // platform, all nodes at nominal V/f
    std::vector<SchemeReport> schemes;

    const SchemeReport& at(Scheme s) const
    {
        for (const auto& r : schemes) {
            if (r.scheme == s) {
                return r;
            }
        }
        throw std::out_of_range("scheme not in report: " + std::string(to_string(s)));
    }
};

namespace detail {

struct StepSetting {
    double freq_mhz;
    VoltagePair pair;
    double node_power_w;
    double capacity;
    std::size_t active_nodes;
};

inline double menu_frequency(const SimConfig& cfg, double requested_mhz)
{
    const double f_nom = cfg.profile.f_nom_mhz;
    if (cfg.frequency_menu_mhz.empty()) {
        return std::min(requested_mhz, f_nom);
    }
    double best = f_nom;
    for (double f : cfg.frequency_menu_mhz) {
        if (f >= requested_mhz && f < best) {
            best = f;
        }
    }
    return best;
}

class SchemeEvaluator {
public:
    SchemeEvaluator(const SimConfig& cfg, Scheme scheme)
        : cfg_(cfg), scheme_(scheme), grids_(RailGrids::for_curves(*cfg.curves, cfg.grid)),
          nominal_w_(nominal_power(cfg.profile, *cfg.curves, cfg.weights))
    {
    }

    StepSetting setting_for(double capacity)
    {
        const auto it = cache_.find(capacity);
        if (it != cache_.end()) {
            return it->second;
        }
        const auto s = compute(capacity);
        cache_.emplace(capacity, s);
        return s;
    }

private:
    StepSetting compute(double capacity) const
    {
        const auto& prof = cfg_.profile;
        const auto& curves = *cfg_.curves;
        if (scheme_ == Scheme::PowerGating) {
            const auto active = active_nodes(capacity, cfg_.n_nodes);
            const double frac = static_cast<double>(active) / static_cast<double>(cfg_.n_nodes);
            return {prof.f_nom_mhz, nominal_pair(curves), frac * nominal_w_, frac, active};
        }
        const double freq = menu_frequency(cfg_, capacity * prof.f_nom_mhz);
        if (freq == prof.f_nom_mhz) {
            return {freq, nominal_pair(curves), nominal_w_, 1.0, cfg_.n_nodes};
        }
        const WorkloadFactor s_w(prof.f_nom_mhz / freq);
        const auto op = optimize(scheme_, prof, curves, s_w, grids_, cfg_.weights);
        return {freq, op.pair, op.power_w, freq / prof.f_nom_mhz, cfg_.n_nodes};
    }

    const SimConfig& cfg_;
    Scheme scheme_;
    RailGrids grids_;
    double nominal_w_;
    std::map<double, StepSetting> cache_;
};

} // namespace detail

inline SchemeReport run_scheme(const SimConfig& cfg, Scheme scheme, const std::vector<StepPlan>& plan)
{
    detail::SchemeEvaluator eval(cfg, scheme);
    const double tau = cfg.trace.tau_s;
    const double nodes = static_cast<double>(cfg.n_nodes);
    const double nominal_platform_w = nodes * nominal_power(cfg.profile, *cfg.curves, cfg.weights);

    SchemeReport rep;
    rep.scheme = scheme;
    rep.steps.reserve(plan.size());
    double prev_freq = cfg.profile.f_nom_mhz;
    std::size_t qos = 0;
    std::size_t misses = 0;
    std::size_t predicted_steps = 0;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        const auto& p = plan[i];
        const double capacity =
            p.predicted_bin ? provisioned_capacity(*p.predicted_bin, cfg.predictor) : 1.0;
        const auto s = eval.setting_for(capacity);

        StepRecord r;
        r.step = i;
        r.actual_load = cfg.trace.loads[i];
        r.predicted_bin = p.predicted_bin;
        r.freq_mhz = s.freq_mhz;
        r.pair = s.pair;
        r.capacity = s.capacity;
        r.active_nodes = s.active_nodes;
        r.power_w = nodes * s.node_power_w;
        if (s.freq_mhz != prev_freq) {
            r.pll_overhead_j = nodes * step_overhead_energy(cfg.pll, s.node_power_w, tau).energy_j;
        }
        prev_freq = s.freq_mhz;
        r.energy_j = r.power_w * tau + r.pll_overhead_j;
        r.qos_violated = r.actual_load > r.capacity;
        r.mispredicted = p.mispredicted;

        rep.total_energy_j += r.energy_j;
        rep.nominal_energy_j += nominal_platform_w * tau;
        rep.pll_overhead_j += r.pll_overhead_j;
        qos += r.qos_violated ? 1 : 0;
        if (p.predicted_bin) {
            ++predicted_steps;
            misses += p.mispredicted ? 1 : 0;
        }
        rep.steps.push_back(r);
    }
    const double n = static_cast<double>(plan.size());
    rep.mean_power_w = rep.total_energy_j / (tau * n);
    rep.power_reduction_x = rep.nominal_energy_j / rep.total_energy_j;
    rep.qos_violation_rate = static_cast<double>(qos) / n;
    rep.misprediction_rate =
        predicted_steps ? static_cast<double>(misses) / static_cast<double>(predicted_steps) : 0.0;
    return rep;
}

inline SimReport run_with_plan(const SimConfig& cfg, const std::vector<StepPlan>& plan)
{
    cfg.validate();
    if (plan.size() != cfg.trace.size()) {
        throw ConfigError("step plan length differs from trace length");
    }
    SimReport rep;
    rep.profile = cfg.profile.name;
    rep.n_steps = cfg.trace.size();
    rep.warmup_steps = cfg.predictor.warmup_steps;
    rep.tau_s = cfg.trace.tau_s;
    rep.n_nodes = cfg.n_nodes;
    rep.nominal_power_w = static_cast<double>(cfg.n_nodes)
        * nominal_power(cfg.profile, *cfg.curves, cfg.weights);
    for (auto s : cfg.schemes) {
        rep.schemes.push_back(run_scheme(cfg, s, plan));
    }
    return rep;
}

inline SimReport run(const SimConfig& cfg)
{
    cfg.validate();
    return run_with_plan(
        cfg, plan_markov(cfg.trace, cfg.predictor, cfg.pretrained_predictor, cfg.phase_priors));
}

struct ComparisonRow {
    Scheme scheme;
    double power_reduction_x;
    // reduction(proposed) / reduction(this scheme); empty without a proposed run.
    std::optional<double> proposed_efficiency;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
    std::optional<Scheme> best_baseline;
    // reduction(proposed) / reduction(best baseline).
    std::optional<double> efficiency_vs_best;
};

inline ComparisonTable compare_schemes(const SimReport& report)
{
    ComparisonTable t;
    std::optional<double> prop;
    for (const auto& s : report.schemes) {
        if (s.scheme == Scheme::Proposed) {
            prop = s.power_reduction_x;
        }
    }
    for (const auto& s : report.schemes) {
        ComparisonRow row{s.scheme, s.power_reduction_x, std::nullopt};
        if (prop) {
            row.proposed_efficiency = *prop / s.power_reduction_x;
        }
        t.rows.push_back(row);
        if (s.scheme != Scheme::Proposed
            && (!t.best_baseline || s.power_reduction_x > report.at(*t.best_baseline).power_reduction_x)) {
            t.best_baseline = s.scheme;
        }
    }
    if (prop && t.best_baseline) {
        t.efficiency_vs_best = *prop / report.at(*t.best_baseline).power_reduction_x;
    }
    return t;
}

inline ComparisonTable compare_schemes(const SimConfig& cfg)
{
    return compare_schemes(run(cfg));
}

inline constexpr std::string_view steps_csv_header =
    "step,actual_load,predicted_bin,freq_mhz,v_core,v_bram,power_w,energy_j,qos,mispredict";

inline std::string steps_to_csv(const SchemeReport& rep)
{
    using text::format_double;
    std::string out(steps_csv_header);
    out += '\n';
    for (const auto& r : rep.steps) {
        out += std::to_string(r.step);
        out += ',' + format_double(r.actual_load);
        out += ',' + (r.predicted_bin ? std::to_string(*r.predicted_bin) : std::string());
        out += ',' + format_double(r.freq_mhz);
        out += ',' + format_double(r.pair.v_core);
        out += ',' + format_double(r.pair.v_bram);
        out += ',' + format_double(r.power_w);
        out += ',' + format_double(r.energy_j);
        out += r.qos_violated ? ",1" : ",0";
        out += r.mispredicted ? ",1\n" : ",0\n";
    }
    return out;
}

// Reads back what steps_to_csv writes. Fields not in the CSV keep their
// defaults.
inline std::vector<StepRecord> steps_from_csv(std::string_view csv)
{
    const auto ls = text::lines(csv);
    if (ls.empty() || text::trim(ls[0]) != steps_csv_header) {
        throw ConfigError("step CSV: unexpected header");
    }
    std::vector<StepRecord> out;
    for (std::size_t i = 1; i < ls.size(); ++i) {
        if (text::trim(ls[i]).empty()) {
            continue;
        }
        const auto f = text::split(ls[i]);
        const auto where = "step CSV line " + std::to_string(i + 1);
        if (f.size() != 10) {
            throw ConfigError(where + ": expected 10 fields");
        }
        StepRecord r;
        double step = 0.0;
        double bin = 0.0;
        double qos = 0.0;
        double miss = 0.0;
        bool ok = text::parse_double(f[0], step) && text::parse_double(f[1], r.actual_load)
            && (f[2].empty() || text::parse_double(f[2], bin))
            && text::parse_double(f[3], r.freq_mhz) && text::parse_double(f[4], r.pair.v_core)
            && text::parse_double(f[5], r.pair.v_bram) && text::parse_double(f[6], r.power_w)
            && text::parse_double(f[7], r.energy_j) && text::parse_double(f[8], qos)
            && text::parse_double(f[9], miss);
        if (!ok) {
            throw ConfigError(where + ": malformed number");
        }
        r.step = static_cast<std::size_t>(step);
        if (!f[2].empty()) {
            r.predicted_bin = static_cast<BinIndex>(bin);
        }
        r.qos_violated = qos != 0.0;
        r.mispredicted = miss != 0.0;
        out.push_back(r);
    }
    return out;
}

inline nlohmann::json summary_json(const SimReport& rep)
{
    nlohmann::json schemes = nlohmann::json::array();
    for (const auto& s : rep.schemes) {
        schemes.push_back({{"scheme", to_string(s.scheme)}, {"total_energy_j", s.total_energy_j},
            {"nominal_energy_j", s.nominal_energy_j}, {"pll_overhead_j", s.pll_overhead_j},
            {"mean_power_w", s.mean_power_w}, {"power_reduction_x", s.power_reduction_x},
            {"qos_violation_rate", s.qos_violation_rate},
            {"misprediction_rate", s.misprediction_rate}});
    }
    const auto cmp = compare_schemes(rep);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : cmp.rows) {
        rows.push_back({{"scheme", to_string(r.scheme)}, {"power_reduction_x", r.power_reduction_x},
            {"proposed_efficiency",
                r.proposed_efficiency ? nlohmann::json(*r.proposed_efficiency) : nlohmann::json()}});
    }
    return {{"profile", rep.profile}, {"n_steps", rep.n_steps}, {"warmup_steps", rep.warmup_steps},
        {"tau_s", rep.tau_s}, {"n_nodes", rep.n_nodes}, {"nominal_power_w", rep.nominal_power_w},
        {"schemes", schemes},
        {"comparison",
            {{"rows", rows},
                {"best_baseline",
                    cmp.best_baseline ? nlohmann::json(to_string(*cmp.best_baseline))
                                      : nlohmann::json()},
                {"efficiency_vs_best",
                    cmp.efficiency_vs_best ? nlohmann::json(*cmp.efficiency_vs_best)
                                           : nlohmann::json()}}}};
}

} // namespace railscale
