#include <gtest/gtest.h>

#include <array>

#include "railscale/simulator.hpp"
#include "test_support.hpp"

using namespace railscale;

namespace {

SimConfig base_config(std::vector<double> loads)
{
    SimConfig c;
    c.trace.loads = std::move(loads);
    c.profile = fixtures::default_profile();
    c.curves = fixtures::default_curves();
    return c;
}

SimConfig default_trace_config(const std::string& profile = "tabla")
{
    SimConfig c;
    c.trace = generate(GenParams{});
    c.profile = fixtures::profile(profile);
    c.curves = fixtures::default_curves();
    return c;
}

} // namespace

TEST(Simulator, FullLoadRunsEverythingAtNominal)
{
    const auto rep = run(base_config(std::vector<double>(400, 1.0)));
    ASSERT_EQ(rep.schemes.size(), 5u);
    for (const auto& s : rep.schemes) {
        EXPECT_NEAR(s.power_reduction_x, 1.0, 1e-9) << to_string(s.scheme);
        EXPECT_EQ(s.pll_overhead_j, 0.0);
        for (const auto& r : s.steps) {
            ASSERT_EQ(r.pair, (VoltagePair{0.8, 0.95}));
            ASSERT_EQ(r.freq_mhz, 113.0);
        }
    }
}

TEST(Simulator, ConstantHalfLoadComposesOptimizer)
{
    // Bin 12 of 25 -> capacity 13/25 + 0.05 = 0.57.
    auto cfg = base_config(std::vector<double>(400, 0.5));
    cfg.pll.dual = true;
    const auto rep = run(cfg);
    const auto& prop = rep.at(Scheme::Proposed);
    const auto grids = RailGrids::for_curves(*cfg.curves);
    const auto op = optimize_joint(cfg.profile, *cfg.curves, WorkloadFactor(1.0 / 0.57), grids);
    const auto& last = prop.steps.back();
    EXPECT_EQ(last.pair, op.pair);
    EXPECT_NEAR(last.freq_mhz, 0.57 * 113.0, 1e-9);
    EXPECT_NEAR(last.power_w, 10.0 * op.power_w, 1e-9);
    EXPECT_FALSE(last.qos_violated);
    EXPECT_EQ(prop.misprediction_rate, 0.0);
    // One frequency change when warm-up ends.
    std::size_t changes = 0;
    for (const auto& r : prop.steps) {
        changes += r.pll_overhead_j > 0.0;
    }
    EXPECT_EQ(changes, 1u);
    EXPECT_NEAR(prop.pll_overhead_j, 10.0 * 2.0 * 0.1 * 1.0, 1e-12);

    const auto& pg = rep.at(Scheme::PowerGating);
    EXPECT_EQ(pg.steps.back().active_nodes, 6u);
    EXPECT_DOUBLE_EQ(pg.steps.back().power_w, 6.0 * 20.0);
}

TEST(Simulator, EnergyAccountsForEveryStep)
{
    const auto cfg = default_trace_config();
    const auto rep = run(cfg);
    for (const auto& s : rep.schemes) {
        double sum = 0.0, pll = 0.0;
        for (const auto& r : s.steps) {
            ASSERT_NEAR(r.energy_j, r.power_w * cfg.trace.tau_s + r.pll_overhead_j, 1e-9);
            sum += r.energy_j;
            pll += r.pll_overhead_j;
        }
        EXPECT_NEAR(sum, s.total_energy_j, 1e-9 * sum);
        EXPECT_NEAR(pll, s.pll_overhead_j, 1e-12 + 1e-9 * pll);
        EXPECT_NEAR(s.nominal_energy_j, rep.nominal_power_w * 4096.0, 1e-6);
        EXPECT_NEAR(s.power_reduction_x, s.nominal_energy_j / s.total_energy_j, 1e-12);
    }
}

TEST(Simulator, DefaultTraceOrdering)
{
    const auto rep = run(default_trace_config());
    const double prop = rep.at(Scheme::Proposed).power_reduction_x;
    const double core = rep.at(Scheme::CoreOnly).power_reduction_x;
    const double bram = rep.at(Scheme::BramOnly).power_reduction_x;
    const double freq = rep.at(Scheme::FrequencyOnly).power_reduction_x;
    EXPECT_GT(prop, core);
    EXPECT_GT(core, bram);
    EXPECT_GT(bram, freq);
    EXPECT_GT(freq, 1.0);
    EXPECT_GE(prop, 3.0);
    const auto cmp = compare_schemes(rep);
    ASSERT_TRUE(cmp.efficiency_vs_best);
    EXPECT_GT(*cmp.efficiency_vs_best, 1.0);
    EXPECT_NE(cmp.best_baseline, Scheme::Proposed);
}

// Property: on the same plan, the joint scheme never spends more energy
// than a single-rail or frequency-only scheme in any step.
TEST(Simulator, PerStepDominance)
{
    const auto rep = run(default_trace_config("stripes"));
    const auto& p = rep.at(Scheme::Proposed).steps;
    const auto& c = rep.at(Scheme::CoreOnly).steps;
    const auto& b = rep.at(Scheme::BramOnly).steps;
    const auto& f = rep.at(Scheme::FrequencyOnly).steps;
    for (std::size_t i = 0; i < p.size(); ++i) {
        ASSERT_LE(p[i].power_w, c[i].power_w + 1e-12);
        ASSERT_LE(p[i].power_w, b[i].power_w + 1e-12);
        ASSERT_LE(c[i].power_w, f[i].power_w + 1e-12);
        ASSERT_LE(b[i].power_w, f[i].power_w + 1e-12);
        ASSERT_EQ(p[i].freq_mhz, f[i].freq_mhz);
    }
}

TEST(Simulator, PerfectPredictionHasNoQosViolations)
{
    const auto cfg = default_trace_config();
    const auto rep = run_with_plan(cfg, plan_oracle(cfg.trace, cfg.predictor));
    for (const auto& s : rep.schemes) {
        EXPECT_EQ(s.qos_violation_rate, 0.0) << to_string(s.scheme);
        EXPECT_EQ(s.misprediction_rate, 0.0);
    }
    EXPECT_GT(rep.at(Scheme::Proposed).power_reduction_x, 3.0);
}

TEST(Simulator, QosFollowsCapacity)
{
    const auto rep = run(default_trace_config());
    for (const auto& s : rep.schemes) {
        for (const auto& r : s.steps) {
            ASSERT_EQ(r.qos_violated, r.actual_load > r.capacity);
        }
    }
}

TEST(Simulator, ReproducibleBitForBit)
{
    const auto cfg = default_trace_config("proteus");
    const auto a = run(cfg);
    const auto b = run(cfg);
    for (std::size_t i = 0; i < a.schemes.size(); ++i) {
        EXPECT_EQ(steps_to_csv(a.schemes[i]), steps_to_csv(b.schemes[i]));
    }
    EXPECT_EQ(summary_json(a).dump(), summary_json(b).dump());
}

TEST(Simulator, PeriodicTraceRarelyMispredicts)
{
    std::vector<double> loads;
    for (int i = 0; i < 1200; ++i) {
        loads.push_back(std::array{0.2, 0.45, 0.7, 0.95}[i % 4]);
    }
    const auto rep = run(base_config(loads));
    EXPECT_LT(rep.at(Scheme::Proposed).misprediction_rate, 0.05);
    EXPECT_EQ(rep.at(Scheme::Proposed).qos_violation_rate, 0.0);
    EXPECT_GT(rep.at(Scheme::Proposed).pll_overhead_j, 0.0);
}

TEST(Simulator, FrequencyMenuRoundsUp)
{
    auto cfg = base_config(std::vector<double>(300, 0.3));
    cfg.frequency_menu_mhz = {30.0, 50.0, 90.0};
    cfg.schemes = {Scheme::FrequencyOnly};
    const auto rep = run(cfg);
    // Bin 7 -> 8/25 + 0.05 = 0.37 of 113 MHz = 41.81 -> 50 MHz.
    EXPECT_DOUBLE_EQ(rep.schemes[0].steps.back().freq_mhz, 50.0);
    EXPECT_NEAR(rep.schemes[0].steps.back().capacity, 50.0 / 113.0, 1e-12);
}

TEST(Simulator, ConfigValidation)
{
    auto cfg = base_config(std::vector<double>(100, 0.5));
    EXPECT_THROW(run(cfg), ConfigError);  // not longer than warm-up
    cfg = base_config(std::vector<double>(300, 0.5));
    cfg.trace.tau_s = 5e-6;
    EXPECT_THROW(run(cfg), ConfigError);
    cfg = base_config(std::vector<double>(300, 0.5));
    cfg.schemes.clear();
    EXPECT_THROW(run(cfg), ConfigError);
    cfg = base_config(std::vector<double>(300, 0.5));
    cfg.frequency_menu_mhz = {200.0};
    EXPECT_THROW(run(cfg), ConfigError);
}

TEST(Simulator, PretrainedPredictorSkipsLearning)
{
    MarkovPredictor pred(PredictorParams{});
    for (int i = 0; i < 50; ++i) {
        pred.train(12);
    }
    auto cfg = base_config(std::vector<double>(300, 0.5));
    cfg.pretrained_predictor = pred.to_json();
    const auto plan = plan_markov(cfg.trace, cfg.predictor, cfg.pretrained_predictor);
    for (std::size_t i = 200; i < plan.size(); ++i) {
        ASSERT_EQ(plan[i].predicted_bin, 12u);
    }
    cfg.predictor.bins = 30;
    EXPECT_THROW(plan_markov(cfg.trace, cfg.predictor, cfg.pretrained_predictor), ConfigError);
}

TEST(StepCsv, RoundTrip)
{
    const auto rep = run(base_config(std::vector<double>(260, 0.5)));
    const auto& s = rep.at(Scheme::Proposed);
    const auto csv = steps_to_csv(s);
    EXPECT_TRUE(csv.starts_with(std::string(steps_csv_header) + "\n0,0.5,,113,0.8,0.95,"));
    const auto back = steps_from_csv(csv);
    ASSERT_EQ(back.size(), s.steps.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        EXPECT_EQ(back[i].power_w, s.steps[i].power_w);
        EXPECT_EQ(back[i].energy_j, s.steps[i].energy_j);
        EXPECT_EQ(back[i].predicted_bin, s.steps[i].predicted_bin);
        EXPECT_EQ(back[i].pair, s.steps[i].pair);
    }
    EXPECT_THROW(steps_from_csv("a,b\n"), ConfigError);
}

TEST(Summary, ComparisonRows)
{
    const auto rep = run(default_trace_config());
    const auto j = summary_json(rep);
    EXPECT_EQ(j.at("schemes").size(), 5u);
    EXPECT_EQ(j.at("comparison").at("rows").size(), 5u);
    const auto cmp = compare_schemes(rep);
    for (const auto& r : cmp.rows) {
        EXPECT_NEAR(*r.proposed_efficiency * r.power_reduction_x,
            rep.at(Scheme::Proposed).power_reduction_x, 1e-12);
    }
}
