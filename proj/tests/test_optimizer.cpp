#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"
#include "railscale/optimizer.hpp"
#include "test_support.hpp"

using namespace railscale;

namespace {

const ResourceCurves& curves()
{
    return *fixtures::default_curves();
}

RailGrids grids()
{
    return RailGrids::for_curves(curves());
}

} // namespace

TEST(Grid, DefaultSpacing)
{
    const auto g = grids();
    EXPECT_EQ(g.core.size(), 13u);
    EXPECT_EQ(g.bram.size(), 19u);
    EXPECT_EQ(g.core.at(0), 0.5);
    EXPECT_EQ(g.core.at(12), 0.8);
    EXPECT_EQ(g.bram.at(18), 0.95);
    EXPECT_EQ(g.bram.at(7), 0.675);
}

TEST(Grid, RejectsMisalignedNominal)
{
    EXPECT_THROW(RailGrids::for_curves(curves(), GridSpec{0.5, 0.04}), ConfigError);
    EXPECT_THROW(RailGrids::for_curves(curves(), GridSpec{0.45, 0.025}), ConfigError);
}

TEST(Scheme, NamesRoundTrip)
{
    for (auto s : {Scheme::Proposed, Scheme::CoreOnly, Scheme::BramOnly, Scheme::FrequencyOnly, Scheme::PowerGating}) {
        EXPECT_EQ(parse_scheme(to_string(s)), s);
    }
    EXPECT_FALSE(parse_scheme("turbo"));
}

// Values below were produced by the brute-force reference in oracle.hpp.
TEST(Joint, FrozenOperatingPoints)
{
    const auto p = fixtures::default_profile();
    auto op = optimize_joint(p, curves(), WorkloadFactor(2.0), grids());
    EXPECT_EQ(op.pair, (VoltagePair{0.55, 0.75}));
    EXPECT_NEAR(op.power_w, 5.2913299999999994, 1e-12);
    EXPECT_DOUBLE_EQ(op.freq_mhz, 56.5);

    op = optimize_joint(p, curves(), WorkloadFactor(10.0), grids());
    EXPECT_EQ(op.pair, (VoltagePair{0.5, 0.5}));
    EXPECT_NEAR(op.power_w, 2.2702999999999998, 1e-12);

    op = optimize_joint(p, curves(), WorkloadFactor(1.0), grids());
    EXPECT_EQ(op.pair, nominal_pair(curves()));
    EXPECT_DOUBLE_EQ(op.power_w, 20.0);
}

TEST(Joint, NoMemoryShareParksBramAtFloor)
{
    const auto p = with_alpha(fixtures::default_profile(), 0.0);
    const auto op = optimize_joint(p, curves(), WorkloadFactor(2.0), grids());
    EXPECT_EQ(op.pair, (VoltagePair{0.575, 0.5}));
    EXPECT_NEAR(op.power_w, 5.1342999999999996, 1e-12);
}

TEST(Joint, LowLoadsClampToFloor)
{
    const auto p = fixtures::default_profile();
    const std::pair<double, double> expected[] = {{0.10, 2.2703}, {0.15, 2.47377}, {0.20, 2.67724}};
    for (const auto& [load, power] : expected) {
        const auto op = optimize_joint(p, curves(), WorkloadFactor::from_load(load), grids());
        EXPECT_EQ(op.pair, (VoltagePair{0.5, 0.5})) << load;
        EXPECT_NEAR(op.power_w, power, 1e-9) << load;
    }
}

TEST(SingleRail, FrozenOperatingPoints)
{
    const auto p = fixtures::default_profile();
    auto op = optimize_core_only(p, curves(), WorkloadFactor(1.25), grids());
    EXPECT_EQ(op.pair, (VoltagePair{0.70, 0.95}));
    EXPECT_NEAR(op.power_w, 13.982559999999999, 1e-12);
    op = optimize_core_only(p, curves(), WorkloadFactor(2.0), grids());
    EXPECT_EQ(op.pair, (VoltagePair{0.55, 0.95}));
    EXPECT_NEAR(op.power_w, 8.0530299999999997, 1e-12);

    op = optimize_bram_only(p, curves(), WorkloadFactor(1.25), grids());
    EXPECT_EQ(op.pair, (VoltagePair{0.80, 0.70}));
    EXPECT_NEAR(op.power_w, 14.61164, 1e-12);
    op = optimize_bram_only(p, curves(), WorkloadFactor(2.0), grids());
    EXPECT_EQ(op.pair, (VoltagePair{0.80, 0.60}));
    EXPECT_NEAR(op.power_w, 11.3279, 1e-12);
}

TEST(FrequencyOnly, ScalesDynamicPowerOnly)
{
    // 9/4 + 6 + 0.4 * (5/4 + 7.5)
    const auto p = fixtures::default_profile();
    EXPECT_DOUBLE_EQ(frequency_only_power(p, curves(), WorkloadFactor(4.0)), 11.75);
    const auto op = optimize(Scheme::FrequencyOnly, p, curves(), WorkloadFactor(4.0), grids());
    EXPECT_EQ(op.pair, nominal_pair(curves()));
    EXPECT_DOUBLE_EQ(op.freq_mhz, p.f_nom_mhz / 4.0);
}

TEST(PowerGating, ActiveNodeCount)
{
    EXPECT_EQ(active_nodes(1.0, 10), 10u);
    EXPECT_EQ(active_nodes(0.5, 10), 5u);
    EXPECT_EQ(active_nodes(0.41, 10), 5u);
    EXPECT_EQ(active_nodes(0.3, 10), 3u);  // 0.3 * 10 is 3.0000000000000004
    EXPECT_EQ(active_nodes(0.01, 10), 1u);
    EXPECT_THROW(active_nodes(0.0, 10), RangeError);
    EXPECT_THROW(active_nodes(0.5, 0), RangeError);

    const auto p = fixtures::default_profile();
    EXPECT_DOUBLE_EQ(power_gating_power(p, curves(), 1.0, 10), 20.0);
    EXPECT_DOUBLE_EQ(power_gating_power(p, curves(), 0.5, 10), 10.0);
    EXPECT_DOUBLE_EQ(power_gating_power(p, curves(), 0.41, 10), 10.0);
    EXPECT_THROW(optimize(Scheme::PowerGating, p, curves(), WorkloadFactor(2.0), grids()), std::exception);
}

TEST(PowerGating, BeatsJointAtLightestLoad)
{
    const auto p = fixtures::default_profile();
    const double pg = power_gating_power(p, curves(), 0.10, 10);
    EXPECT_DOUBLE_EQ(pg, 2.0);
    EXPECT_LT(pg, optimize_joint(p, curves(), WorkloadFactor::from_load(0.10), grids()).power_w);
}

// Property: on random profiles and slack factors the search matches the
// exhaustive reference exactly.
TEST(Joint, MatchesReferenceOnRandomInputs)
{
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ua(0.0, 1.0);
    std::uniform_real_distribution<double> ub(0.0, 1.0);
    std::uniform_real_distribution<double> us(1.0, 8.0);
    const auto base = fixtures::default_profile();
    for (int i = 0; i < 50; ++i) {
        const auto p = with_beta(with_alpha(base, ua(rng)), ub(rng));
        const double s_w = us(rng);
        const oracle::Model m{curves(), p, {}};
        const auto ref = oracle::joint(m, s_w);
        const auto op = optimize_joint(p, curves(), WorkloadFactor(s_w), grids());
        EXPECT_EQ(op.pair, (VoltagePair{ref.v_core, ref.v_bram})) << "alpha " << p.alpha() << " sw " << s_w;
        EXPECT_NEAR(op.power_w, ref.power, 1e-12 * ref.power);

        const auto rc = oracle::core_only(m, s_w);
        EXPECT_EQ(optimize_core_only(p, curves(), WorkloadFactor(s_w), grids()).pair.v_core, rc.v_core);
        const auto rb = oracle::bram_only(m, s_w);
        EXPECT_EQ(optimize_bram_only(p, curves(), WorkloadFactor(s_w), grids()).pair.v_bram, rb.v_bram);
    }
}

// Property: the chosen pair is timing-feasible and the joint search never
// loses to a single-rail or frequency-only point.
TEST(Joint, FeasibleAndDominantAcrossLoads)
{
    for (const auto& name : bundled_profile_names()) {
        const auto p = fixtures::profile(name);
        for (int pct = 5; pct <= 100; pct += 5) {
            const auto s_w = WorkloadFactor::from_load(pct / 100.0);
            const auto joint = optimize_joint(p, curves(), s_w, grids());
            EXPECT_TRUE(timing_feasible(p, curves(), joint.pair, s_w));
            const auto core = optimize_core_only(p, curves(), s_w, grids());
            const auto bram = optimize_bram_only(p, curves(), s_w, grids());
            EXPECT_LE(joint.power_w, core.power_w) << name << " " << pct;
            EXPECT_LE(joint.power_w, bram.power_w) << name << " " << pct;
            EXPECT_LE(core.power_w, frequency_only_power(p, curves(), s_w)) << name << " " << pct;
            EXPECT_LE(bram.power_w, frequency_only_power(p, curves(), s_w)) << name << " " << pct;
            EXPECT_LE(joint.power_w, nominal_power(p, curves()));
        }
    }
}

TEST(Joint, EqualPowerTiesPreferHigherVoltages)
{
    // Flat curves: every pair is feasible and costs the same, so the tie
    // rule alone decides.
    ResourceCurves::TableSet t;
    for (auto c : all_resource_classes) {
        const double nom = rail_of(c) == Rail::Core ? 0.8 : 0.95;
        for (auto k : all_curve_kinds) {
            t[static_cast<std::size_t>(c)][static_cast<std::size_t>(k)] =
                CurveTable(k, {{0.5, 1.0}, {nom, 1.0}});
        }
    }
    const ResourceCurves flat(t, RailNominals{});
    const auto g = RailGrids::for_curves(flat);
    const auto p = fixtures::default_profile();
    const auto op = optimize_joint(p, flat, WorkloadFactor(3.0), g);
    EXPECT_EQ(op.pair, (VoltagePair{0.8, 0.95}));
    const auto again = optimize_joint(p, flat, WorkloadFactor(3.0), g);
    EXPECT_EQ(again.pair, op.pair);
    EXPECT_EQ(again.power_w, op.power_w);
}
