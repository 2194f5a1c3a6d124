#include "mpmdp/simulate.hpp"

#include <gtest/gtest.h>

#include <json.hpp>
#include <map>

#include "mpmdp/lp_build.hpp"
#include "mpmdp/simplex.hpp"
#include "support/fixtures.hpp"

namespace mpmdp {
namespace {

FiniteStrategy running_witness() {
    const Mdp m = test::running_model();
    const Query q = test::running_query();
    const LpInstance lp = build_conjunctive(m, q);

    const std::map<std::string, Rational> fixture = {
        {"x[a][1]", Rational(1, 5)},  {"x[b][3]", Rational(3, 10)}, {"x[d][3]", Rational(3, 10)},
        {"x[d][2]", Rational(1, 5)},  {"y[u][1]", Rational(1, 5)},  {"y[v][3]", Rational(3, 5)},
        {"y[v][2]", Rational(1, 5)},  {"y[l]", Rational(2, 5)},     {"y[r]", Rational(4, 5)},
    };
    LpAssignment a;
    a.value.assign(lp.vars.size(), Rational(0));
    for (const auto& [name, value] : fixture) a.value[lp.variable_index(name)] = value;
    return synthesize(m, q, lp, a, Rational(1, 10));
}

/// Deterministic single-mode strategy on the single-state model.
FiniteStrategy single_strategy() {
    FiniteStrategy s;
    s.epsilon = Rational(0);
    s.memory.resize(2);
    s.memory[0].kind = MemoryElement::Kind::Transient;
    s.memory[1].kind = MemoryElement::Kind::Mode;
    s.transient_next.resize(1);
    s.switch_to.resize(1);
    s.mode_next.resize(2);
    s.switch_to[0] = {{1, Rational(1)}};
    s.mode_next[1][0] = {{0, Rational(1)}};
    return s;
}

TEST(Simulate, DeterministicChainIsExact) {
    const Mdp m = test::single_model();
    SimulationOptions options;
    options.runs = 8;
    options.horizon = 64;
    const SimulationReport r = simulate(m, single_strategy(), test::single_query(), options);

    EXPECT_EQ(r.runs, 8);
    EXPECT_EQ(r.horizon, 64);
    EXPECT_EQ(r.window, 32);
    ASSERT_EQ(r.mean_payoff_average.size(), 1u);
    EXPECT_DOUBLE_EQ(r.mean_payoff_average[0], 0.0);
    EXPECT_DOUBLE_EQ(r.sat_rate[0], 1.0);  // payoff 0 >= threshold 0 in every run
    ASSERT_EQ(r.action_frequency.size(), 1u);
    EXPECT_DOUBLE_EQ(r.action_frequency[0], 1.0);
    EXPECT_FALSE(r.has_joint);
}

TEST(Simulate, SameSeedSameReport) {
    const Mdp m = test::running_model();
    const FiniteStrategy s = running_witness();
    SimulationOptions options;
    options.runs = 50;
    options.horizon = 400;
    options.seed = 12345;

    const SimulationReport a = simulate(m, s, test::running_query(), options);
    const SimulationReport b = simulate(m, s, test::running_query(), options);
    EXPECT_EQ(a.mean_payoff_average, b.mean_payoff_average);
    EXPECT_EQ(a.sat_rate, b.sat_rate);
    EXPECT_EQ(a.action_frequency, b.action_frequency);
    EXPECT_EQ(serialize_report(a, m), serialize_report(b, m));

    SimulationOptions other = options;
    other.seed = 54321;
    const SimulationReport c = simulate(m, s, test::running_query(), other);
    EXPECT_NE(a.action_frequency, c.action_frequency);
}

TEST(Simulate, RatesApproachExactAnalysis) {
    // The witness settles into its components with chances 1/5, 3/5, 1/5; with
    // a long horizon the empirical satisfaction rate of both dimensions (4/5)
    // and the expectation (45/41, 101/205) show up in the sample averages.
    // The v/w component alternates in sojourns of ~130 steps, so the horizon
    // must cover enough alternations for window averages to settle near the
    // long-run payoff (the per-run spread dominates the payoff tolerances).
    const Mdp m = test::running_model();
    const FiniteStrategy s = running_witness();
    SimulationOptions options;
    options.runs = 1600;
    options.horizon = 40000;
    options.seed = 7;

    const SimulationReport r = simulate(m, s, test::running_query(), options);
    EXPECT_EQ(r.sat_thresholds, (std::vector<Rational>{Rational(2, 5), Rational(2, 5)}));
    EXPECT_NEAR(r.sat_rate[0], 0.8, 0.05);
    EXPECT_NEAR(r.sat_rate[1], 0.8, 0.05);
    EXPECT_NEAR(r.mean_payoff_average[0], 45.0 / 41.0, 0.15);
    EXPECT_NEAR(r.mean_payoff_average[1], 101.0 / 205.0, 0.05);

    // action l is only played while transient, so its long-run frequency
    // vanishes; the self-loops a, b, d dominate
    const double loop_mass = r.action_frequency[m.action_index("a")] +
                             r.action_frequency[m.action_index("b")] +
                             r.action_frequency[m.action_index("d")];
    EXPECT_GT(loop_mass, 0.95);
    EXPECT_LT(r.action_frequency[m.action_index("l")], 0.01);
}

TEST(Simulate, CoinFlipRatesMatchProbabilities) {
    // 9/10 gamble, coin between the worthless and the rich sink: satisfaction
    // threshold 1 is met by the stayers (payoff 2) and the rich half.
    const Mdp m = test::randmem_model();
    FiniteStrategy s;
    s.epsilon = Rational(0);
    s.memory.resize(3);
    s.memory[0].kind = MemoryElement::Kind::Transient;
    s.memory[1].kind = MemoryElement::Kind::Mode;
    s.memory[2].kind = MemoryElement::Kind::Mode;
    s.transient_next.resize(3);
    s.switch_to.resize(3);
    s.mode_next.resize(3);
    s.transient_next[0] = {{1, Rational(9, 10)}};
    s.switch_to[0] = {{1, Rational(1, 10)}};
    s.switch_to[1] = {{2, Rational(1)}};
    s.switch_to[2] = {{2, Rational(1)}};
    s.mode_next[1][0] = {{0, Rational(1)}};
    s.mode_next[2][1] = {{2, Rational(1)}};
    s.mode_next[2][2] = {{3, Rational(1)}};

    SimulationOptions options;
    options.runs = 2000;
    options.horizon = 200;
    options.seed = 99;
    const SimulationReport r = simulate(m, s, test::randmem_query(), options);
    // exact law: 11/20 of the runs end at payoff >= 1
    EXPECT_NEAR(r.sat_rate[0], 0.55, 0.04);
    EXPECT_NEAR(r.mean_payoff_average[0], 4.7, 0.3);
}

TEST(Simulate, JointRateReported) {
    const Mdp m = test::threemem_model();
    const Query q = test::threemem_query();
    const LpInstance lp = build_joint(m, q);
    const SolveOutcome out = solve(lp);
    ASSERT_EQ(out.status, SolveStatus::Optimal);
    const FiniteStrategy s = synthesize(m, q, lp, out.assignment, Rational(1, 10));

    SimulationOptions options;
    options.runs = 500;
    options.horizon = 600;
    options.seed = 3;
    const SimulationReport r = simulate(m, s, q, options);
    EXPECT_TRUE(r.has_joint);
    EXPECT_GE(r.joint_rate, 0.4);  // witness commits jointly with chance >= 1/2
    EXPECT_EQ(r.joint_thresholds.size(), 3u);
}

TEST(Simulate, SerializedReportIsValidJson) {
    const Mdp m = test::single_model();
    SimulationOptions options;
    options.runs = 4;
    options.horizon = 16;
    const SimulationReport r = simulate(m, single_strategy(), test::single_query(), options);
    const auto doc = nlohmann::json::parse(serialize_report(r, m));
    EXPECT_EQ(doc.at("runs"), 4);
    EXPECT_EQ(doc.at("horizon"), 16);
    EXPECT_TRUE(doc.contains("mean_payoff_average"));
    EXPECT_TRUE(doc.at("action_frequency").contains("z"));
}

TEST(Simulate, RejectsBadOptions) {
    const Mdp m = test::single_model();
    SimulationOptions options;
    options.runs = 0;
    EXPECT_THROW(simulate(m, single_strategy(), test::single_query(), options), ValidationError);
    options.runs = 10;
    options.horizon = 0;
    EXPECT_THROW(simulate(m, single_strategy(), test::single_query(), options), ValidationError);
}

} // namespace
} // namespace mpmdp
