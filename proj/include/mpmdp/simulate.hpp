#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mpmdp/model.hpp"
#include "mpmdp/strategy.hpp"

namespace mpmdp {

struct SimulationOptions {
    long runs = 1000;
    long horizon = 100000;
    std::uint64_t seed = 0;
};

/// Monte-Carlo estimate of a strategy's behavior. Sampling is exact: each
/// probability boundary is resolved against the uniform draw with rational
/// arithmetic whenever one 64-bit draw cannot decide, so the sampled law is
/// the strategy's law, not a rounded version of it. Per-run payoffs are
/// accumulated in scaled integers and compared exactly against the
/// thresholds.
struct SimulationReport {
    long runs = 0;
    long horizon = 0;
    std::uint64_t seed = 0;
    long window = 0;  ///< trailing steps per run used for action frequencies

    std::vector<double> mean_payoff_average;  ///< per dimension, averaged over runs
    std::vector<Rational> sat_thresholds;     ///< sat - epsilon, per dimension
    std::vector<double> sat_rate;             ///< fraction of runs at/above threshold
    bool has_joint = false;
    std::vector<Rational> joint_thresholds;
    double joint_rate = 0.0;
    std::vector<double> action_frequency;     ///< per action, averaged over runs
};

SimulationReport simulate(const Mdp& m, const FiniteStrategy& s, const Query& q,
                          const SimulationOptions& options);

std::string serialize_report(const SimulationReport& r, const Mdp& m);

} // namespace mpmdp
