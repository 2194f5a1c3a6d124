#pragma once

#include <string>
#include <vector>

#include "mpmdp/model.hpp"
#include "mpmdp/strategy.hpp"

namespace mpmdp {

/// Finite Markov chain induced by a finite-memory strategy on an MDP. A
/// location fixes the current state, the memory element, and the action chosen
/// on entering the state; the chain is restricted to locations reachable from
/// the initial distribution.
struct ProductChain {
    struct Location {
        int state = -1;
        int memory = -1;
        int action = -1;
    };
    std::vector<Location> locations;
    std::vector<Rational> initial;              // per location, sums to 1
    std::vector<Distribution> next;             // per location, over locations, sums to 1
};

ProductChain product_chain(const Mdp& m, const FiniteStrategy& s);

/// One bottom strongly connected component of the product chain.
struct BsccSummary {
    std::vector<int> locations;
    int memory = -1;                  // shared memory element, -1 if mixed
    Rational probability;             // chance of being absorbed here
    std::vector<Rational> mean_payoff; // per dimension, of runs absorbed here
};

struct StrategyEvaluation {
    std::vector<BsccSummary> bsccs;
    std::vector<Rational> expectation;           // per dimension
    std::vector<Rational> expectation_thresholds;
    std::vector<Rational> sat_thresholds;        // per dimension
    std::vector<Rational> sat_probability;       // per dimension, at sat_thresholds
    bool has_joint = false;
    std::vector<Rational> joint_thresholds;
    Rational joint_probability;                  // all dimensions at once
    bool pass = false;
    std::vector<std::string> failures;
};

/// Exact evaluation of a strategy against a query. Thresholds are relaxed by
/// the strategy's epsilon: expectation is checked against exp - eps and
/// mean-payoff events against sat - eps (probability bounds stay as given).
StrategyEvaluation evaluate(const Mdp& m, const FiniteStrategy& s, const Query& q);

std::string serialize_evaluation(const StrategyEvaluation& e, const FiniteStrategy& s);

} // namespace mpmdp
