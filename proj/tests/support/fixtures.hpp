#pragma once

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mpmdp/mec.hpp"
#include "mpmdp/model.hpp"
#include "mpmdp/reduction.hpp"

namespace mpmdp::test {

/// Two-MEC model: initial state s chooses between a coin-flip detour towards
/// the left self-loop MEC {u} and the right two-state MEC {v, w}.
inline const char* kRunningModel = R"({
  "dimension": 2,
  "initial": "s",
  "states": ["s", "u", "v", "w"],
  "actions": [
    {"name": "l", "source": "s", "delta": {"u": "1/2", "s": "1/2"}, "reward": ["0", "0"]},
    {"name": "r", "source": "s", "delta": {"v": "1"}, "reward": ["0", "0"]},
    {"name": "a", "source": "u", "delta": {"u": "1"}, "reward": ["4", "0"]},
    {"name": "b", "source": "v", "delta": {"v": "1"}, "reward": ["1", "0"]},
    {"name": "c", "source": "v", "delta": {"w": "1"}, "reward": ["0", "0"]},
    {"name": "d", "source": "w", "delta": {"w": "1"}, "reward": ["0", "1"]},
    {"name": "e", "source": "w", "delta": {"v": "1"}, "reward": ["0", "0"]}
  ]
})";

inline const char* kRunningQuery = R"({
  "variant": "multi-quant-conjunctive",
  "exp": ["11/10", "1/2"],
  "sat": ["1/2", "1/2"],
  "pr": ["4/5", "4/5"]
})";

/// One-dimensional model where both randomization and memory are needed:
/// stay on the mediocre self-loop or gamble on a coin flip between a
/// worthless and a high-reward sink.
inline const char* kRandmemModel = R"({
  "dimension": 1,
  "initial": "s",
  "states": ["s", "t", "u"],
  "actions": [
    {"name": "a", "source": "s", "delta": {"s": "1"}, "reward": ["2"]},
    {"name": "b", "source": "s", "delta": {"t": "1/2", "u": "1/2"}, "reward": ["0"]},
    {"name": "c", "source": "t", "delta": {"t": "1"}, "reward": ["0"]},
    {"name": "d", "source": "u", "delta": {"u": "1"}, "reward": ["10"]}
  ]
})";

inline const char* kRandmemQuery = R"({
  "variant": "mono-quant",
  "exp": ["3"],
  "sat": ["1"],
  "pr": ["11/20"]
})";

/// Three-dimensional joint query needing three memory elements: two rewarded
/// self-loops at s, an escape to the self-loop at t.
inline const char* kThreememModel = R"({
  "dimension": 3,
  "initial": "s",
  "states": ["s", "t"],
  "actions": [
    {"name": "a1", "source": "s", "delta": {"s": "1"}, "reward": ["1", "0", "0"]},
    {"name": "a2", "source": "s", "delta": {"s": "1"}, "reward": ["0", "4", "0"]},
    {"name": "b", "source": "s", "delta": {"t": "1"}, "reward": ["0", "0", "0"]},
    {"name": "a3", "source": "t", "delta": {"t": "1"}, "reward": ["0", "0", "4"]}
  ]
})";

inline const char* kThreememQuery = R"({
  "variant": "multi-quant-joint",
  "exp": ["0", "1", "1"],
  "sat": ["1", "0", "0"],
  "pr": "1/2"
})";

/// Single state with one rewarded self-loop per dimension: each dimension's
/// threshold needs its own recurrent mode.
inline const char* kNmem3Model = R"({
  "dimension": 3,
  "initial": "s",
  "states": ["s"],
  "actions": [
    {"name": "a1", "source": "s", "delta": {"s": "1"}, "reward": ["1", "0", "0"]},
    {"name": "a2", "source": "s", "delta": {"s": "1"}, "reward": ["0", "1", "0"]},
    {"name": "a3", "source": "s", "delta": {"s": "1"}, "reward": ["0", "0", "1"]}
  ]
})";

inline const char* kNmem3Query = R"({
  "variant": "multi-quant-conjunctive",
  "exp": ["0", "0", "0"],
  "sat": ["1", "1", "1"],
  "pr": ["1/3", "1/3", "1/3"]
})";

/// Smallest legal model: one state, one zero-reward self-loop.
inline const char* kSingleModel = R"({
  "dimension": 1,
  "initial": "t",
  "states": ["t"],
  "actions": [
    {"name": "z", "source": "t", "delta": {"t": "1"}, "reward": ["0"]}
  ]
})";

inline const char* kSingleQuery = R"({
  "variant": "mono-qual",
  "exp": ["0"],
  "sat": ["0"]
})";

inline Mdp running_model() { return parse_mdp(kRunningModel); }
inline Query running_query() { return parse_query(kRunningQuery); }
inline Mdp randmem_model() { return parse_mdp(kRandmemModel); }
inline Query randmem_query() { return parse_query(kRandmemQuery); }
inline Mdp threemem_model() { return parse_mdp(kThreememModel); }
inline Query threemem_query() { return parse_query(kThreememQuery); }
inline Mdp nmem3_model() { return parse_mdp(kNmem3Model); }
inline Query nmem3_query() { return parse_query(kNmem3Query); }
inline Mdp single_model() { return parse_mdp(kSingleModel); }
inline Query single_query() { return parse_query(kSingleQuery); }

/// Random MDP with bounded size, exercising multiple MECs, transient states
/// and rational probabilities. Deterministic in the engine state.
inline Mdp random_mdp(std::mt19937& rng, int max_states, int max_actions, int dimension) {
    const int S = 1 + static_cast<int>(rng() % max_states);
    Mdp m;
    m.dimension = dimension;
    m.initial = 0;
    for (int i = 0; i < S; ++i) m.states.push_back("q" + std::to_string(i));
    m.act.resize(S);
    int total = S + (max_actions > S ? static_cast<int>(rng() % (max_actions - S + 1)) : 0);
    for (int a = 0; a < total; ++a) {
        Action act;
        act.name = "m" + std::to_string(a);
        act.source = a < S ? a : static_cast<int>(rng() % S); // every state gets one action
        const int support = 1 + static_cast<int>(rng() % std::min(S, 3));
        std::set<int> targets;
        while (static_cast<int>(targets.size()) < support) targets.insert(static_cast<int>(rng() % S));
        std::vector<long> weights;
        long sum = 0;
        for (std::size_t i = 0; i < targets.size(); ++i) {
            weights.push_back(1 + static_cast<long>(rng() % 4));
            sum += weights.back();
        }
        std::size_t i = 0;
        for (int t : targets) act.delta.emplace_back(t, Rational(weights[i++], sum));
        for (int d = 0; d < dimension; ++d) {
            const long num = static_cast<long>(rng() % 6) - 2; // -2..3
            const long den = 1 + static_cast<long>(rng() % 2);
            act.reward.push_back(Rational(num, den));
        }
        m.act[act.source].push_back(static_cast<int>(m.actions.size()));
        m.actions.push_back(std::move(act));
    }
    m.validate();
    return m;
}

/// Exhaustive-enumeration oracle for the MEC decomposition: every nonempty
/// action subset whose sources it keeps strongly connected and whose
/// transitions stay inside is an end component; MECs are the maximal ones.
inline std::vector<MecDecomposition::Mec> mec_oracle(const Mdp& m) {
    const int A = static_cast<int>(m.actions.size());
    std::vector<std::pair<std::set<int>, std::set<int>>> components; // (states, actions)
    for (unsigned mask = 1; mask < (1u << A); ++mask) {
        std::set<int> states, actions;
        for (int a = 0; a < A; ++a) {
            if (mask & (1u << a)) {
                actions.insert(a);
                states.insert(m.actions[a].source);
            }
        }
        bool closed = true;
        for (int a : actions) {
            for (const auto& [t, p] : m.actions[a].delta) {
                if (!states.count(t)) closed = false;
            }
        }
        if (!closed) continue;
        // strong connectivity of the induced graph
        bool connected = true;
        for (int from : states) {
            std::set<int> reach{from};
            std::vector<int> queue{from};
            while (!queue.empty()) {
                const int s = queue.back();
                queue.pop_back();
                for (int a : actions) {
                    if (m.actions[a].source != s) continue;
                    for (const auto& [t, p] : m.actions[a].delta) {
                        if (reach.insert(t).second) queue.push_back(t);
                    }
                }
            }
            if (reach.size() != states.size()) connected = false;
        }
        if (connected) components.push_back({states, actions});
    }
    std::vector<MecDecomposition::Mec> maximal;
    for (const auto& [states, actions] : components) {
        bool is_max = true;
        for (const auto& [s2, a2] : components) {
            if (a2 != actions && std::includes(a2.begin(), a2.end(), actions.begin(), actions.end()))
                is_max = false;
        }
        if (!is_max) continue;
        MecDecomposition::Mec mec;
        mec.states.assign(states.begin(), states.end());
        mec.actions.assign(actions.begin(), actions.end());
        maximal.push_back(std::move(mec));
    }
    std::sort(maximal.begin(), maximal.end(),
              [](const MecDecomposition::Mec& l, const MecDecomposition::Mec& r) {
                  return l.states[0] < r.states[0];
              });
    return maximal;
}

/// Truth-table satisfiability oracle for small formulas.
inline bool sat_oracle(const Cnf& cnf) {
    for (unsigned long assign = 0; assign < (1ul << cnf.variables); ++assign) {
        bool all = true;
        for (const auto& clause : cnf.clauses) {
            bool any = false;
            for (int lit : clause) {
                const int var = lit > 0 ? lit : -lit;
                const bool truth = (assign >> (var - 1)) & 1;
                if ((lit > 0) == truth) any = true;
            }
            if (!any) all = false;
        }
        if (all) return true;
    }
    return false;
}

} // namespace mpmdp::test
