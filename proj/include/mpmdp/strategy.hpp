#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mpmdp/lp.hpp"
#include "mpmdp/model.hpp"

namespace mpmdp {

/// Sparse probability distribution over integer indices (actions or memory
/// elements, depending on context). Entries are positive and sum to at most 1.
using Distribution = std::vector<std::pair<int, Rational>>;

Rational distribution_total(const Distribution& d);

/// One element of the finite stochastic-update memory. Element 0 is always the
/// transient element; the others are recurrent modes. Synthesized modes carry
/// the dimension subset they commit to (bit i-1 set = dimension i) and, for
/// queries with a joint goal on top of per-dimension goals, a flag telling
/// whether the mode also pursues the joint goal (1), avoids it (0), or has no
/// such distinction (-1). Hand-written strategies may leave modes untagged.
struct MemoryElement {
    enum class Kind { Transient, Mode };
    Kind kind = Kind::Transient;
    std::uint32_t subset = 0;
    int flag = -1;
    bool tagged = false;

    std::string label() const;
};

/// Finite-memory stochastic-update strategy.
///
/// Behavior on entering state s:
///  - in the transient element: with probability transient_next[s](a) play a
///    and stay transient; with probability switch_to[s](m) switch permanently
///    to mode m and play an action drawn from mode_next[m] at s. These
///    probabilities jointly sum to 1.
///  - in mode m: play an action drawn from mode_next[m] at s; the memory
///    never changes again.
/// The first state s0 is entered with memory drawn the same way: transient
/// with the residual probability, mode m with probability switch_to[s0](m).
struct FiniteStrategy {
    Rational epsilon;
    std::vector<MemoryElement> memory;
    std::vector<Distribution> transient_next; // per state, over action indices
    std::vector<Distribution> switch_to;      // per state, over memory indices
    std::vector<std::map<int, Distribution>> mode_next; // per memory element: state -> action dist

    void validate(const Mdp& m) const;
};

/// Stationary action frequencies of the uniform memoryless strategy on a
/// strongly connected MDP (a single MEC covering all states and actions):
/// frequency(a) = stationary probability of src(a) divided by |Act(src(a))|.
/// Indexed by action. Entries are positive and sum to 1.
std::vector<Rational> uniform_frequencies(const Mdp& mec_sub);

/// Memoryless strategy on a MEC sub-MDP that plays every action with positive
/// probability while keeping each dimension's mean payoff within epsilon-scaled
/// reach of the target frequencies xbar (indexed by action, nonnegative, with
/// positive total). Requires 0 < epsilon < 1.
std::vector<Distribution> perturbed_recurrent(const Mdp& mec_sub,
                                              const std::vector<Rational>& xbar,
                                              const Rational& epsilon);

/// Builds the witness strategy from a feasible assignment of the realizability
/// program for (m, q).
FiniteStrategy synthesize(const Mdp& m, const Query& q, const LpInstance& lp,
                          const LpAssignment& assignment, const Rational& epsilon);

std::string serialize_strategy(const FiniteStrategy& s, const Mdp& m);
FiniteStrategy parse_strategy(const std::string& text, const Mdp& m);

} // namespace mpmdp
