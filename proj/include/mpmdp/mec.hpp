#pragma once

#include <vector>

#include "mpmdp/model.hpp"

namespace mpmdp {

/// Maximal end-component decomposition of an MDP.
///
/// Invariants: MEC state sets are pairwise disjoint; the MEC action sets
/// together with non_mec_actions partition the action set; every action of a
/// MEC stays inside the MEC with probability 1.
struct MecDecomposition {
    struct Mec {
        std::vector<int> states;   ///< ascending state indices
        std::vector<int> actions;  ///< ascending action indices
    };

    std::vector<Mec> mecs;             ///< ordered by smallest contained state index
    std::vector<int> non_mec_actions;  ///< ascending
    std::vector<int> mec_of_state;     ///< per state: MEC index or -1
    std::vector<int> mec_of_action;    ///< per action: MEC index or -1
};

/// Computes the MEC decomposition by iterated SCC refinement: repeatedly
/// compute SCCs of the remaining transition graph and delete every action
/// with a successor outside its source's SCC, until a fixpoint is reached.
MecDecomposition mec_decomposition(const Mdp& m);

/// Returns the sub-MDP induced by one MEC (states and actions keep their
/// names and relative order; the smallest-index state becomes initial).
/// Throws ValidationError if `mec` is not a MEC of `m`.
Mdp restrict_to_mec(const Mdp& m, const MecDecomposition::Mec& mec);

} // namespace mpmdp
