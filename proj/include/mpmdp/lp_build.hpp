#pragma once

#include "mpmdp/lp.hpp"
#include "mpmdp/mec.hpp"
#include "mpmdp/model.hpp"

namespace mpmdp {

/// Knobs for the realizability-program builders, used by the optimization
/// front ends (threshold maximization, frontier sweeps).
struct BuildOptions {
    /// Per-dimension: drop the expectation row of that dimension (the
    /// expectation becomes free there). Empty means all rows are kept.
    std::vector<bool> exp_free;

    /// Replace the probability thresholds by fresh variables pr[i] (or a
    /// single pr for the joint variant) bounded by 1, so they can be
    /// optimized. Not available for qualitative variants.
    bool pr_free = false;

    /// Attach forced-zero hints for modes whose threshold commitments no
    /// recurrent flow inside their MEC can meet (decided by tiny per-MEC
    /// feasibility programs). Sound in both directions; purely a speedup.
    bool prune_modes = true;
};

/// Realizability program for the conjunctive family (multi-quant-conjunctive,
/// multi-qual, mono-quant, mono-qual). One mode family per subset N of the
/// dimensions — all 2^n subsets for the quantitative variants, only the full
/// subset for the qualitative ones.
LpInstance build_conjunctive(const Mdp& m, const Query& q, const BuildOptions& options = {});

/// Realizability program for multi-quant-joint (also accepts multi-qual,
/// where it degenerates to the full-subset-only system): mode families only
/// for the empty and the full subset, commitments on the full one, and a
/// single probability row.
LpInstance build_joint(const Mdp& m, const Query& q, const BuildOptions& options = {});

/// Realizability program for multi-quant-conjunctive-joint: every mode family
/// of the conjunctive program is split into a yes/no copy (does the run also
/// meet the added joint thresholds?), with added commitment rows on the yes
/// copies and an added joint probability row.
LpInstance build_conjunctive_joint(const Mdp& m, const Query& q, const BuildOptions& options = {});

/// Dispatches to the right builder for the query variant.
LpInstance build_lp(const Mdp& m, const Query& q, const BuildOptions& options = {});

/// Sets `maximize sum_i weights_i * (long-run expectation of dimension i)`,
/// i.e. an objective over the recurrent variables with coefficients
/// weights . r(a).
void set_expectation_objective(LpInstance& lp, const Mdp& m, const std::vector<Rational>& weights);

/// Sets `maximize sum_i weights_i * pr[i]` over the free probability
/// variables introduced by BuildOptions::pr_free (a single weight for the
/// joint variant).
void set_pr_objective(LpInstance& lp, const std::vector<Rational>& weights);

} // namespace mpmdp
