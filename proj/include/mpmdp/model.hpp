#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mpmdp/rational.hpp"

namespace mpmdp {

/// One action of an MDP. Every action is enabled in exactly one state
/// (its source), so the action list induces the partition Act.
struct Action {
    std::string name;
    int source = -1;                                 ///< index into Mdp::states
    std::vector<std::pair<int, Rational>> delta;     ///< successor distribution, by state index
    std::vector<Rational> reward;                    ///< n-dimensional reward

    const Rational& probability(int state) const;    ///< 0 if state not in the support
};

/// Finite MDP with an n-dimensional reward function on actions.
///
/// Invariants (enforced by parse_mdp / validate):
///  - state and action names are unique and non-empty
///  - every state has at least one action; every action belongs to one state
///  - every delta is a probability distribution (entries > 0, sum exactly 1)
///  - every reward vector has exactly `dimension` components
struct Mdp {
    int dimension = 0;
    int initial = 0;                                 ///< index into states
    std::vector<std::string> states;
    std::vector<Action> actions;
    std::vector<std::vector<int>> act;               ///< per state: indices of its actions

    int state_index(const std::string& name) const;  ///< -1 if unknown
    int action_index(const std::string& name) const; ///< -1 if unknown

    /// Checks all structural invariants; throws ValidationError naming the
    /// first violated one.
    void validate() const;
};

/// Parses the JSON model format and validates all invariants.
/// Syntax errors carry the byte position reported by the JSON parser.
Mdp parse_mdp(const std::string& text);

/// Deterministic inverse of parse_mdp (field order and formatting are stable).
std::string serialize_mdp(const Mdp& m);

enum class QueryVariant {
    MultiQuantConjunctive,
    MultiQuantJoint,
    MultiQuantConjunctiveJoint,
    MultiQual,
    MonoQuant,
    MonoQual,
};

std::string variant_name(QueryVariant v);
std::optional<QueryVariant> variant_from_name(const std::string& name);

/// Realizability query against an n-dimensional MDP.
///
/// Field usage by variant:
///  - conjunctive family (multi-quant-conjunctive, multi-qual, mono-quant,
///    mono-qual): sat and pr are per-dimension vectors; the qual variants
///    force pr = 1 in every dimension.
///  - multi-quant-joint: sat is a vector, the single probability threshold
///    lives in pr_joint (pr is unused).
///  - multi-quant-conjunctive-joint: conjunctive fields plus the added joint
///    constraint thresholds sat_joint / pr_joint.
///
/// exp may be absent only for callers that treat the expectation thresholds
/// as free (frontier approximation); everything else requires it.
struct Query {
    QueryVariant variant = QueryVariant::MultiQuantConjunctive;
    std::optional<std::vector<Rational>> exp;
    std::vector<Rational> sat;
    std::vector<Rational> pr;
    std::vector<Rational> sat_joint;
    Rational pr_joint;

    int dimension() const { return static_cast<int>(sat.size()); }
    bool is_joint() const { return variant == QueryVariant::MultiQuantJoint; }
    bool is_conjunctive_joint() const { return variant == QueryVariant::MultiQuantConjunctiveJoint; }
    bool is_qual() const { return variant == QueryVariant::MultiQual || variant == QueryVariant::MonoQual; }
};

/// Parses the JSON query format. Structural validation only; use
/// validate_query for the model-dependent checks.
Query parse_query(const std::string& text);

std::string serialize_query(const Query& q);

/// Checks query/model consistency: matching dimension, threshold vector
/// lengths, probability thresholds in [0,1], variant-specific shape
/// (mono => n = 1, qual => pr = 1, joint fields present exactly for the
/// joint variants). Throws ValidationError naming the violated invariant.
/// When require_exp is false a missing exp vector is tolerated.
void validate_query(const Mdp& m, const Query& q, bool require_exp = true);

} // namespace mpmdp
