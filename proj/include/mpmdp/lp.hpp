#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mpmdp/rational.hpp"

namespace mpmdp {

/// What a linear-program variable stands for. Transient variables count
/// expected action uses before the strategy commits; Switch variables carry
/// the probability of committing to a mode at a state; Recurrent variables
/// are long-run action frequencies inside a mode; Extra covers auxiliary
/// variables (free probability thresholds in frontier sweeps).
enum class VarKind { Transient, Switch, Recurrent, Extra };

struct LpVar {
    std::string name;       ///< e.g. "y[l]", "y[v][3]", "x[b][3][yes]"
    VarKind kind = VarKind::Extra;
    int action = -1;        ///< Transient/Recurrent: action index
    int state = -1;         ///< Switch: state index
    uint32_t subset = 0;    ///< mode bitmask, bit i-1 <=> dimension i committed
    int flag = -1;          ///< conjunctive-joint copy: 1 = yes, 0 = no, -1 = none
    int mec = -1;           ///< MEC index for Switch/Recurrent variables
};

struct LpConstraint {
    enum class Rel { Eq, Ge };

    std::string label;                            ///< e.g. "flow[s]", "commit[C1][N=3][i=1]"
    std::vector<std::pair<int, Rational>> terms;  ///< (variable index, coefficient), ascending index, nonzero
    Rel rel = Rel::Eq;
    Rational rhs;
};

/// A linear program over nonnegative variables: every variable carries an
/// implicit bound >= 0; rows are equalities or >= inequalities. An empty
/// objective means pure feasibility; otherwise the objective is maximized.
struct LpInstance {
    std::vector<LpVar> vars;
    std::vector<LpConstraint> constraints;
    std::vector<std::pair<int, Rational>> objective;  ///< ascending variable index

    /// Presolve hints: variables that are zero in every feasible point
    /// (attached by the builders from per-MEC mode-feasibility analysis).
    /// The solver may drop these columns; correctness does not depend on it.
    std::vector<int> known_zero;

    int variable_index(const std::string& name) const;  ///< -1 if unknown
};

/// Exact values for all variables of an instance, by variable index.
struct LpAssignment {
    std::vector<Rational> value;

    const Rational& operator[](size_t i) const { return value[i]; }
};

/// Evaluates every constraint and the sign bounds exactly; returns a
/// human-readable description of each violated constraint (empty = feasible).
std::vector<std::string> check_assignment(const LpInstance& lp, const LpAssignment& a);

/// Deterministic text form, one constraint per line, exact rationals.
std::string dump_lp(const LpInstance& lp);

} // namespace mpmdp
