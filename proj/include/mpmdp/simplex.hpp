#pragma once

#include "mpmdp/lp.hpp"

namespace mpmdp {

enum class SolveStatus { Optimal, Infeasible, Unbounded };

std::string status_name(SolveStatus s);

struct SolveStats {
    long pivots = 0;
    int max_coefficient_bits = 0;   ///< largest bit length produced while pivoting
    int solved_rows = 0;            ///< system size after presolve
    int solved_columns = 0;
};

struct SolveOutcome {
    SolveStatus status = SolveStatus::Infeasible;
    LpAssignment assignment;   ///< meaningful when status == Optimal; covers all instance variables
    Rational objective;        ///< meaningful when status == Optimal and the instance has an objective
    SolveStats stats;
};

struct SolveOptions {
    bool use_known_zero = true;    ///< honor the builder's forced-zero hints
    bool use_sign_presolve = true; ///< iterated sign-based zero fixing
};

/// Two-phase primal simplex over exact rationals.
///
/// Every answer is certified before it is returned: Optimal assignments are
/// re-checked against the original instance constraint by constraint,
/// Infeasible verdicts carry an exact Farkas certificate for the solved
/// system, and Unbounded verdicts verify the improving ray. A certificate
/// mismatch raises SolveError (a bug, never a property of the input).
SolveOutcome solve(const LpInstance& lp, const SolveOptions& options = {});

} // namespace mpmdp
