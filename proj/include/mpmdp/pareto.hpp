#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mpmdp/lp.hpp"
#include "mpmdp/model.hpp"

namespace mpmdp {

/// Which thresholds of the query are treated as free coordinates of the
/// frontier. The remaining thresholds stay fixed at the query's values.
enum class FreeAxis { Exp, Sat, Pr, All };

std::string axis_name(FreeAxis a);
std::optional<FreeAxis> axis_from_name(const std::string& name);

struct ParetoPoint {
    std::vector<Rational> value; ///< exact achieved thresholds, axis layout below
};

/// Approximation of the Pareto frontier of achievable threshold vectors.
///
/// Point layout: Exp = one entry per dimension (expectations); Pr = one entry
/// per dimension (or a single entry for the joint variant); Sat = one entry
/// per dimension; All = expectations, then sat thresholds, then probabilities
/// (conjunctive quantitative variants only).
///
/// Exp and Pr points are optimal for their sweep direction (each is the exact
/// optimum of a weighted objective); Sat points come from a line search from
/// the reward floor and are accurate to an additive epsilon along their
/// direction, clipped to the reward box. The weight grid is fine enough that
/// in shifted coordinates (every reward raised by `offset` to be >= 1) each
/// achievable vector is (1+epsilon)-dominated by some returned point.
struct ParetoApproximation {
    FreeAxis axis = FreeAxis::Exp;
    Rational epsilon;
    long grid = 0;                       ///< weight-grid granularity per axis
    std::vector<Rational> offset;        ///< per dimension, for shifted coordinates
    std::vector<ParetoPoint> points;     ///< non-dominated, lexicographically sorted
    std::vector<LpAssignment> witnesses; ///< parallel to points
};

ParetoApproximation pareto_approx(const Mdp& m, const Query& q, const Rational& epsilon,
                                  FreeAxis axis = FreeAxis::Exp);

std::string serialize_pareto(const ParetoApproximation& p);

} // namespace mpmdp
