#pragma once

#include <string>
#include <vector>

#include "mpmdp/model.hpp"

namespace mpmdp {

/// CNF formula: variables are 1..variables, clauses hold nonzero literals
/// (negative = negated variable).
struct Cnf {
    int variables = 0;
    std::vector<std::vector<int>> clauses;
};

/// Parses DIMACS CNF. Comment lines, a "p cnf V C" header, clauses terminated
/// by 0. Empty clauses are rejected (the encoding needs at least one literal
/// per clause), as are literals outside 1..V and clause-count mismatches.
Cnf parse_dimacs(const std::string& text);

std::string serialize_dimacs(const Cnf& cnf);

struct SatInstance {
    Mdp model;
    Query query;
};

/// Encodes satisfiability of the formula as a realizability query: a cycle
/// through one state per variable, choosing at state i between actions "a<i>"
/// (set variable i true) and "na<i>" (false). Dimensions are the clauses
/// followed by the positive and then the negated literals; a step earns 1 in a
/// clause dimension iff the chosen literal satisfies the clause, and 1 in its
/// own literal dimension. The query demands each literal frequency reach 1/p
/// with probability 1/2 (forcing runs to pick consistent valuations, half of
/// them the complement of the other half) and all clause payoffs to reach 1/p
/// at once with probability 1/2 (forcing a satisfying valuation). The formula
/// is satisfiable iff the query is realizable.
SatInstance sat_to_instance(const Cnf& cnf);

} // namespace mpmdp
