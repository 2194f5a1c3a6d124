#pragma once

#include <optional>
#include <vector>

#include "mpmdp/rational.hpp"

namespace mpmdp {

using Matrix = std::vector<std::vector<Rational>>;

/// Solves A x = b exactly by Gaussian elimination; A may have more rows than
/// columns. Returns nullopt unless the system is consistent with a unique
/// solution.
std::optional<std::vector<Rational>> solve_unique(Matrix a, std::vector<Rational> b);

/// Same, for several right-hand sides at once (columns of B).
std::optional<Matrix> solve_unique_multi(Matrix a, Matrix b);

} // namespace mpmdp
