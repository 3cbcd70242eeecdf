#pragma once

// Exact rational simplex (dense tableau, Bland's rule, two phases).

#include "mori/rational.hpp"

#include <optional>

namespace mori::lp {

enum class Status { optimal, infeasible, unbounded };

struct Result {
  Status status = Status::infeasible;
  Vec x;      // primal solution when optimal
  Q value;    // objective value when optimal
};

/// minimize c.x  subject to  A x = b,  x >= 0.
Result minimize(const Matrix& A, std::span<const Q> b, std::span<const Q> c);

/// Nonnegative lambda with sum_i lambda_i * gens[i] = target, if one exists.
std::optional<Vec> nonnegative_combination(const std::vector<Vec>& gens, std::span<const Q> target);

}  // namespace mori::lp
