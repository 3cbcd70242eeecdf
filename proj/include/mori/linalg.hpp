#pragma once

#include "mori/rational.hpp"

#include <optional>

namespace mori {

struct RowEchelon {
  Matrix rows;                       // reduced, nonzero rows only
  std::vector<std::size_t> pivots;   // pivot column of each row
};

/// Reduced row echelon form of a matrix with `cols` columns.
RowEchelon rref(Matrix m, std::size_t cols);

std::size_t rank(const Matrix& m, std::size_t cols);

/// Basis of {x : m x = 0}, each vector primitive and sign-normalized.
std::vector<Vec> kernel(const Matrix& m, std::size_t cols);

/// Unique solution of the square system m x = b, or nullopt when m is singular.
std::optional<Vec> solve_square(const Matrix& m, std::span<const Q> b);

/// Some solution of m x = b (free variables set to zero), or nullopt if inconsistent.
std::optional<Vec> solve_any(const Matrix& m, std::size_t cols, std::span<const Q> b);

std::optional<Matrix> inverse(const Matrix& m);

Q determinant(Matrix m);

/// Basis of the row space, in reduced echelon form with primitive rows.
std::vector<Vec> row_space_basis(const std::vector<Vec>& vs, std::size_t dim);

}  // namespace mori
