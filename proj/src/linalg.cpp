#include "mori/linalg.hpp"

#include <utility>

namespace mori {

RowEchelon rref(Matrix m, std::size_t cols) {
  RowEchelon out;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < m.size(); ++c) {
    std::size_t p = r;
    while (p < m.size() && sgn(m[p][c]) == 0) ++p;
    if (p == m.size()) continue;
    std::swap(m[p], m[r]);
    Q inv = 1 / m[r][c];
    for (auto& x : m[r]) x *= inv;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (i == r || sgn(m[i][c]) == 0) continue;
      Q f = m[i][c];
      for (std::size_t j = c; j < cols; ++j)
        if (sgn(m[r][j]) != 0) m[i][j] -= f * m[r][j];
    }
    out.pivots.push_back(c);
    ++r;
  }
  m.resize(r);
  out.rows = std::move(m);
  return out;
}

std::size_t rank(const Matrix& m, std::size_t cols) { return rref(m, cols).pivots.size(); }

std::vector<Vec> kernel(const Matrix& m, std::size_t cols) {
  auto e = rref(m, cols);
  std::vector<bool> is_pivot(cols, false);
  for (auto p : e.pivots) is_pivot[p] = true;
  std::vector<Vec> basis;
  for (std::size_t f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    Vec v = zero_vec(cols);
    v[f] = 1;
    for (std::size_t i = 0; i < e.rows.size(); ++i) v[e.pivots[i]] = -e.rows[i][f];
    basis.push_back(primitive_signed(v));
  }
  return basis;
}

std::optional<Vec> solve_any(const Matrix& m, std::size_t cols, std::span<const Q> b) {
  if (m.size() != b.size()) throw InputError("dimension mismatch in linear solve");
  Matrix aug = m;
  for (std::size_t i = 0; i < aug.size(); ++i) {
    aug[i].resize(cols);
    aug[i].push_back(b[i]);
  }
  auto e = rref(std::move(aug), cols + 1);
  Vec x = zero_vec(cols);
  for (std::size_t i = 0; i < e.rows.size(); ++i) {
    if (e.pivots[i] == cols) return std::nullopt;
    x[e.pivots[i]] = e.rows[i][cols];
  }
  return x;
}

std::optional<Vec> solve_square(const Matrix& m, std::span<const Q> b) {
  const std::size_t n = m.size();
  if (rank(m, n) != n) return std::nullopt;
  return solve_any(m, n, b);
}

std::optional<Matrix> inverse(const Matrix& m) {
  const std::size_t n = m.size();
  Matrix aug = m;
  for (std::size_t i = 0; i < n; ++i) {
    if (aug[i].size() != n) throw InputError("inverse of a non-square matrix");
    for (std::size_t j = 0; j < n; ++j) aug[i].emplace_back(i == j ? 1 : 0);
  }
  auto e = rref(std::move(aug), 2 * n);
  if (e.pivots.size() < n || e.pivots[n - 1] >= n) return std::nullopt;
  Matrix inv(n, Vec(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv[i][j] = e.rows[i][n + j];
  return inv;
}

Q determinant(Matrix m) {
  const std::size_t n = m.size();
  Q det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && sgn(m[p][c]) == 0) ++p;
    if (p == n) return 0;
    if (p != c) {
      std::swap(m[p], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (std::size_t i = c + 1; i < n; ++i) {
      if (sgn(m[i][c]) == 0) continue;
      Q f = m[i][c] / m[c][c];
      for (std::size_t j = c; j < n; ++j) m[i][j] -= f * m[c][j];
    }
  }
  return det;
}

std::vector<Vec> row_space_basis(const std::vector<Vec>& vs, std::size_t dim) {
  auto e = rref(vs, dim);
  std::vector<Vec> out;
  out.reserve(e.rows.size());
  for (auto& r : e.rows) out.push_back(primitive_signed(r));
  return out;
}

}  // namespace mori
