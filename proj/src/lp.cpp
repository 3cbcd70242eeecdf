#include "mori/lp.hpp"

#include <optional>

namespace mori::lp {

namespace {

// Tableau rows 0..m-1 are constraints, column n holds the right-hand side.
// basis[i] is the basic variable of row i.
struct Tableau {
  Matrix t;
  std::vector<std::size_t> basis;
  std::size_t n = 0;

  void pivot(std::size_t r, std::size_t c) {
    Q inv = 1 / t[r][c];
    for (auto& x : t[r]) x *= inv;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i == r || sgn(t[i][c]) == 0) continue;
      Q f = t[i][c];
      for (std::size_t j = 0; j <= n; ++j)
        if (sgn(t[r][j]) != 0) t[i][j] -= f * t[r][j];
    }
    basis[r] = c;
  }

  // Minimizes cost over the allowed columns. Returns false if unbounded.
  bool optimize(std::span<const Q> cost, const std::vector<bool>& allowed) {
    const std::size_t m = basis.size();
    for (;;) {
      // Reduced costs: c_j - c_B B^-1 A_j, read directly off the tableau.
      std::optional<std::size_t> enter;
      for (std::size_t j = 0; j < n && !enter; ++j) {
        if (!allowed[j]) continue;
        Q rc = cost[j];
        for (std::size_t i = 0; i < m; ++i)
          if (sgn(t[i][j]) != 0) rc -= cost[basis[i]] * t[i][j];
        if (sgn(rc) < 0) enter = j;
      }
      if (!enter) return true;
      std::optional<std::size_t> leave;
      Q best;
      for (std::size_t i = 0; i < m; ++i) {
        if (sgn(t[i][*enter]) <= 0) continue;
        Q ratio = t[i][n] / t[i][*enter];
        if (!leave || ratio < best || (ratio == best && basis[i] < basis[*leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (!leave) return false;
      pivot(*leave, *enter);
    }
  }
};

}  // namespace

Result minimize(const Matrix& A, std::span<const Q> b, std::span<const Q> c) {
  const std::size_t m = A.size();
  const std::size_t nv = c.size();
  if (b.size() != m) throw InputError("lp: row count mismatch");
  for (const auto& row : A)
    if (row.size() != nv) throw InputError("lp: column count mismatch");

  // Columns: original variables, then one artificial per row.
  Tableau tab;
  tab.n = nv + m;
  tab.t.assign(m, Vec(tab.n + 1, Q(0)));
  tab.basis.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const bool flip = sgn(b[i]) < 0;
    for (std::size_t j = 0; j < nv; ++j) tab.t[i][j] = flip ? Q(-A[i][j]) : A[i][j];
    tab.t[i][nv + i] = 1;
    tab.t[i][tab.n] = flip ? Q(-b[i]) : b[i];
    tab.basis[i] = nv + i;
  }

  Vec phase1(tab.n, Q(0));
  for (std::size_t i = 0; i < m; ++i) phase1[nv + i] = 1;
  std::vector<bool> all(tab.n, true);
  tab.optimize(phase1, all);

  Q infeas = 0;
  for (std::size_t i = 0; i < m; ++i)
    if (tab.basis[i] >= nv) infeas += tab.t[i][tab.n];
  if (sgn(infeas) != 0) return {};

  // Drive remaining (zero-valued) artificials out of the basis where possible.
  for (std::size_t i = 0; i < m; ++i) {
    if (tab.basis[i] < nv) continue;
    for (std::size_t j = 0; j < nv; ++j) {
      if (sgn(tab.t[i][j]) != 0) {
        tab.pivot(i, j);
        break;
      }
    }
  }

  Vec cost(tab.n, Q(0));
  for (std::size_t j = 0; j < nv; ++j) cost[j] = c[j];
  std::vector<bool> original(tab.n, false);
  for (std::size_t j = 0; j < nv; ++j) original[j] = true;
  Result res;
  if (!tab.optimize(cost, original)) {
    res.status = Status::unbounded;
    return res;
  }
  res.status = Status::optimal;
  res.x = zero_vec(nv);
  for (std::size_t i = 0; i < m; ++i)
    if (tab.basis[i] < nv) res.x[tab.basis[i]] = tab.t[i][tab.n];
  res.value = dot(c, res.x);
  return res;
}

std::optional<Vec> nonnegative_combination(const std::vector<Vec>& gens, std::span<const Q> target) {
  const std::size_t d = target.size();
  if (gens.empty()) {
    if (is_zero(target)) return Vec{};
    return std::nullopt;
  }
  Matrix A(d, Vec(gens.size()));
  for (std::size_t j = 0; j < gens.size(); ++j) {
    if (gens[j].size() != d) throw InputError("lp: generator dimension mismatch");
    for (std::size_t i = 0; i < d; ++i) A[i][j] = gens[j][i];
  }
  Vec zero(gens.size(), Q(0));
  auto r = minimize(A, target, zero);
  if (r.status != Status::optimal) return std::nullopt;
  return r.x;
}

}  // namespace mori::lp
