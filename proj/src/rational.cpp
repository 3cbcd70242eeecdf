#include "mori/rational.hpp"

#include <algorithm>
#include <cctype>

namespace mori {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_integer(std::string_view s) {
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

std::string strip_plus(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  return std::string(s);
}

}  // namespace

Q parse_rational(std::string_view text) {
  auto s = trim(text);
  auto slash = s.find('/');
  auto num = trim(s.substr(0, slash));
  if (!valid_integer(num)) throw InputError("malformed rational '" + std::string(text) + "'");
  mpz_class n(strip_plus(num));
  mpz_class d = 1;
  if (slash != std::string_view::npos) {
    auto den = trim(s.substr(slash + 1));
    if (!valid_integer(den)) throw InputError("malformed rational '" + std::string(text) + "'");
    d = mpz_class(strip_plus(den));
    if (d == 0) throw InputError("zero denominator in '" + std::string(text) + "'");
  }
  Q q(n, d);
  q.canonicalize();
  return q;
}

std::string to_string(const Q& q) { return q.get_str(); }

std::string to_string(std::span<const Q> v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += v[i].get_str();
  }
  return out + ")";
}

Vec zero_vec(std::size_t n) { return Vec(n, Q(0)); }

Vec unit_vec(std::size_t n, std::size_t i) {
  Vec v(n, Q(0));
  v.at(i) = 1;
  return v;
}

Vec from_ints(std::span<const long long> v) {
  Vec out;
  out.reserve(v.size());
  for (long long x : v) out.emplace_back(static_cast<long>(x));
  return out;
}

Q dot(std::span<const Q> a, std::span<const Q> b) {
  if (a.size() != b.size()) throw InputError("dimension mismatch in dot product");
  Q s = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (sgn(a[i]) != 0 && sgn(b[i]) != 0) s += a[i] * b[i];
  return s;
}

Vec add(std::span<const Q> a, std::span<const Q> b) {
  if (a.size() != b.size()) throw InputError("dimension mismatch in vector sum");
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

Vec sub(std::span<const Q> a, std::span<const Q> b) {
  if (a.size() != b.size()) throw InputError("dimension mismatch in vector difference");
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

Vec scale(std::span<const Q> a, const Q& s) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * s;
  return out;
}

Vec axpy(std::span<const Q> a, const Q& s, std::span<const Q> b) {
  if (a.size() != b.size()) throw InputError("dimension mismatch in axpy");
  Vec out(a.begin(), a.end());
  if (sgn(s) == 0) return out;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (sgn(b[i]) != 0) out[i] += s * b[i];
  return out;
}

Vec negate(std::span<const Q> a) { return scale(a, Q(-1)); }

bool is_zero(std::span<const Q> a) {
  return std::all_of(a.begin(), a.end(), [](const Q& x) { return sgn(x) == 0; });
}

Vec primitive(std::span<const Q> v) {
  if (is_zero(v)) return Vec(v.begin(), v.end());
  mpz_class l = 1;
  for (const auto& x : v) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
  mpz_class g = 0;
  std::vector<mpz_class> ints;
  ints.reserve(v.size());
  for (const auto& x : v) {
    mpz_class n = x.get_num() * (l / x.get_den());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), n.get_mpz_t());
    ints.push_back(std::move(n));
  }
  Vec out;
  out.reserve(v.size());
  for (auto& n : ints) out.emplace_back(mpz_class(n / g));
  return out;
}

Vec primitive_signed(std::span<const Q> v) {
  Vec p = primitive(v);
  for (const auto& x : p) {
    if (sgn(x) == 0) continue;
    if (sgn(x) < 0) p = negate(p);
    break;
  }
  return p;
}

bool same_ray(std::span<const Q> a, std::span<const Q> b) {
  if (a.size() != b.size()) return false;
  if (is_zero(a) || is_zero(b)) return is_zero(a) && is_zero(b);
  return primitive(a) == primitive(b);
}

bool lex_less(const Vec& a, const Vec& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

void sort_unique(std::vector<Vec>& vs) {
  std::sort(vs.begin(), vs.end(), lex_less);
  vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
}

Matrix transpose(const Matrix& m, std::size_t cols) {
  Matrix t(cols, Vec(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) t[j][i] = m[i][j];
  return t;
}

Vec mat_vec(const Matrix& m, std::span<const Q> v) {
  Vec out;
  out.reserve(m.size());
  for (const auto& row : m) out.push_back(dot(row, v));
  return out;
}

Matrix mat_mul(const Matrix& a, const Matrix& b, std::size_t b_cols) {
  Matrix out(a.size(), Vec(b_cols, Q(0)));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() != b.size()) throw InputError("dimension mismatch in matrix product");
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (sgn(a[i][k]) == 0) continue;
      for (std::size_t j = 0; j < b_cols; ++j) out[i][j] += a[i][k] * b[k][j];
    }
  }
  return out;
}

Matrix identity(std::size_t n) {
  Matrix m(n, Vec(n, Q(0)));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

}  // namespace mori
