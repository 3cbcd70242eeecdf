#pragma once

// Exact rational scalars, vectors and dense matrices.

#include <gmpxx.h>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mori {

using Q = mpq_class;
using Vec = std::vector<Q>;
using Matrix = std::vector<Vec>;  // row-major

/// Input that violates a documented precondition or format. Maps to CLI exit 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A mathematical contract failed at runtime. Maps to CLI exit 1.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses "p", "-p", "p/q" (optionally surrounded by whitespace).
Q parse_rational(std::string_view text);

/// "p/q" in lowest terms, or "p" when the denominator is 1.
std::string to_string(const Q& q);
std::string to_string(std::span<const Q> v);

Vec zero_vec(std::size_t n);
Vec unit_vec(std::size_t n, std::size_t i);
Vec from_ints(std::span<const long long> v);

Q dot(std::span<const Q> a, std::span<const Q> b);
Vec add(std::span<const Q> a, std::span<const Q> b);
Vec sub(std::span<const Q> a, std::span<const Q> b);
Vec scale(std::span<const Q> a, const Q& s);
/// a + s*b
Vec axpy(std::span<const Q> a, const Q& s, std::span<const Q> b);
Vec negate(std::span<const Q> a);
bool is_zero(std::span<const Q> a);

/// Positive rescaling to a primitive integer vector. Direction is kept.
Vec primitive(std::span<const Q> v);
/// Primitive rescaling with the first nonzero entry made positive.
Vec primitive_signed(std::span<const Q> v);
/// True iff a = c*b for some c > 0.
bool same_ray(std::span<const Q> a, std::span<const Q> b);

/// Lexicographic order on rational vectors.
bool lex_less(const Vec& a, const Vec& b);
void sort_unique(std::vector<Vec>& vs);

Matrix transpose(const Matrix& m, std::size_t cols);
Vec mat_vec(const Matrix& m, std::span<const Q> v);
Matrix mat_mul(const Matrix& a, const Matrix& b, std::size_t b_cols);
Matrix identity(std::size_t n);

}  // namespace mori
