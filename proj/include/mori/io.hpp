#pragma once

// JSON helpers for exact rationals and the divisor expression mini-syntax.

#include "mori/rational.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <string>

namespace mori::io {

/// Accepts an integer or a "p/q" string.
Q rational_from_json(const nlohmann::json& j, const std::string& field);
Vec vec_from_json(const nlohmann::json& j, const std::string& field);
Matrix matrix_from_json(const nlohmann::json& j, const std::string& field);

/// Rationals always serialize as strings ("p/q" or "p").
nlohmann::json to_json(const Q& q);
nlohmann::json to_json(const Vec& v);
nlohmann::json to_json(const Matrix& m);

/// One term of a divisor expression such as "4C0 + 5f" or "3/2*f - D2".
struct Term {
  Q coefficient;
  std::string label;
};

/// Parses "a label +- b label ..." where coefficients are optional exact
/// rationals and '*' or a middle dot may separate coefficient and label.
/// Repeated labels are summed.
std::map<std::string, Q> parse_divisor_expression(const std::string& text);

/// Reads a whole file; throws InputError if unreadable.
std::string read_file(const std::string& path);
/// Parses JSON text, turning parse errors into InputError with byte offset.
nlohmann::json parse_json(const std::string& text, const std::string& origin);

}  // namespace mori::io
