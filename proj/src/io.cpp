#include "mori/io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace mori::io {

Q rational_from_json(const nlohmann::json& j, const std::string& field) {
  if (j.is_number_integer()) return Q(j.get<long>());
  if (j.is_string()) {
    try {
      return parse_rational(j.get<std::string>());
    } catch (const InputError& e) {
      throw InputError("field '" + field + "': " + e.what());
    }
  }
  throw InputError("field '" + field + "': expected an integer or a \"p/q\" string, got " + j.dump());
}

Vec vec_from_json(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array()) throw InputError("field '" + field + "': expected an array");
  Vec out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(rational_from_json(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

Matrix matrix_from_json(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array()) throw InputError("field '" + field + "': expected an array of arrays");
  Matrix out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(vec_from_json(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

nlohmann::json to_json(const Q& q) { return to_string(q); }

nlohmann::json to_json(const Vec& v) {
  auto out = nlohmann::json::array();
  for (const auto& x : v) out.push_back(to_string(x));
  return out;
}

nlohmann::json to_json(const Matrix& m) {
  auto out = nlohmann::json::array();
  for (const auto& row : m) out.push_back(to_json(row));
  return out;
}

namespace {

class ExprParser {
 public:
  explicit ExprParser(const std::string& s) : s_(s) {}

  std::map<std::string, Q> parse() {
    std::map<std::string, Q> out;
    skip_ws();
    if (eof()) throw error("empty divisor expression");
    bool first = true;
    while (!eof()) {
      Q sign = 1;
      skip_ws();
      if (peek() == '+' || peek() == '-') {
        if (peek() == '-') sign = -1;
        ++pos_;
      } else if (!first) {
        throw error("expected '+' or '-'");
      }
      skip_ws();
      Q coef = 1;
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        coef = number();
        skip_ws();
        if (peek() == '/') {
          ++pos_;
          skip_ws();
          Q den = number();
          if (sgn(den) == 0) throw error("zero denominator");
          coef /= den;
          skip_ws();
        }
        skip_multiply();
      }
      std::string label = identifier();
      out[label] += sign * coef;
      first = false;
      skip_ws();
    }
    return out;
  }

 private:
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }
  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  void skip_multiply() {
    if (peek() == '*') {
      ++pos_;
    } else if (s_.compare(pos_, 2, "\xC2\xB7") == 0) {  // U+00B7 middle dot
      pos_ += 2;
    }
    skip_ws();
  }
  Q number() {
    std::size_t start = pos_;
    while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    if (start == pos_) throw error("expected a number");
    return Q(mpz_class(s_.substr(start, pos_ - start)));
  }
  std::string identifier() {
    std::size_t start = pos_;
    if (!(std::isalpha(static_cast<unsigned char>(peek())) || peek() == '_')) throw error("expected a label");
    while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '\'') ++pos_;
    return s_.substr(start, pos_ - start);
  }
  InputError error(const std::string& what) const {
    return InputError("divisor expression '" + s_ + "': " + what + " at column " + std::to_string(pos_ + 1));
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::map<std::string, Q> parse_divisor_expression(const std::string& text) { return ExprParser(text).parse(); }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json parse_json(const std::string& text, const std::string& origin) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Report a line number alongside the byte offset.
    std::size_t line = 1;
    for (std::size_t i = 0; i < text.size() && i < e.byte; ++i)
      if (text[i] == '\n') ++line;
    throw InputError(origin + ": malformed JSON at line " + std::to_string(line) + ": " + e.what());
  }
}

}  // namespace mori::io
