#pragma once

// Rational polyhedral cones with a cached double-description pair.
//
// A cone is given either by generators (rays plus a lineality basis) or by
// inequalities f.x >= 0 plus equations e.x = 0. The other representation is
// computed on demand and cached; values are immutable and cheap to copy.

#include "mori/rational.hpp"

#include <memory>
#include <optional>

namespace mori {

/// Output of the double description method on {x : a.x >= 0 for all a}.
struct DDResult {
  std::vector<Vec> rays;       // extreme rays modulo lineality, primitive, sorted
  std::vector<Vec> lineality;  // basis of the lineality space
};

/// Minimal generators of {x in Q^dim : a.x >= 0 for every a in ineqs}.
/// Inequalities are inserted in the given order; output is canonical.
DDResult double_description(std::size_t dim, const std::vector<Vec>& ineqs);

class QCone {
 public:
  static QCone from_generators(std::size_t dim, std::vector<Vec> rays, std::vector<Vec> lineality = {});
  static QCone from_inequalities(std::size_t dim, std::vector<Vec> ineqs, std::vector<Vec> equations = {});
  static QCone zero(std::size_t dim);
  static QCone full(std::size_t dim);

  std::size_t dim() const;

  /// Minimal rays (modulo lineality) and a lineality basis.
  const std::vector<Vec>& rays() const;
  const std::vector<Vec>& lineality() const;
  /// Irredundant facet normals and a basis of the implicit equations.
  const std::vector<Vec>& facets() const;
  const std::vector<Vec>& equations() const;

  bool is_pointed() const { return lineality().empty(); }
  bool is_full_dimensional() const { return equations().empty(); }
  bool is_zero() const { return rays().empty() && lineality().empty(); }
  std::size_t cone_dimension() const { return dim() - equations().size(); }

  /// Primitive extremal ray generators. Throws InputError naming a lineality
  /// vector when the cone is not pointed.
  std::vector<Vec> extremal_rays() const;
  /// Extremal rays cut out by a supporting functional. Equal to
  /// extremal_rays() for every polyhedral cone; computed independently.
  std::vector<Vec> exposed_rays() const;
  /// A functional in dual() vanishing exactly on ray r within the cone.
  std::optional<Vec> exposing_functional(const Vec& r) const;

  QCone dual() const;
  QCone sum(const QCone& other) const;
  QCone intersect(const QCone& other) const;
  /// C intersected with {x : d.x >= 0}.
  QCone restrict_halfspace(const Vec& d) const;

  bool contains(const Vec& z) const;
  /// z in the relative interior when full-dimensional: strictly positive on every facet.
  bool interior_contains(const Vec& z) const;
  /// Coefficients over rays() followed by signed coefficients over lineality().
  std::optional<Vec> membership_certificate(const Vec& z) const;
  bool contains(const QCone& other) const;

 private:
  struct State;
  explicit QCone(std::shared_ptr<State> s) : state_(std::move(s)) {}
  std::shared_ptr<State> state_;
};

struct EqualityCertificate {
  bool equal = false;
  // Coefficient vectors expressing each generator of one cone in the other.
  std::vector<Vec> a_in_b;
  std::vector<Vec> b_in_a;
  // On failure: a generator of one cone outside the other.
  std::optional<Vec> witness;
  bool witness_in_a = false;  // witness is a generator of `a` missing from `b`
};

/// Equality by mutual containment; every containment carries a certificate.
EqualityCertificate certify_equal(const QCone& a, const QCone& b);
bool operator==(const QCone& a, const QCone& b);

}  // namespace mori
