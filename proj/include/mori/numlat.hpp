#pragma once

// Numerical class lattices N^1 / N_1, the intersection pairing, divisor
// pushforward along birational maps and the numerical pullback of curves.

#include "mori/qcone.hpp"
#include "mori/rational.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string>

namespace mori {

enum class Side { divisor, curve };

struct NumLattice {
  std::vector<std::string> basis_labels;
  // pairing[i][j] = (i-th divisor basis element) . (j-th curve basis element).
  // Toric lattices use the dual basis for curves, so this is the identity.
  Matrix pairing;
  bool abstract = false;  // no fan behind it; MMP operations refuse it

  std::size_t rank() const { return basis_labels.size(); }

  static NumLattice dual_basis(std::vector<std::string> labels);
  /// Throws InputError unless the pairing is square, sized to the labels and invertible.
  void validate() const;
  bool compatible(const NumLattice& other) const;
};

struct ClassVector {
  Side side = Side::divisor;
  Vec coords;

  static ClassVector divisor(Vec c) { return {Side::divisor, std::move(c)}; }
  static ClassVector curve(Vec c) { return {Side::curve, std::move(c)}; }
  bool operator==(const ClassVector&) const = default;
};

/// d . c under the lattice pairing.
Q intersect(const NumLattice& lat, const ClassVector& d, const ClassVector& c);

/// Coordinates of `x` in the basis `basis` (all on the same side), or nullopt
/// if x is outside their span or they are dependent.
std::optional<Vec> coordinates_in(const std::vector<Vec>& basis, const Vec& x);

/// phi_* : N^1(source) -> N^1(target) for a birational map whose inverse
/// contracts no divisor. `section` is phi^* : N^1(target) -> N^1(source).
struct PushforwardMap {
  NumLattice source;
  NumLattice target;
  Matrix matrix;   // rank(target) x rank(source)
  Matrix section;  // rank(source) x rank(target); matrix * section = identity

  static PushforwardMap identity(const NumLattice& lat);
  /// Throws InvariantViolation unless matrix is surjective and split by section.
  void validate() const;
  /// (this after first): X -> Y -> Z given first: X -> Y and this: Y -> Z.
  PushforwardMap after(const PushforwardMap& first) const;
};

ClassVector pushforward_divisor(const PushforwardMap& phi, const ClassVector& d);
ClassVector pullback_divisor(const PushforwardMap& phi, const ClassVector& d);
/// The dual of phi_*: the unique class m with phi^*(z).m = z.l for all z and
/// beta.m = 0 for every beta in ker phi_*.
ClassVector numerical_pullback(const PushforwardMap& phi, const ClassVector& l);

struct PositivityReport {
  bool ample = false;
  bool big = false;
  bool pseudo_effective = false;
  bool nef = false;
  bool degenerate = false;  // zero class
};

/// Kleiman-style tests: ample / big are interior membership, nef / pseudo-effective closed membership.
PositivityReport positivity(const ClassVector& d, const QCone& nef, const QCone& eff);

/// A lattice with cone data supplied directly (no fan).
struct AbstractModel {
  NumLattice lattice;
  QCone effective;  // NE^1
  QCone nef;        // NM^1
  ClassVector canonical;
  ClassVector boundary;

  /// Functional on curve coordinates computing d . (curve).
  Vec functional(const ClassVector& d) const;
  QCone curves() const;      // NE_1 = dual of NM^1 under the pairing
  QCone nef_curves() const;  // NM_1 = dual of NE^1 under the pairing
};

/// Parses {rank, basis_labels, eff_generators, nef_generators, K_class,
/// delta_class[, pairing]} with rationals as "p/q" strings or integers.
AbstractModel abstract_model_from_json(const nlohmann::json& j);

}  // namespace mori
