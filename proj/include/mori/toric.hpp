#pragma once

// Complete simplicial toric pairs (X, Delta): fan data, intersection theory,
// cones of curves and divisors, discrepancies, extremal contractions and flips.

#include "mori/numlat.hpp"
#include "mori/qcone.hpp"

#include <nlohmann/json_fwd.hpp>

#include <memory>
#include <optional>
#include <string>

namespace mori {

using IVec = std::vector<long long>;
using Cone = std::vector<std::size_t>;  // sorted ray indices

struct Fan {
  std::size_t dim = 0;
  std::vector<IVec> rays;
  std::vector<Cone> cones;  // maximal cones
  std::vector<std::string> labels;

  std::size_t picard_number() const { return rays.size() - dim; }
  std::optional<std::size_t> find_ray(const IVec& r) const;
  std::optional<std::size_t> find_label(const std::string& label) const;
  Vec ray(std::size_t i) const;

  /// Sorts each cone and the cone list; fills default labels.
  void normalize();
  /// Throws InputError unless rays are primitive and distinct, every cone is
  /// simplicial, every wall bounds exactly two cones on opposite sides, and a
  /// generic point lies in exactly one cone.
  void validate() const;
};

/// Coordinates of v in the basis of a simplicial cone's rays, or nullopt if
/// v is not in the cone.
std::optional<Vec> cone_coordinates(const Fan& fan, const Cone& cone, const Vec& v);
/// Some maximal cone containing v with its coordinates.
std::pair<std::size_t, Vec> locate(const Fan& fan, const Vec& v);
/// Value at v of the function linear on each maximal cone with value
/// values[i] on ray i.
Q piecewise_linear_value(const Fan& fan, std::span<const Q> values, const Vec& v);

/// Star subdivision at the primitive vector v (weighted blow-up).
Fan star_subdivision(const Fan& fan, const IVec& v, const std::string& label = {});

struct WallCurve {
  Cone wall;               // dim-1 rays shared by the two adjacent cones
  std::size_t left = 0;    // opposite ray in the first cone
  std::size_t right = 0;   // opposite ray in the second cone
  Vec relation;            // D_j . C for every ray j
  Vec curve_class;         // coordinates in the dual basis
};

struct MoriCones {
  QCone curves;          // NE_1
  QCone effective;       // NE^1
  QCone nef;             // NM^1
  QCone nef_curves;      // NM_1
};

/// A torus-invariant Q-divisor, one coefficient per ray of the fan.
using ToricDivisor = std::vector<Q>;

class ToricPair {
 public:
  /// Validates the fan and requires boundary coefficients in [0, 1) and rho > 0.
  ToricPair(Fan fan, std::vector<Q> delta);
  explicit ToricPair(Fan fan);

  const Fan& fan() const { return fan_; }
  const std::vector<Q>& delta() const { return delta_; }
  std::size_t dim() const { return fan_.dim; }
  std::size_t picard_number() const { return fan_.picard_number(); }

  /// The N^1 basis: classes of D_j for these rays (ascending indices).
  const std::vector<std::size_t>& basis_rays() const;
  const NumLattice& lattice() const;

  ClassVector divisor_class(std::size_t ray) const;
  ClassVector class_of(const ToricDivisor& d) const;
  /// Representative with support on the basis rays.
  ToricDivisor representative(const ClassVector& d) const;
  /// Curve class from a full intersection vector (D_j . C)_j.
  ClassVector curve_class(const Vec& relation) const;
  /// (D_j . C)_j for a curve class.
  Vec relation_of(const ClassVector& c) const;

  const std::vector<WallCurve>& walls() const;
  /// Index into walls() of the wall with exactly these rays.
  std::optional<std::size_t> find_wall(const Cone& wall) const;
  const MoriCones& cones() const;

  ToricDivisor canonical_divisor() const;          // -sum D_j
  ToricDivisor log_canonical_divisor() const;      // K + Delta

 private:
  struct Geometry;
  Fan fan_;
  std::vector<Q> delta_;
  std::shared_ptr<Geometry> geo_;
};

struct CanonicalClasses {
  ClassVector canonical;
  ClassVector boundary;
  ClassVector log_canonical;
};

CanonicalClasses canonical_and_boundary(const ToricPair& pair);
const MoriCones& mori_and_effective_cones(const ToricPair& pair);

/// a(E_v, X, Delta) = A(v) - 1 with A the log discrepancy function.
Q discrepancy(const ToricPair& pair, const IVec& v);
bool klt_check(const ToricPair& pair);

struct TerminalityConfig {
  long long height = 2;  // multiples of each ray added to box points
};
/// All discrepancies of non-ray primitive lattice points of bounded height > 0.
bool is_terminal(const ToricPair& pair, const TerminalityConfig& cfg = {});

enum class ContractionKind { fiber, divisorial, small };
std::string to_string(ContractionKind k);

/// Sign pattern of the relation of an extremal ray and the cones it touches.
struct Circuit {
  std::vector<std::size_t> positive;       // rays with D.C > 0
  std::vector<std::size_t> negative;       // rays with D.C < 0
  std::vector<Cone> links;                 // rays completing circuit faces to maximal cones
};

struct ContractionResult {
  ContractionKind kind = ContractionKind::fiber;
  Vec ray;                              // primitive curve class generating R
  Vec relation;                         // (D_j . C)_j of a wall curve in R
  std::vector<std::size_t> walls;       // indices of wall curves in R
  Circuit circuit;
  std::size_t target_dim = 0;           // dimension of the image
  std::optional<ToricPair> target;      // divisorial only
  std::optional<std::size_t> contracted_ray;
  std::optional<PushforwardMap> pushforward;
};

/// Extremal contraction of a (K+Delta)-negative extremal ray of NE_1.
ContractionResult classify_and_contract(const ToricPair& pair, const Vec& ray);

/// Replaces the cones of the circuit on the positive side by those on the
/// negative side. Swapping positive and negative undoes it.
Fan retriangulate(const Fan& fan, const Circuit& circuit);

struct FlipResult {
  ToricPair pair;
  PushforwardMap pushforward;
  std::vector<std::size_t> flipped_walls;  // indices into pair.walls()
};

FlipResult flip(const ToricPair& pair, const Circuit& circuit);

/// Pushforward along a map between two pairs whose rays are a superset of
/// the target's (divisorial contraction) or equal (flip).
PushforwardMap toric_pushforward(const ToricPair& source, const ToricPair& target);

struct Refinement {
  Fan fan;
  std::vector<std::optional<std::size_t>> in_a;  // W ray -> ray of a
  std::vector<std::optional<std::size_t>> in_b;
};

/// Simplicial common refinement: cone-wise intersections, triangulated by
/// pulling rays in a global order.
Refinement common_refinement(const Fan& a, const Fan& b);

Fan fan_from_json(const nlohmann::json& j);
ToricPair pair_from_json(const nlohmann::json& j);
nlohmann::json fan_to_json(const Fan& fan);
nlohmann::json pair_to_json(const ToricPair& pair);
ToricPair load_pair(const std::string& path);

/// Divisor expression over ray labels ("4C0+5f").
ToricDivisor parse_toric_divisor(const ToricPair& pair, const std::string& text);

}  // namespace mori
