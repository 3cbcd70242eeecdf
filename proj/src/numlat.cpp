#include "mori/numlat.hpp"

#include "mori/io.hpp"
#include "mori/linalg.hpp"

#include <nlohmann/json.hpp>

namespace mori {

NumLattice NumLattice::dual_basis(std::vector<std::string> labels) {
  NumLattice lat;
  lat.pairing = identity(labels.size());
  lat.basis_labels = std::move(labels);
  return lat;
}

void NumLattice::validate() const {
  const std::size_t r = rank();
  if (r == 0) throw InputError("lattice rank must be positive");
  if (pairing.size() != r) throw InputError("pairing matrix must be rank x rank");
  for (const auto& row : pairing)
    if (row.size() != r) throw InputError("pairing matrix must be rank x rank");
  if (mori::rank(pairing, r) != r) throw InputError("pairing is degenerate");
}

bool NumLattice::compatible(const NumLattice& other) const {
  return basis_labels == other.basis_labels && pairing == other.pairing;
}

Q intersect(const NumLattice& lat, const ClassVector& d, const ClassVector& c) {
  if (d.side != Side::divisor || c.side != Side::curve)
    throw InputError("intersection pairs a divisor class with a curve class");
  if (d.coords.size() != lat.rank() || c.coords.size() != lat.rank())
    throw InputError("class vector length does not match the lattice rank");
  return dot(d.coords, mat_vec(lat.pairing, c.coords));
}

std::optional<Vec> coordinates_in(const std::vector<Vec>& basis, const Vec& x) {
  if (basis.empty()) return is_zero(x) ? std::optional<Vec>(Vec{}) : std::nullopt;
  const std::size_t n = x.size();
  Matrix m(n, Vec(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (basis[j].size() != n) throw InputError("basis vector length mismatch");
    for (std::size_t i = 0; i < n; ++i) m[i][j] = basis[j][i];
  }
  if (rank(m, basis.size()) != basis.size()) return std::nullopt;
  return solve_any(m, basis.size(), x);
}

PushforwardMap PushforwardMap::identity(const NumLattice& lat) {
  return {lat, lat, mori::identity(lat.rank()), mori::identity(lat.rank())};
}

void PushforwardMap::validate() const {
  const std::size_t rs = source.rank(), rt = target.rank();
  if (matrix.size() != rt || section.size() != rs) throw InvariantViolation("pushforward matrix has the wrong shape");
  if (rank(matrix, rs) != rt) throw InvariantViolation("pushforward is not surjective");
  if (mat_mul(matrix, section, rt) != mori::identity(rt))
    throw InvariantViolation("pushforward composed with pullback is not the identity");
}

PushforwardMap PushforwardMap::after(const PushforwardMap& first) const {
  if (!first.target.compatible(source)) throw InputError("cannot compose maps between different lattices");
  return {first.source, target, mat_mul(matrix, first.matrix, first.source.rank()),
          mat_mul(first.section, section, target.rank())};
}

ClassVector pushforward_divisor(const PushforwardMap& phi, const ClassVector& d) {
  if (d.side != Side::divisor) throw InputError("pushforward takes a divisor class");
  if (d.coords.size() != phi.source.rank()) throw InputError("divisor class does not live on the map's source");
  return ClassVector::divisor(mat_vec(phi.matrix, d.coords));
}

ClassVector pullback_divisor(const PushforwardMap& phi, const ClassVector& d) {
  if (d.side != Side::divisor) throw InputError("pullback takes a divisor class");
  if (d.coords.size() != phi.target.rank()) throw InputError("divisor class does not live on the map's target");
  return ClassVector::divisor(mat_vec(phi.section, d.coords));
}

ClassVector numerical_pullback(const PushforwardMap& phi, const ClassVector& l) {
  if (l.side != Side::curve) throw InputError("numerical pullback takes a curve class");
  if (l.coords.size() != phi.target.rank()) throw InputError("curve class does not live on the map's target");
  // z.l = z^T G' l must equal (phi^* z)^T G m for every z; with phi_* P the
  // dual map is m = G^{-1} P^T G' l.
  auto ginv = inverse(phi.source.pairing);
  if (!ginv) throw InputError("degenerate pairing on the source lattice");
  Vec w = mat_vec(phi.target.pairing, l.coords);
  Vec pt = mat_vec(transpose(phi.matrix, phi.source.rank()), w);
  return ClassVector::curve(mat_vec(*ginv, pt));
}

PositivityReport positivity(const ClassVector& d, const QCone& nef, const QCone& eff) {
  if (d.side != Side::divisor) throw InputError("positivity tests take a divisor class");
  if (d.coords.size() != nef.dim() || d.coords.size() != eff.dim())
    throw InputError("divisor class and cones live in different lattices");
  PositivityReport r;
  if (is_zero(d.coords)) {
    r.degenerate = true;
    r.nef = true;
    r.pseudo_effective = true;
    return r;
  }
  r.nef = nef.contains(d.coords);
  r.pseudo_effective = eff.contains(d.coords);
  r.ample = nef.interior_contains(d.coords);
  r.big = eff.interior_contains(d.coords);
  return r;
}

AbstractModel abstract_model_from_json(const nlohmann::json& j) {
  auto need = [&](const char* key) -> const nlohmann::json& {
    if (!j.contains(key)) throw InputError(std::string("abstract model: missing field '") + key + "'");
    return j.at(key);
  };
  const auto rank = need("rank").get<std::size_t>();
  NumLattice lat;
  lat.abstract = true;
  lat.basis_labels = need("basis_labels").get<std::vector<std::string>>();
  if (lat.basis_labels.size() != rank) throw InputError("abstract model: rank differs from the number of basis labels");
  lat.pairing = j.contains("pairing") ? io::matrix_from_json(j.at("pairing"), "pairing") : identity(rank);
  lat.validate();

  auto gens = [&](const char* key) {
    auto m = io::matrix_from_json(need(key), key);
    for (const auto& g : m)
      if (g.size() != rank) throw InputError(std::string("abstract model: '") + key + "' vector has the wrong length");
    return m;
  };
  auto cls = [&](const char* key) {
    auto v = io::vec_from_json(need(key), key);
    if (v.size() != rank) throw InputError(std::string("abstract model: '") + key + "' has the wrong length");
    return ClassVector::divisor(std::move(v));
  };
  return AbstractModel{lat, QCone::from_generators(rank, gens("eff_generators")),
                       QCone::from_generators(rank, gens("nef_generators")), cls("K_class"), cls("delta_class")};
}

Vec AbstractModel::functional(const ClassVector& d) const {
  if (d.side != Side::divisor || d.coords.size() != lattice.rank())
    throw InputError("functional expects a divisor class on this lattice");
  return mat_vec(transpose(lattice.pairing, lattice.rank()), d.coords);
}

namespace {

QCone dual_under_pairing(const AbstractModel& m, const QCone& divisor_cone) {
  std::vector<Vec> forms;
  for (const auto& g : divisor_cone.rays()) forms.push_back(m.functional(ClassVector::divisor(g)));
  for (const auto& l : divisor_cone.lineality()) {
    forms.push_back(m.functional(ClassVector::divisor(l)));
    forms.push_back(negate(forms.back()));
  }
  return QCone::from_inequalities(m.lattice.rank(), std::move(forms));
}

}  // namespace

QCone AbstractModel::curves() const { return dual_under_pairing(*this, nef); }

QCone AbstractModel::nef_curves() const { return dual_under_pairing(*this, effective); }

}  // namespace mori
