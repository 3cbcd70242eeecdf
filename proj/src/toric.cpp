#include "mori/toric.hpp"

#include "mori/io.hpp"
#include "mori/linalg.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <set>

namespace mori {

namespace {

Vec to_vec(const IVec& v) { return from_ints(v); }

IVec to_ivec(const Vec& v) {
  IVec out;
  for (const auto& x : v) {
    if (x.get_den() != 1 || !x.get_num().fits_slong_p()) throw InputError("ray is not a machine-size integer vector");
    out.push_back(x.get_num().get_si());
  }
  return out;
}

Matrix cone_columns(const Fan& fan, const Cone& c) {
  Matrix m(fan.dim, Vec(c.size()));
  for (std::size_t j = 0; j < c.size(); ++j)
    for (std::size_t i = 0; i < fan.dim; ++i) m[i][j] = Q(static_cast<long>(fan.rays[c[j]][i]));
  return m;
}

// gcd of the maximal minors of a dim x (dim-1) integer matrix.
mpz_class face_multiplicity(const Fan& fan, const Cone& face) {
  if (face.empty()) return 1;
  Matrix cols = cone_columns(fan, face);
  mpz_class g = 0;
  for (std::size_t skip = 0; skip < fan.dim; ++skip) {
    Matrix minor;
    for (std::size_t i = 0; i < fan.dim; ++i)
      if (i != skip) minor.push_back(cols[i]);
    Q d = determinant(minor);
    mpz_class n = abs(d.get_num());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), n.get_mpz_t());
  }
  return g;
}

Cone without(const Cone& c, std::size_t x) {
  Cone out;
  for (auto i : c)
    if (i != x) out.push_back(i);
  return out;
}

Cone sorted(Cone c) {
  std::sort(c.begin(), c.end());
  return c;
}

// Facet (wall) -> maximal cones containing it.
std::map<Cone, std::vector<std::size_t>> wall_map(const Fan& fan) {
  std::map<Cone, std::vector<std::size_t>> walls;
  for (std::size_t ci = 0; ci < fan.cones.size(); ++ci)
    for (auto r : fan.cones[ci]) walls[without(fan.cones[ci], r)].push_back(ci);
  return walls;
}

std::size_t opposite(const Cone& cone, const Cone& wall) {
  for (auto r : cone)
    if (!std::binary_search(wall.begin(), wall.end(), r)) return r;
  throw InvariantViolation("wall is not a facet of the cone");
}

Vec generic_point(std::size_t dim, int k) {
  Vec p(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    long long c = static_cast<long long>((i + 1) * (7 + 3 * k)) * 31 + k * k * 13 + 1 + static_cast<long long>(i * i * 101);
    p[i] = ((i + static_cast<std::size_t>(k)) % 2) ? Q(static_cast<long>(-c)) : Q(static_cast<long>(c));
  }
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// Fan

std::optional<std::size_t> Fan::find_ray(const IVec& r) const {
  for (std::size_t i = 0; i < rays.size(); ++i)
    if (rays[i] == r) return i;
  return std::nullopt;
}

std::optional<std::size_t> Fan::find_label(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return i;
  return std::nullopt;
}

Vec Fan::ray(std::size_t i) const { return to_vec(rays.at(i)); }

void Fan::normalize() {
  for (auto& c : cones) std::sort(c.begin(), c.end());
  std::sort(cones.begin(), cones.end());
  if (labels.size() != rays.size()) {
    labels.clear();
    for (std::size_t i = 0; i < rays.size(); ++i) labels.push_back("D" + std::to_string(i));
  }
}

void Fan::validate() const {
  if (dim == 0) throw InputError("fan dimension must be positive");
  if (rays.size() <= dim) throw InputError("fan needs more rays than its dimension (Picard number must be positive)");
  if (labels.size() != rays.size()) throw InputError("fan labels must match the rays");
  std::set<std::string> seen_labels(labels.begin(), labels.end());
  if (seen_labels.size() != labels.size()) throw InputError("fan labels must be distinct");
  std::set<IVec> seen;
  for (std::size_t i = 0; i < rays.size(); ++i) {
    const auto& r = rays[i];
    if (r.size() != dim) throw InputError("ray " + std::to_string(i) + " has the wrong length");
    long long g = 0;
    for (auto x : r) g = std::gcd(g, x);
    if (g == 0) throw InputError("ray " + std::to_string(i) + " is zero");
    if (g != 1) throw InputError("ray " + std::to_string(i) + " is not primitive");
    if (!seen.insert(r).second) throw InputError("ray " + std::to_string(i) + " is repeated");
  }
  std::set<Cone> seen_cones;
  std::vector<bool> used(rays.size(), false);
  for (const auto& c : cones) {
    if (c.size() != dim) throw InputError("maximal cone with " + std::to_string(c.size()) + " rays is not simplicial full-dimensional");
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c[i] >= rays.size()) throw InputError("cone refers to a missing ray");
      if (i && c[i] <= c[i - 1]) throw InputError("cone indices must be sorted and distinct");
      used[c[i]] = true;
    }
    if (!seen_cones.insert(c).second) throw InputError("repeated maximal cone");
    if (sgn(determinant(cone_columns(*this, c))) == 0) throw InputError("maximal cone rays are linearly dependent");
  }
  for (std::size_t i = 0; i < rays.size(); ++i)
    if (!used[i]) throw InputError("ray " + std::to_string(i) + " lies in no maximal cone");

  std::vector<Vec> normals;
  for (const auto& [wall, cs] : wall_map(*this)) {
    if (cs.size() != 2)
      throw InputError("fan is not complete: a wall bounds " + std::to_string(cs.size()) + " maximal cone(s)");
    Matrix m;
    for (auto r : wall) m.push_back(ray(r));
    Vec n = wall.empty() ? unit_vec(dim, 0) : kernel(m, dim).at(0);
    int s1 = sgn(dot(n, ray(opposite(cones[cs[0]], wall))));
    int s2 = sgn(dot(n, ray(opposite(cones[cs[1]], wall))));
    if (s1 * s2 >= 0) throw InputError("fan is not complete: adjacent cones overlap across a wall");
    normals.push_back(std::move(n));
  }
  // Degree one: a generic point lies in exactly one cone.
  int checked = 0;
  for (int k = 0; k < 64 && checked < 2; ++k) {
    Vec p = generic_point(dim, k);
    bool on_wall = std::any_of(normals.begin(), normals.end(), [&](const Vec& n) { return sgn(dot(n, p)) == 0; });
    if (on_wall) continue;
    int hits = 0;
    for (const auto& c : cones)
      if (cone_coordinates(*this, c, p)) ++hits;
    if (hits != 1) throw InputError("fan is not complete: a generic point lies in " + std::to_string(hits) + " cones");
    ++checked;
  }
}

std::optional<Vec> cone_coordinates(const Fan& fan, const Cone& cone, const Vec& v) {
  auto x = solve_square(cone_columns(fan, cone), v);
  if (!x) return std::nullopt;
  for (const auto& c : *x)
    if (sgn(c) < 0) return std::nullopt;
  return x;
}

std::pair<std::size_t, Vec> locate(const Fan& fan, const Vec& v) {
  if (v.size() != fan.dim) throw InputError("vector has the wrong dimension for this fan");
  for (std::size_t i = 0; i < fan.cones.size(); ++i)
    if (auto x = cone_coordinates(fan, fan.cones[i], v)) return {i, *x};
  throw InputError("vector " + to_string(v) + " lies outside the support of the fan");
}

Q piecewise_linear_value(const Fan& fan, std::span<const Q> values, const Vec& v) {
  auto [ci, coords] = locate(fan, v);
  Q out = 0;
  const auto& cone = fan.cones[ci];
  for (std::size_t k = 0; k < cone.size(); ++k) out += coords[k] * values[cone[k]];
  return out;
}

Fan star_subdivision(const Fan& fan, const IVec& v, const std::string& label) {
  if (fan.find_ray(v)) throw InputError("star subdivision at an existing ray");
  auto [ci, coords] = locate(fan, to_vec(v));
  Cone face;
  for (std::size_t k = 0; k < coords.size(); ++k)
    if (sgn(coords[k]) > 0) face.push_back(fan.cones[ci][k]);
  Fan out = fan;
  const std::size_t nv = fan.rays.size();
  out.rays.push_back(v);
  out.labels.push_back(label.empty() ? "E" + std::to_string(nv) : label);
  out.cones.clear();
  for (const auto& c : fan.cones) {
    bool contains_face = std::includes(c.begin(), c.end(), face.begin(), face.end());
    if (!contains_face) {
      out.cones.push_back(c);
      continue;
    }
    for (auto r : face) {
      Cone nc = without(c, r);
      nc.push_back(nv);
      out.cones.push_back(sorted(nc));
    }
  }
  out.normalize();
  out.validate();
  return out;
}

// ---------------------------------------------------------------------------
// ToricPair

struct ToricPair::Geometry {
  std::vector<std::size_t> basis;
  Matrix class_rows;  // n x rho: class of each D_j
  NumLattice lattice;
  std::vector<WallCurve> walls;
  std::map<Cone, std::size_t> wall_index;

  std::once_flag cones_once;
  std::optional<MoriCones> cones;
};

ToricPair::ToricPair(Fan fan) : ToricPair(fan, std::vector<Q>(fan.rays.size(), Q(0))) {}

ToricPair::ToricPair(Fan fan, std::vector<Q> delta) : fan_(std::move(fan)), delta_(std::move(delta)) {
  fan_.normalize();
  fan_.validate();
  const std::size_t n = fan_.rays.size(), d = fan_.dim, rho = n - d;
  if (delta_.size() != n) throw InputError("boundary needs one coefficient per ray");
  for (std::size_t i = 0; i < n; ++i)
    if (sgn(delta_[i]) < 0 || delta_[i] >= 1)
      throw InputError("boundary coefficient of ray " + std::to_string(i) + " is outside [0, 1)");

  auto g = std::make_shared<Geometry>();
  // The last independent rays (scanning from the end) are eliminated; the
  // classes of the remaining divisors form the basis.
  std::vector<std::size_t> elim;
  Matrix acc;
  for (std::size_t j = n; j-- > 0 && elim.size() < d;) {
    acc.push_back(fan_.ray(j));
    if (rank(acc, d) == acc.size()) {
      elim.push_back(j);
    } else {
      acc.pop_back();
    }
  }
  std::sort(elim.begin(), elim.end());
  for (std::size_t j = 0; j < n; ++j)
    if (!std::binary_search(elim.begin(), elim.end(), j)) g->basis.push_back(j);

  // sum_j c_j u_j = 0 gives c_elim = -M_elim^{-1} M_basis c_basis.
  Matrix m_elim = cone_columns(fan_, elim);
  Matrix m_basis = cone_columns(fan_, g->basis);
  auto inv = inverse(m_elim);
  Matrix b = mat_mul(*inv, m_basis, rho);
  g->class_rows.assign(n, zero_vec(rho));
  for (std::size_t k = 0; k < rho; ++k) g->class_rows[g->basis[k]][k] = 1;
  for (std::size_t p = 0; p < d; ++p) g->class_rows[elim[p]] = negate(b[p]);

  std::vector<std::string> labels;
  for (auto j : g->basis) labels.push_back(fan_.labels[j]);
  g->lattice = NumLattice::dual_basis(std::move(labels));

  for (const auto& [wall, cs] : wall_map(fan_)) {
    WallCurve w;
    w.wall = wall;
    w.left = opposite(fan_.cones[cs[0]], wall);
    w.right = opposite(fan_.cones[cs[1]], wall);
    Cone all{w.left, w.right};
    all.insert(all.end(), wall.begin(), wall.end());
    auto ker = kernel(cone_columns(fan_, all), all.size());
    Vec rel = ker.at(0);
    if (sgn(rel[0]) < 0) rel = negate(rel);
    // D_left . C = mult(wall) / mult(wall + left).
    Cone left_cone = sorted(Cone(fan_.cones[cs[0]]));
    Q mult_cone = abs(determinant(cone_columns(fan_, left_cone)));
    Q target = Q(face_multiplicity(fan_, wall)) / mult_cone;
    rel = scale(rel, target / rel[0]);
    if (sgn(rel[1]) <= 0) throw InvariantViolation("wall relation is not positive on both opposite rays");
    w.relation = zero_vec(n);
    for (std::size_t k = 0; k < all.size(); ++k) w.relation[all[k]] = rel[k];
    w.curve_class = zero_vec(rho);
    for (std::size_t k = 0; k < rho; ++k) w.curve_class[k] = w.relation[g->basis[k]];
    g->wall_index[wall] = g->walls.size();
    g->walls.push_back(std::move(w));
  }
  geo_ = std::move(g);
}

const std::vector<std::size_t>& ToricPair::basis_rays() const { return geo_->basis; }

const NumLattice& ToricPair::lattice() const { return geo_->lattice; }

ClassVector ToricPair::divisor_class(std::size_t ray) const { return ClassVector::divisor(geo_->class_rows.at(ray)); }

ClassVector ToricPair::class_of(const ToricDivisor& d) const {
  if (d.size() != fan_.rays.size()) throw InputError("torus-invariant divisor needs one coefficient per ray");
  Vec c = zero_vec(picard_number());
  for (std::size_t j = 0; j < d.size(); ++j)
    if (sgn(d[j]) != 0) c = axpy(c, d[j], geo_->class_rows[j]);
  return ClassVector::divisor(std::move(c));
}

ToricDivisor ToricPair::representative(const ClassVector& d) const {
  if (d.side != Side::divisor || d.coords.size() != picard_number())
    throw InputError("expected a divisor class on this pair");
  ToricDivisor out(fan_.rays.size(), Q(0));
  for (std::size_t k = 0; k < geo_->basis.size(); ++k) out[geo_->basis[k]] = d.coords[k];
  return out;
}

ClassVector ToricPair::curve_class(const Vec& relation) const {
  if (relation.size() != fan_.rays.size()) throw InputError("relation needs one entry per ray");
  Vec s = zero_vec(fan_.dim);
  for (std::size_t j = 0; j < relation.size(); ++j) s = axpy(s, relation[j], fan_.ray(j));
  if (!is_zero(s)) throw InputError("vector is not a linear relation among the rays");
  Vec c(picard_number());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = relation[geo_->basis[k]];
  return ClassVector::curve(std::move(c));
}

Vec ToricPair::relation_of(const ClassVector& c) const {
  if (c.side != Side::curve || c.coords.size() != picard_number()) throw InputError("expected a curve class on this pair");
  return mat_vec(geo_->class_rows, c.coords);
}

const std::vector<WallCurve>& ToricPair::walls() const { return geo_->walls; }

std::optional<std::size_t> ToricPair::find_wall(const Cone& wall) const {
  auto it = geo_->wall_index.find(sorted(wall));
  if (it == geo_->wall_index.end()) return std::nullopt;
  return it->second;
}

const MoriCones& ToricPair::cones() const {
  std::call_once(geo_->cones_once, [this] {
    const std::size_t rho = picard_number();
    std::vector<Vec> curve_gens;
    for (const auto& w : geo_->walls) curve_gens.push_back(w.curve_class);
    auto curves = QCone::from_generators(rho, curve_gens);
    auto eff = QCone::from_generators(rho, geo_->class_rows);
    MoriCones mc{curves, eff, curves.dual(), eff.dual()};
    if (!mc.curves.contains(mc.nef_curves)) throw InvariantViolation("NM_1 is not contained in NE_1");
    if (!mc.effective.contains(mc.nef)) throw InvariantViolation("NM^1 is not contained in NE^1");
    geo_->cones = std::move(mc);
  });
  return *geo_->cones;
}

ToricDivisor ToricPair::canonical_divisor() const { return ToricDivisor(fan_.rays.size(), Q(-1)); }

ToricDivisor ToricPair::log_canonical_divisor() const {
  ToricDivisor k = canonical_divisor();
  for (std::size_t j = 0; j < k.size(); ++j) k[j] += delta_[j];
  return k;
}

CanonicalClasses canonical_and_boundary(const ToricPair& pair) {
  return {pair.class_of(pair.canonical_divisor()), pair.class_of(pair.delta()), pair.class_of(pair.log_canonical_divisor())};
}

const MoriCones& mori_and_effective_cones(const ToricPair& pair) { return pair.cones(); }

// ---------------------------------------------------------------------------
// Discrepancies

namespace {

Vec log_discrepancy_values(const ToricPair& pair) {
  Vec a(pair.delta().size());
  for (std::size_t j = 0; j < a.size(); ++j) a[j] = 1 - pair.delta()[j];
  return a;
}

bool is_primitive_integral(const Vec& p) {
  mpz_class g = 0;
  for (const auto& x : p) {
    if (x.get_den() != 1) return false;
    mpz_class n = abs(x.get_num());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), n.get_mpz_t());
  }
  return g == 1;
}

// Fractional coordinates of the lattice points in the half-open
// parallelepiped of a simplicial cone (a group of order |det|).
std::vector<Vec> box_points(const Fan& fan, const Cone& cone) {
  auto inv = inverse(cone_columns(fan, cone));
  const std::size_t d = fan.dim;
  auto frac = [](Vec v) {
    for (auto& x : v) {
      mpz_class f;
      mpz_fdiv_q(f.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
      x -= f;
    }
    return v;
  };
  std::vector<Vec> gens;
  for (std::size_t i = 0; i < d; ++i) {
    Vec col(d);
    for (std::size_t k = 0; k < d; ++k) col[k] = (*inv)[k][i];
    gens.push_back(frac(col));
  }
  std::set<Vec, decltype(&lex_less)> seen(&lex_less);
  std::vector<Vec> queue{zero_vec(d)};
  seen.insert(queue[0]);
  for (std::size_t q = 0; q < queue.size(); ++q) {
    for (const auto& g : gens) {
      Vec nxt = frac(add(queue[q], g));
      if (seen.insert(nxt).second) queue.push_back(nxt);
    }
  }
  return queue;
}

}  // namespace

Q discrepancy(const ToricPair& pair, const IVec& v) {
  if (v.size() != pair.dim()) throw InputError("vector has the wrong dimension for this fan");
  if (std::all_of(v.begin(), v.end(), [](long long x) { return x == 0; })) throw InputError("discrepancy of the zero vector");
  Vec a = log_discrepancy_values(pair);
  return piecewise_linear_value(pair.fan(), a, to_vec(v)) - 1;
}

bool klt_check(const ToricPair& pair) {
  for (const auto& c : pair.delta())
    if (sgn(c) < 0 || c >= 1) return false;
  // A is positive on every ray, hence on every nonzero vector of the support.
  Vec a = log_discrepancy_values(pair);
  return std::all_of(a.begin(), a.end(), [](const Q& x) { return sgn(x) > 0; });
}

bool is_terminal(const ToricPair& pair, const TerminalityConfig& cfg) {
  const Fan& fan = pair.fan();
  const Vec a = log_discrepancy_values(pair);
  const std::size_t d = fan.dim;
  for (const auto& cone : fan.cones) {
    Matrix cols = cone_columns(fan, cone);
    for (const auto& lambda : box_points(fan, cone)) {
      std::vector<long long> m(d, 0);
      for (;;) {
        Vec mu = lambda;
        for (std::size_t k = 0; k < d; ++k) mu[k] += Q(static_cast<long>(m[k]));
        Vec p = mat_vec(cols, mu);
        std::size_t support = 0;
        for (const auto& x : mu) support += sgn(x) != 0;
        if (support >= 2 && is_primitive_integral(p)) {
          Q log_disc = 0;
          for (std::size_t k = 0; k < d; ++k) log_disc += mu[k] * a[cone[k]];
          if (log_disc <= 1) return false;
        }
        std::size_t k = 0;
        while (k < d && ++m[k] >= cfg.height) m[k++] = 0;
        if (k == d) break;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Contractions and flips

std::string to_string(ContractionKind k) {
  switch (k) {
    case ContractionKind::fiber: return "fiber";
    case ContractionKind::divisorial: return "divisorial";
    case ContractionKind::small: return "small";
  }
  return "?";
}

PushforwardMap toric_pushforward(const ToricPair& source, const ToricPair& target) {
  const Fan& fs = source.fan();
  const Fan& ft = target.fan();
  const std::size_t rs = source.picard_number(), rt = target.picard_number();
  std::vector<std::size_t> t_to_s;
  for (const auto& r : ft.rays) {
    auto s = fs.find_ray(r);
    if (!s) throw InputError("target has a ray the source lacks; the inverse map would contract a divisor");
    t_to_s.push_back(*s);
  }
  PushforwardMap phi;
  phi.source = source.lattice();
  phi.target = target.lattice();
  phi.matrix.assign(rt, zero_vec(rs));
  for (std::size_t k = 0; k < rs; ++k) {
    auto t = ft.find_ray(fs.rays[source.basis_rays()[k]]);
    if (!t) continue;  // contracted divisor
    Vec col = target.divisor_class(*t).coords;
    for (std::size_t i = 0; i < rt; ++i) phi.matrix[i][k] = col[i];
  }
  if (fs.rays.size() == ft.rays.size()) {
    auto inv = inverse(phi.matrix);
    if (!inv) throw InvariantViolation("pushforward between pairs with the same rays is not invertible");
    phi.section = *inv;
  } else {
    phi.section.assign(rs, zero_vec(rt));
    for (std::size_t k = 0; k < rt; ++k) {
      Vec values = zero_vec(ft.rays.size());
      values[target.basis_rays()[k]] = 1;
      ToricDivisor pulled(fs.rays.size(), Q(0));
      for (std::size_t s = 0; s < fs.rays.size(); ++s) pulled[s] = piecewise_linear_value(ft, values, fs.ray(s));
      Vec col = source.class_of(pulled).coords;
      for (std::size_t i = 0; i < rs; ++i) phi.section[i][k] = col[i];
    }
  }
  phi.validate();
  return phi;
}

ContractionResult classify_and_contract(const ToricPair& pair, const Vec& ray) {
  if (ray.size() != pair.picard_number()) throw InputError("ray does not live in N_1 of this pair");
  const auto& mc = pair.cones();
  Vec r = primitive(ray);
  const auto ext = mc.curves.extremal_rays();
  if (std::none_of(ext.begin(), ext.end(), [&](const Vec& e) { return same_ray(e, r); }))
    throw InputError("class " + to_string(r) + " does not span an extremal ray of NE_1");
  const Vec kd = pair.class_of(pair.log_canonical_divisor()).coords;
  if (sgn(dot(kd, r)) >= 0) throw InputError("extremal ray " + to_string(r) + " is not (K+Delta)-negative");

  ContractionResult res;
  res.ray = r;
  for (std::size_t w = 0; w < pair.walls().size(); ++w)
    if (same_ray(pair.walls()[w].curve_class, r)) res.walls.push_back(w);
  if (res.walls.empty()) throw InvariantViolation("extremal ray of NE_1 contains no wall curve");
  res.relation = pair.walls()[res.walls.front()].relation;
  for (std::size_t j = 0; j < res.relation.size(); ++j) {
    if (sgn(res.relation[j]) > 0) res.circuit.positive.push_back(j);
    if (sgn(res.relation[j]) < 0) res.circuit.negative.push_back(j);
  }
  Cone circuit = res.circuit.positive;
  circuit.insert(circuit.end(), res.circuit.negative.begin(), res.circuit.negative.end());
  std::sort(circuit.begin(), circuit.end());
  std::set<Cone> links;
  for (auto w : res.walls) {
    Cone link;
    for (auto x : pair.walls()[w].wall)
      if (!std::binary_search(circuit.begin(), circuit.end(), x)) link.push_back(x);
    links.insert(link);
  }
  res.circuit.links.assign(links.begin(), links.end());

  const Fan& fan = pair.fan();
  Matrix pos_rays;
  for (auto j : res.circuit.positive) pos_rays.push_back(fan.ray(j));

  switch (res.circuit.negative.size()) {
    case 0: {
      res.kind = ContractionKind::fiber;
      res.target_dim = fan.dim - rank(pos_rays, fan.dim);
      return res;
    }
    case 1: {
      res.kind = ContractionKind::divisorial;
      res.target_dim = fan.dim;
      const std::size_t e = res.circuit.negative.front();
      res.contracted_ray = e;
      const Cone merged = without(circuit, e);
      std::set<Cone> cones;
      for (const auto& c : fan.cones) {
        if (!std::binary_search(c.begin(), c.end(), e)) {
          cones.insert(c);
          continue;
        }
        Cone inter, link;
        for (auto x : c) (std::binary_search(circuit.begin(), circuit.end(), x) ? inter : link).push_back(x);
        if (inter.size() + 1 != circuit.size())
          throw InvariantViolation("cone through the exceptional ray does not meet the circuit in a facet");
        Cone nc = merged;
        nc.insert(nc.end(), link.begin(), link.end());
        cones.insert(sorted(nc));
      }
      Fan tf;
      tf.dim = fan.dim;
      std::vector<std::size_t> remap(fan.rays.size());
      for (std::size_t j = 0; j < fan.rays.size(); ++j) {
        if (j == e) continue;
        remap[j] = tf.rays.size();
        tf.rays.push_back(fan.rays[j]);
        tf.labels.push_back(fan.labels[j]);
      }
      for (const auto& c : cones) {
        Cone nc;
        for (auto x : c) nc.push_back(remap[x]);
        tf.cones.push_back(nc);
      }
      std::vector<Q> delta;
      for (std::size_t j = 0; j < fan.rays.size(); ++j)
        if (j != e) delta.push_back(pair.delta()[j]);
      ToricPair target(std::move(tf), std::move(delta));
      if (target.picard_number() + 1 != pair.picard_number())
        throw InvariantViolation("divisorial contraction did not drop the Picard number by one");
      res.pushforward = toric_pushforward(pair, target);
      res.target = std::move(target);
      return res;
    }
    default: {
      res.kind = ContractionKind::small;
      res.target_dim = fan.dim;
      return res;
    }
  }
}

Fan retriangulate(const Fan& fan, const Circuit& circuit) {
  Cone all = circuit.positive;
  all.insert(all.end(), circuit.negative.begin(), circuit.negative.end());
  std::sort(all.begin(), all.end());
  std::set<Cone> cones(fan.cones.begin(), fan.cones.end());
  for (const auto& link : circuit.links) {
    for (auto k : circuit.positive) {
      Cone c = without(all, k);
      c.insert(c.end(), link.begin(), link.end());
      if (cones.erase(sorted(c)) != 1) throw InvariantViolation("circuit cone missing from the fan");
    }
    for (auto k : circuit.negative) {
      Cone c = without(all, k);
      c.insert(c.end(), link.begin(), link.end());
      if (!cones.insert(sorted(c)).second) throw InvariantViolation("flipped cone already present in the fan");
    }
  }
  Fan out = fan;
  out.cones.assign(cones.begin(), cones.end());
  out.normalize();
  out.validate();
  return out;
}

FlipResult flip(const ToricPair& pair, const Circuit& circuit) {
  if (circuit.negative.size() < 2) throw InputError("flip needs a small contraction (two or more negative rays)");
  ToricPair plus(retriangulate(pair.fan(), circuit), pair.delta());
  if (plus.picard_number() != pair.picard_number()) throw InvariantViolation("flip changed the Picard number");
  FlipResult res{plus, toric_pushforward(pair, plus), {}};
  std::set<Cone> old_cones(pair.fan().cones.begin(), pair.fan().cones.end());
  const Vec kd = plus.class_of(plus.log_canonical_divisor()).coords;
  for (std::size_t w = 0; w < plus.walls().size(); ++w) {
    const auto& wc = plus.walls()[w];
    if (pair.find_wall(wc.wall)) continue;
    Cone a = wc.wall, b = wc.wall;
    a.push_back(wc.left);
    b.push_back(wc.right);
    if (old_cones.count(sorted(a)) || old_cones.count(sorted(b))) continue;
    if (sgn(dot(kd, wc.curve_class)) <= 0)
      throw InvariantViolation("flipped curve is not (K+Delta)-positive: " + to_string(wc.curve_class));
    res.flipped_walls.push_back(w);
  }
  if (res.flipped_walls.empty()) throw InvariantViolation("flip produced no flipped curves");
  return res;
}

// ---------------------------------------------------------------------------
// Common refinement

namespace {

std::vector<Cone> pulling_triangulation(const std::vector<Vec>& rays, const Cone& ids, std::size_t k) {
  if (ids.size() == k) return {ids};
  const std::size_t v = ids.front();
  std::vector<Vec> gens;
  for (auto i : ids) gens.push_back(rays[i]);
  auto cell = QCone::from_generators(rays[v].size(), gens);
  std::vector<Cone> out;
  for (const auto& f : cell.facets()) {
    if (sgn(dot(f, rays[v])) == 0) continue;
    Cone face;
    for (auto i : ids)
      if (sgn(dot(f, rays[i])) == 0) face.push_back(i);
    for (auto& s : pulling_triangulation(rays, face, k - 1)) {
      s.push_back(v);
      out.push_back(sorted(s));
    }
  }
  return out;
}

}  // namespace

Refinement common_refinement(const Fan& a, const Fan& b) {
  if (a.dim != b.dim) throw InputError("common refinement of fans in different lattices");
  const std::size_t d = a.dim;
  std::vector<std::vector<Vec>> cells;
  std::vector<Vec> all;
  for (const auto& ca : a.cones) {
    std::vector<Vec> ga;
    for (auto i : ca) ga.push_back(a.ray(i));
    auto qa = QCone::from_generators(d, ga);
    for (const auto& cb : b.cones) {
      std::vector<Vec> gb;
      for (auto i : cb) gb.push_back(b.ray(i));
      auto cell = qa.intersect(QCone::from_generators(d, gb));
      if (cell.cone_dimension() != d) continue;
      cells.push_back(cell.extremal_rays());
      all.insert(all.end(), cells.back().begin(), cells.back().end());
    }
  }
  sort_unique(all);
  auto index_of = [&](const Vec& r) {
    return static_cast<std::size_t>(std::lower_bound(all.begin(), all.end(), r, lex_less) - all.begin());
  };
  std::set<Cone> cones;
  for (const auto& cell : cells) {
    Cone ids;
    for (const auto& r : cell) ids.push_back(index_of(r));
    std::sort(ids.begin(), ids.end());
    for (auto& c : pulling_triangulation(all, ids, d)) cones.insert(c);
  }
  Refinement ref;
  ref.fan.dim = d;
  for (std::size_t i = 0; i < all.size(); ++i) {
    IVec r = to_ivec(all[i]);
    ref.fan.rays.push_back(r);
    ref.in_a.push_back(a.find_ray(r));
    ref.in_b.push_back(b.find_ray(r));
    if (ref.in_a.back()) ref.fan.labels.push_back(a.labels[*ref.in_a.back()]);
    else if (ref.in_b.back()) ref.fan.labels.push_back(b.labels[*ref.in_b.back()]);
    else ref.fan.labels.push_back("W" + std::to_string(i));
  }
  ref.fan.cones.assign(cones.begin(), cones.end());
  ref.fan.normalize();
  // Labels may collide when a and b label the same ray differently.
  std::set<std::string> used;
  for (std::size_t i = 0; i < ref.fan.labels.size(); ++i)
    if (!used.insert(ref.fan.labels[i]).second) ref.fan.labels[i] += "_" + std::to_string(i);
  ref.fan.validate();
  return ref;
}

// ---------------------------------------------------------------------------
// JSON

Fan fan_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("fan: expected a JSON object");
  for (const char* key : {"dim", "rays", "max_cones"})
    if (!j.contains(key)) throw InputError(std::string("fan: missing field '") + key + "'");
  Fan fan;
  try {
    fan.dim = j.at("dim").get<std::size_t>();
    fan.rays = j.at("rays").get<std::vector<IVec>>();
    fan.cones = j.at("max_cones").get<std::vector<Cone>>();
    if (j.contains("labels")) fan.labels = j.at("labels").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("fan: ") + e.what());
  }
  if (!fan.labels.empty() && fan.labels.size() != fan.rays.size())
    throw InputError("fan: field 'labels' must have one entry per ray");
  for (auto& c : fan.cones) std::sort(c.begin(), c.end());
  fan.normalize();
  return fan;
}

ToricPair pair_from_json(const nlohmann::json& j) {
  Fan fan = fan_from_json(j);
  std::vector<Q> delta(fan.rays.size(), Q(0));
  if (j.contains("delta")) {
    const auto& dj = j.at("delta");
    if (!dj.is_object()) throw InputError("fan: field 'delta' must map ray indices or labels to coefficients");
    for (const auto& [key, val] : dj.items()) {
      std::size_t idx = 0;
      auto label = std::find(fan.labels.begin(), fan.labels.end(), key);
      if (label != fan.labels.end()) {
        delta[static_cast<std::size_t>(label - fan.labels.begin())] = io::rational_from_json(val, "delta." + key);
        continue;
      }
      try {
        std::size_t used = 0;
        idx = std::stoul(key, &used);
        if (used != key.size()) throw std::invalid_argument(key);
      } catch (const std::exception&) {
        throw InputError("fan: delta key '" + key + "' is neither a ray index nor a label");
      }
      if (idx >= delta.size()) throw InputError("fan: delta key '" + key + "' is out of range");
      delta[idx] = io::rational_from_json(val, "delta." + key);
    }
  }
  return ToricPair(std::move(fan), std::move(delta));
}

nlohmann::json fan_to_json(const Fan& fan) {
  return {{"dim", fan.dim}, {"rays", fan.rays}, {"max_cones", fan.cones}, {"labels", fan.labels}};
}

nlohmann::json pair_to_json(const ToricPair& pair) {
  auto j = fan_to_json(pair.fan());
  auto delta = nlohmann::json::object();
  for (std::size_t i = 0; i < pair.delta().size(); ++i)
    if (sgn(pair.delta()[i]) != 0) delta[std::to_string(i)] = to_string(pair.delta()[i]);
  j["delta"] = delta;
  return j;
}

ToricPair load_pair(const std::string& path) { return pair_from_json(io::parse_json(io::read_file(path), path)); }

ToricDivisor parse_toric_divisor(const ToricPair& pair, const std::string& text) {
  ToricDivisor d(pair.fan().rays.size(), Q(0));
  for (const auto& [label, coef] : io::parse_divisor_expression(text)) {
    auto idx = pair.fan().find_label(label);
    if (!idx) {
      std::string known;
      for (const auto& l : pair.fan().labels) known += (known.empty() ? "" : ", ") + l;
      throw InputError("unknown divisor label '" + label + "' (known: " + known + ")");
    }
    d[*idx] += coef;
  }
  return d;
}

}  // namespace mori
