#include "mori/qcone.hpp"

#include "mori/linalg.hpp"
#include "mori/lp.hpp"

#include <algorithm>
#include <cstdint>
#include <mutex>

namespace mori {

namespace {

class Bits {
 public:
  explicit Bits(std::size_t n = 0) : w_((n + 63) / 64, 0) {}
  void set(std::size_t i) {
    if (i / 64 >= w_.size()) w_.resize(i / 64 + 1, 0);
    w_[i / 64] |= std::uint64_t{1} << (i % 64);
  }
  bool subset_of(const Bits& o) const {
    for (std::size_t i = 0; i < w_.size(); ++i) {
      std::uint64_t ow = i < o.w_.size() ? o.w_[i] : 0;
      if (w_[i] & ~ow) return false;
    }
    return true;
  }
  Bits operator&(const Bits& o) const {
    Bits r;
    r.w_.resize(std::min(w_.size(), o.w_.size()));
    for (std::size_t i = 0; i < r.w_.size(); ++i) r.w_[i] = w_[i] & o.w_[i];
    return r;
  }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto x : w_) c += static_cast<std::size_t>(__builtin_popcountll(x));
    return c;
  }

 private:
  std::vector<std::uint64_t> w_;
};

void check_dims(std::size_t dim, const std::vector<Vec>& vs, const char* what) {
  for (const auto& v : vs)
    if (v.size() != dim)
      throw InputError(std::string("dimension mismatch: ") + what + " of length " + std::to_string(v.size()) +
                       " in ambient dimension " + std::to_string(dim));
}

// Removes the lineality component of r (projection along span(lin) onto its
// orthogonal complement) so that rays compare structurally.
Vec reduce_mod_lineality(const Vec& r, const std::vector<Vec>& lin) {
  if (lin.empty()) return r;
  const std::size_t k = lin.size();
  Matrix gram(k, Vec(k));
  Vec rhs(k);
  for (std::size_t i = 0; i < k; ++i) {
    rhs[i] = dot(lin[i], r);
    for (std::size_t j = 0; j < k; ++j) gram[i][j] = dot(lin[i], lin[j]);
  }
  auto coef = solve_square(gram, rhs);
  Vec out = r;
  for (std::size_t i = 0; i < k; ++i) out = axpy(out, -(*coef)[i], lin[i]);
  return out;
}

}  // namespace

DDResult double_description(std::size_t dim, const std::vector<Vec>& ineqs) {
  check_dims(dim, ineqs, "inequality");
  std::vector<Vec> lin;
  for (std::size_t i = 0; i < dim; ++i) lin.push_back(unit_vec(dim, i));
  std::vector<Vec> rays;
  std::vector<Bits> zeros;

  for (std::size_t k = 0; k < ineqs.size(); ++k) {
    const Vec& a = ineqs[k];
    if (mori::is_zero(a)) continue;

    std::optional<std::size_t> piv;
    for (std::size_t i = 0; i < lin.size() && !piv; ++i)
      if (sgn(dot(a, lin[i])) != 0) piv = i;

    if (piv) {
      const Vec l = lin[*piv];
      const Q al = dot(a, l);
      std::vector<Vec> next_lin;
      for (std::size_t i = 0; i < lin.size(); ++i) {
        if (i == *piv) continue;
        next_lin.push_back(primitive(axpy(lin[i], -dot(a, lin[i]) / al, l)));
      }
      for (std::size_t i = 0; i < rays.size(); ++i) {
        rays[i] = primitive(axpy(rays[i], -dot(a, rays[i]) / al, l));
        zeros[i].set(k);
      }
      Bits z(k);
      for (std::size_t j = 0; j < k; ++j) z.set(j);
      rays.push_back(primitive(sgn(al) > 0 ? l : negate(l)));
      zeros.push_back(z);
      lin = std::move(next_lin);
      continue;
    }

    std::vector<Q> val(rays.size());
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < rays.size(); ++i) {
      val[i] = dot(a, rays[i]);
      if (sgn(val[i]) > 0) pos.push_back(i);
      else if (sgn(val[i]) < 0) neg.push_back(i);
    }
    if (neg.empty()) {
      for (std::size_t i = 0; i < rays.size(); ++i)
        if (sgn(val[i]) == 0) zeros[i].set(k);
      continue;
    }

    std::vector<Vec> next_rays;
    std::vector<Bits> next_zeros;
    for (std::size_t i = 0; i < rays.size(); ++i) {
      if (sgn(val[i]) < 0) continue;
      next_rays.push_back(rays[i]);
      Bits z = zeros[i];
      if (sgn(val[i]) == 0) z.set(k);
      next_zeros.push_back(std::move(z));
    }
    // Two rays are adjacent iff no third ray is tight on every inequality
    // that both are tight on.
    const std::size_t min_common = dim >= lin.size() + 2 ? dim - lin.size() - 2 : 0;
    for (auto p : pos) {
      for (auto n : neg) {
        Bits common = zeros[p] & zeros[n];
        if (common.count() < min_common) continue;
        bool adjacent = true;
        for (std::size_t r = 0; r < rays.size() && adjacent; ++r) {
          if (r == p || r == n) continue;
          if (common.subset_of(zeros[r])) adjacent = false;
        }
        if (!adjacent) continue;
        Vec nr = axpy(scale(rays[n], val[p]), -val[n], rays[p]);
        next_rays.push_back(primitive(nr));
        common.set(k);
        next_zeros.push_back(std::move(common));
      }
    }
    rays = std::move(next_rays);
    zeros = std::move(next_zeros);
  }

  DDResult out;
  out.lineality = row_space_basis(lin, dim);
  for (const auto& r : rays) out.rays.push_back(primitive(reduce_mod_lineality(r, out.lineality)));
  sort_unique(out.rays);
  return out;
}

struct QCone::State {
  std::size_t dim = 0;
  bool from_v = true;
  std::vector<Vec> in_a;  // rays or inequalities
  std::vector<Vec> in_b;  // lineality or equations

  std::once_flag v_once, h_once;
  std::vector<Vec> rays, lin, facets, eqs;

  void compute_h() {
    std::call_once(h_once, [this] {
      if (from_v) {
        std::vector<Vec> ineqs = in_a;
        for (const auto& l : in_b) {
          ineqs.push_back(l);
          ineqs.push_back(negate(l));
        }
        auto dd = double_description(dim, ineqs);
        facets = std::move(dd.rays);
        eqs = std::move(dd.lineality);
      } else {
        compute_v();
        std::vector<Vec> ineqs = rays;
        for (const auto& l : lin) {
          ineqs.push_back(l);
          ineqs.push_back(negate(l));
        }
        auto dd = double_description(dim, ineqs);
        facets = std::move(dd.rays);
        eqs = std::move(dd.lineality);
      }
    });
  }

  void compute_v() {
    std::call_once(v_once, [this] {
      if (!from_v) {
        std::vector<Vec> ineqs = in_a;
        for (const auto& e : in_b) {
          ineqs.push_back(e);
          ineqs.push_back(negate(e));
        }
        auto dd = double_description(dim, ineqs);
        rays = std::move(dd.rays);
        lin = std::move(dd.lineality);
        return;
      }
      // Filter the given generators: a generator is extreme iff its tight
      // facets together with the equations have rank dim - lineality - 1.
      compute_h();
      Matrix all = facets;
      all.insert(all.end(), eqs.begin(), eqs.end());
      lin = row_space_basis(kernel(all, dim), dim);
      const std::size_t want = dim - lin.size() - 1;
      std::vector<Vec> out;
      for (const auto& g : in_a) {
        Vec r = primitive(reduce_mod_lineality(g, lin));
        if (mori::is_zero(r)) continue;
        Matrix tight = eqs;
        for (const auto& f : facets)
          if (sgn(dot(f, r)) == 0) tight.push_back(f);
        if (rank(tight, dim) == want) out.push_back(std::move(r));
      }
      sort_unique(out);
      rays = std::move(out);
    });
  }
};

QCone QCone::from_generators(std::size_t dim, std::vector<Vec> rays, std::vector<Vec> lineality) {
  if (dim == 0) throw InputError("cone ambient dimension must be positive");
  check_dims(dim, rays, "generator");
  check_dims(dim, lineality, "lineality vector");
  auto s = std::make_shared<State>();
  s->dim = dim;
  s->from_v = true;
  for (auto& r : rays)
    if (!mori::is_zero(r)) s->in_a.push_back(primitive(r));
  for (auto& l : lineality)
    if (!mori::is_zero(l)) s->in_b.push_back(primitive_signed(l));
  return QCone(std::move(s));
}

QCone QCone::from_inequalities(std::size_t dim, std::vector<Vec> ineqs, std::vector<Vec> equations) {
  if (dim == 0) throw InputError("cone ambient dimension must be positive");
  check_dims(dim, ineqs, "inequality");
  check_dims(dim, equations, "equation");
  auto s = std::make_shared<State>();
  s->dim = dim;
  s->from_v = false;
  for (auto& a : ineqs)
    if (!mori::is_zero(a)) s->in_a.push_back(primitive(a));
  for (auto& e : equations)
    if (!mori::is_zero(e)) s->in_b.push_back(primitive_signed(e));
  return QCone(std::move(s));
}

QCone QCone::zero(std::size_t dim) { return from_generators(dim, {}); }

QCone QCone::full(std::size_t dim) { return from_inequalities(dim, {}); }

std::size_t QCone::dim() const { return state_->dim; }

const std::vector<Vec>& QCone::rays() const {
  state_->compute_v();
  return state_->rays;
}

const std::vector<Vec>& QCone::lineality() const {
  state_->compute_v();
  return state_->lin;
}

const std::vector<Vec>& QCone::facets() const {
  state_->compute_h();
  return state_->facets;
}

const std::vector<Vec>& QCone::equations() const {
  state_->compute_h();
  return state_->eqs;
}

std::vector<Vec> QCone::extremal_rays() const {
  if (!is_pointed())
    throw InputError("cone is not pointed; it contains the line spanned by " + to_string(lineality().front()));
  return rays();
}

std::optional<Vec> QCone::exposing_functional(const Vec& r) const {
  Vec d = zero_vec(dim());
  for (const auto& f : facets())
    if (sgn(dot(f, r)) == 0) d = add(d, f);
  if (sgn(dot(d, r)) != 0) return std::nullopt;
  for (const auto& g : rays()) {
    if (same_ray(g, r)) continue;
    if (sgn(dot(d, g)) <= 0) return std::nullopt;
  }
  return d;
}

std::vector<Vec> QCone::exposed_rays() const {
  std::vector<Vec> out;
  for (const auto& r : extremal_rays())
    if (exposing_functional(r)) out.push_back(r);
  return out;
}

QCone QCone::dual() const {
  if (state_->from_v) return from_inequalities(dim(), state_->in_a, state_->in_b);
  return from_inequalities(dim(), rays(), lineality());
}

QCone QCone::sum(const QCone& other) const {
  if (other.dim() != dim()) throw InputError("dimension mismatch in cone sum");
  std::vector<Vec> r = rays();
  r.insert(r.end(), other.rays().begin(), other.rays().end());
  std::vector<Vec> l = lineality();
  l.insert(l.end(), other.lineality().begin(), other.lineality().end());
  return from_generators(dim(), std::move(r), std::move(l));
}

QCone QCone::intersect(const QCone& other) const {
  if (other.dim() != dim()) throw InputError("dimension mismatch in cone intersection");
  std::vector<Vec> f = facets();
  f.insert(f.end(), other.facets().begin(), other.facets().end());
  std::vector<Vec> e = equations();
  e.insert(e.end(), other.equations().begin(), other.equations().end());
  return from_inequalities(dim(), std::move(f), std::move(e));
}

QCone QCone::restrict_halfspace(const Vec& d) const {
  if (d.size() != dim()) throw InputError("dimension mismatch in halfspace restriction");
  std::vector<Vec> f = facets();
  f.push_back(d);
  return from_inequalities(dim(), std::move(f), equations());
}

bool QCone::contains(const Vec& z) const {
  if (z.size() != dim()) throw InputError("dimension mismatch in membership test");
  for (const auto& e : equations())
    if (sgn(dot(e, z)) != 0) return false;
  for (const auto& f : facets())
    if (sgn(dot(f, z)) < 0) return false;
  return true;
}

bool QCone::interior_contains(const Vec& z) const {
  if (z.size() != dim()) throw InputError("dimension mismatch in interior test");
  if (!is_full_dimensional()) return false;
  for (const auto& f : facets())
    if (sgn(dot(f, z)) <= 0) return false;
  return true;
}

std::optional<Vec> QCone::membership_certificate(const Vec& z) const {
  if (!contains(z)) return std::nullopt;
  std::vector<Vec> gens = rays();
  for (const auto& l : lineality()) gens.push_back(l);
  for (const auto& l : lineality()) gens.push_back(negate(l));
  auto lambda = lp::nonnegative_combination(gens, z);
  if (!lambda) throw InvariantViolation("membership: H-representation accepts a point the generators miss");
  const std::size_t nr = rays().size(), nl = lineality().size();
  Vec out(lambda->begin(), lambda->begin() + static_cast<std::ptrdiff_t>(nr));
  for (std::size_t i = 0; i < nl; ++i) out.push_back((*lambda)[nr + i] - (*lambda)[nr + nl + i]);
  return out;
}

bool QCone::contains(const QCone& other) const {
  if (other.dim() != dim()) throw InputError("dimension mismatch in cone containment");
  for (const auto& r : other.rays())
    if (!contains(r)) return false;
  for (const auto& l : other.lineality())
    if (!contains(l) || !contains(negate(l))) return false;
  return true;
}

EqualityCertificate certify_equal(const QCone& a, const QCone& b) {
  if (a.dim() != b.dim()) throw InputError("dimension mismatch in cone equality");
  EqualityCertificate cert;
  auto collect = [&](const QCone& from, const QCone& into, std::vector<Vec>& out, bool from_is_a) {
    std::vector<Vec> gens = from.rays();
    for (const auto& l : from.lineality()) {
      gens.push_back(l);
      gens.push_back(negate(l));
    }
    for (const auto& g : gens) {
      auto c = into.membership_certificate(g);
      if (!c) {
        cert.witness = g;
        cert.witness_in_a = from_is_a;
        return false;
      }
      out.push_back(std::move(*c));
    }
    return true;
  };
  cert.equal = collect(a, b, cert.a_in_b, true) && collect(b, a, cert.b_in_a, false);
  return cert;
}

bool operator==(const QCone& a, const QCone& b) { return certify_equal(a, b).equal; }

}  // namespace mori
