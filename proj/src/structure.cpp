#include "mori/structure.hpp"

#include "mori/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace mori {

namespace {

Vec log_canonical_class(const ToricPair& p) { return p.class_of(p.log_canonical_divisor()).coords; }

QCone sigma_cone(std::size_t dim, const SigmaResult& s) {
  std::vector<Vec> gens;
  for (const auto& r : s.rays) gens.push_back(r.ray);
  return QCone::from_generators(dim, gens);
}

}  // namespace

StructureReport verify_theorem1(const ToricPair& pair, const SigmaConfig& cfg) {
  StructureReport rep;
  rep.check = "theorem1";
  const auto& mc = pair.cones();
  const Vec kd = log_canonical_class(pair);
  const QCone half = mc.curves.restrict_halfspace(kd);
  rep.lhs = half.sum(mc.nef_curves);
  if (mc.effective.contains(kd)) {
    rep.short_circuit = true;
    rep.note = "K+Delta is pseudo-effective; the statement holds trivially";
    rep.rhs = rep.lhs;
    rep.equal = true;
    rep.certificate = certify_equal(rep.lhs, rep.lhs);
    return rep;
  }
  rep.sigma = enumerate_sigma(pair, cfg);
  rep.rhs = half.sum(sigma_cone(pair.picard_number(), rep.sigma));
  rep.certificate = certify_equal(rep.lhs, *rep.rhs);
  rep.equal = rep.certificate.equal && rep.sigma.failures.empty();
  if (!rep.sigma.failures.empty()) rep.note = "trace invariant failures: " + rep.sigma.failures.front();
  return rep;
}

StructureReport verify_theorem1(const AbstractModel& model) {
  StructureReport rep;
  rep.check = "theorem1";
  rep.applicable = false;
  rep.note = "abstract lattice: no MMP available, left-hand side only";
  const Vec kd = model.functional(ClassVector::divisor(add(model.canonical.coords, model.boundary.coords)));
  rep.lhs = model.curves().restrict_halfspace(kd).sum(model.nef_curves());
  return rep;
}

bool is_log_fano(const ToricPair& pair) { return pair.cones().nef.interior_contains(negate(log_canonical_class(pair))); }

StructureReport verify_corollary2(const ToricPair& pair, const SigmaConfig& cfg) {
  StructureReport rep;
  rep.check = "corollary2";
  const auto& mc = pair.cones();
  rep.lhs = mc.nef_curves;
  if (!is_log_fano(pair)) {
    rep.applicable = false;
    rep.note = "-(K+Delta) is not ample";
    return rep;
  }
  rep.sigma = enumerate_sigma(pair, cfg);
  rep.rhs = sigma_cone(pair.picard_number(), rep.sigma);
  rep.certificate = certify_equal(rep.lhs, *rep.rhs);
  rep.equal = rep.certificate.equal && rep.sigma.failures.empty();
  rep.note = "NM_1 is rational polyhedral with " + std::to_string(mc.nef_curves.rays().size()) + " extremal rays";
  return rep;
}

CoverageReport verify_exposed_coverage(const ToricPair& pair, const SigmaResult& sigma) {
  CoverageReport rep;
  const auto& mc = pair.cones();
  const Vec kd = log_canonical_class(pair);
  if (mc.effective.contains(kd)) {
    rep.short_circuit = true;
    return rep;
  }
  const QCone lhs = mc.curves.restrict_halfspace(kd).sum(mc.nef_curves);
  for (const auto& r : lhs.exposed_rays()) {
    if (sgn(dot(kd, r)) >= 0) continue;
    ExposedRayMatch m{r, mc.nef_curves.contains(r), std::nullopt};
    for (std::size_t i = 0; i < sigma.rays.size(); ++i)
      if (same_ray(sigma.rays[i].ray, r)) m.sigma_index = i;
    rep.pass = rep.pass && m.in_nef_curves && m.sigma_index.has_value();
    rep.rays.push_back(std::move(m));
  }
  return rep;
}

CoverageReport verify_exposed_coverage(const ToricPair& pair, const SigmaConfig& cfg) {
  if (pair.cones().effective.contains(log_canonical_class(pair))) return verify_exposed_coverage(pair, SigmaResult{});
  return verify_exposed_coverage(pair, enumerate_sigma(pair, cfg));
}

// ---------------------------------------------------------------------------

FinitenessReport verify_finiteness(const ToricPair& pair, const ClassVector& a, const Q& n, const SigmaConfig& cfg) {
  if (pair.dim() != 3) throw InputError("finiteness check needs a threefold");
  if (std::any_of(pair.delta().begin(), pair.delta().end(), [](const Q& c) { return sgn(c) != 0; }))
    throw InputError("finiteness check needs Delta = 0");
  if (!is_terminal(pair)) throw InputError("finiteness check needs a terminal threefold");
  if (a.side != Side::divisor || a.coords.size() != pair.picard_number()) throw InputError("A must be a divisor class on this pair");
  const auto& mc = pair.cones();
  if (!mc.nef.interior_contains(a.coords)) throw InputError("A is not ample");
  if (sgn(n) <= 0) throw InputError("bound N must be positive");

  FinitenessReport rep;
  const Vec k = log_canonical_class(pair);
  const Vec ka = add(k, a.coords);
  auto fail = [&](std::string why) {
    rep.pass = false;
    rep.failures.push_back(std::move(why));
  };

  if (!mc.effective.contains(k)) {
    for (const auto& s : enumerate_sigma(pair, cfg).rays)
      if (sgn(dot(ka, s.ray)) < 0) rep.sigma_a.push_back(s.ray);
  }

  // Brute force over integral classes z in NE_1 with A.z < N, a bounded
  // region whose vertices are 0 and N/(A.r) r for the extremal rays r.
  const auto rays = mc.curves.extremal_rays();
  const std::size_t rho = pair.picard_number();
  std::vector<long long> lo(rho, 0), hi(rho, 0);
  for (const auto& r : rays) {
    Q ar = dot(a.coords, r);
    for (std::size_t i = 0; i < rho; ++i) {
      Q x = r[i] * n / ar;
      mpz_class f, c;
      mpz_fdiv_q(f.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
      mpz_cdiv_q(c.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
      lo[i] = std::min<long long>(lo[i], f.get_si());
      hi[i] = std::max<long long>(hi[i], c.get_si());
    }
  }
  const auto facets = mc.curves.facets();
  std::set<Vec, decltype(&lex_less)> cand_rays(&lex_less);
  std::vector<long long> z = lo;
  Vec zq(rho);
  for (;;) {
    for (std::size_t i = 0; i < rho; ++i) zq[i] = Q(static_cast<long>(z[i]));
    bool nonzero = std::any_of(z.begin(), z.end(), [](long long x) { return x != 0; });
    if (nonzero && std::all_of(facets.begin(), facets.end(), [&](const Vec& f) { return sgn(dot(f, zq)) >= 0; })) {
      Q mk = -dot(k, zq);
      if (sgn(mk) > 0 && mk <= n && sgn(dot(ka, zq)) < 0) {
        ++rep.candidates;
        Q az = dot(a.coords, zq);
        rep.max_a_degree = std::max(rep.max_a_degree, az);
        if (!(az < n)) fail("candidate " + to_string(zq) + " has A.C = " + to_string(az) + " >= N");
        cand_rays.insert(primitive(zq));
      }
    }
    std::size_t i = 0;
    while (i < rho && ++z[i] > hi[i]) {
      z[i] = lo[i];
      ++i;
    }
    if (i == rho) break;
  }
  rep.candidate_rays.assign(cand_rays.begin(), cand_rays.end());
  for (const auto& s : rep.sigma_a)
    if (!cand_rays.count(primitive(s))) fail("Sigma_A ray " + to_string(s) + " has no integral class among the candidates");
  return rep;
}

// ---------------------------------------------------------------------------

ClassVector default_ample(const ToricPair& pair) {
  Vec h = zero_vec(pair.picard_number());
  for (const auto& r : pair.cones().nef.extremal_rays()) h = add(h, r);
  return ClassVector::divisor(h);
}

ConeScanReport cone_theorem_scan(const ToricPair& pair, const ClassVector& a) {
  if (a.side != Side::divisor || a.coords.size() != pair.picard_number()) throw InputError("A must be a divisor class on this pair");
  const auto& mc = pair.cones();
  if (!mc.nef.interior_contains(a.coords)) throw InputError("A is not ample");
  ConeScanReport rep;
  const Vec kd = log_canonical_class(pair);
  const Vec kda = add(kd, a.coords);
  const Q bound = Q(static_cast<long>(2 * pair.dim()));
  std::vector<Vec> neg_gens;
  for (const auto& r : mc.curves.extremal_rays()) {
    if (sgn(dot(kd, r)) >= 0) continue;
    NegativeRay nr{r, {}, Q(0), Q(0), true};
    bool first = true;
    for (std::size_t w = 0; w < pair.walls().size(); ++w) {
      const auto& c = pair.walls()[w].curve_class;
      if (!same_ray(c, r)) continue;
      nr.walls.push_back(w);
      Q deg = -dot(kd, c);
      if (first || deg < nr.min_degree) nr.min_degree = deg;
      if (first || deg > nr.max_degree) nr.max_degree = deg;
      first = false;
      if (!(sgn(deg) > 0 && deg <= bound)) {
        nr.bound_ok = false;
        rep.pass = false;
        rep.failures.push_back("wall curve " + std::to_string(w) + " on ray " + to_string(r) + " has -(K+Delta).C = " + to_string(deg));
      }
    }
    if (nr.walls.empty()) {
      rep.pass = false;
      rep.failures.push_back("extremal ray " + to_string(r) + " contains no wall curve");
    }
    if (sgn(dot(kda, r)) < 0) {
      neg_gens.push_back(r);
      rep.negative.push_back(nr);
    }
    rep.all_negative.push_back(std::move(nr));
  }
  QCone rhs = mc.curves.restrict_halfspace(kda).sum(QCone::from_generators(pair.picard_number(), neg_gens));
  rep.decomposition = certify_equal(mc.curves, rhs);
  if (!rep.decomposition.equal) {
    rep.pass = false;
    rep.failures.push_back("NE_1 differs from its cone theorem decomposition");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Random fans

std::vector<std::string> seed_fan_names() {
  return {"p2", "p1xp1", "f1", "f2", "f3", "p3", "p1xp1xp1", "p1112", "p2xp1"};
}

Fan seed_fan(const std::string& name) {
  Fan f;
  auto hirzebruch = [&](long long a) {
    f.dim = 2;
    f.rays = {{1, 0}, {0, 1}, {-1, a}, {0, -1}};
    f.cones = {{0, 1}, {1, 2}, {2, 3}, {0, 3}};
  };
  if (name == "p2") {
    f.dim = 2;
    f.rays = {{1, 0}, {0, 1}, {-1, -1}};
    f.cones = {{0, 1}, {1, 2}, {0, 2}};
  } else if (name == "p1xp1") {
    hirzebruch(0);
  } else if (name == "f1") {
    hirzebruch(1);
  } else if (name == "f2") {
    hirzebruch(2);
  } else if (name == "f3") {
    hirzebruch(3);
  } else if (name == "p3" || name == "p1112") {
    f.dim = 3;
    f.rays = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-1, -1, name == "p3" ? -1 : -2}};
    f.cones = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  } else if (name == "p1xp1xp1") {
    f.dim = 3;
    f.rays = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 2; b < 4; ++b)
        for (std::size_t c = 4; c < 6; ++c) f.cones.push_back({a, b, c});
  } else if (name == "p2xp1") {
    f.dim = 3;
    f.rays = {{1, 0, 0}, {0, 1, 0}, {-1, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    for (Cone base : {Cone{0, 1}, Cone{1, 2}, Cone{0, 2}})
      for (std::size_t t : {3, 4}) f.cones.push_back({base[0], base[1], t});
  } else {
    throw InputError("unknown seed fan '" + name + "'");
  }
  f.normalize();
  f.validate();
  return f;
}

Fan random_fan(std::mt19937_64& rng, const RandomFanConfig& cfg) {
  const auto names = cfg.seeds.empty() ? seed_fan_names() : cfg.seeds;
  Fan f = seed_fan(names[rng() % names.size()]);
  if (f.picard_number() > cfg.max_rho) throw InputError("seed fan exceeds the Picard number bound");
  const std::size_t target = f.picard_number() + rng() % (cfg.max_rho - f.picard_number() + 1);
  std::uniform_int_distribution<long long> coord(-cfg.height, cfg.height);
  for (int attempts = 0; f.picard_number() < target && attempts < 1000; ++attempts) {
    IVec v(f.dim);
    long long g = 0;
    for (auto& x : v) {
      x = coord(rng);
      g = std::gcd(g, x);
    }
    if (g != 1 || f.find_ray(v)) continue;
    f = star_subdivision(f, v);
  }
  return f;
}

std::vector<Q> random_delta(std::mt19937_64& rng, std::size_t n, const RandomFanConfig& cfg) {
  std::vector<Q> d(n, Q(0));
  for (auto& c : d) {
    if (rng() % 2) continue;
    long q = 1 + static_cast<long>(rng() % cfg.max_denominator);
    Q top = cfg.max_coefficient * q;
    mpz_class pmax;
    mpz_fdiv_q(pmax.get_mpz_t(), top.get_num_mpz_t(), top.get_den_mpz_t());
    long p = static_cast<long>(rng() % (pmax.get_si() + 1));
    c = Q(p) / q;
  }
  return d;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json cone_to_json(const QCone& c) {
  auto rays = nlohmann::json::array();
  for (const auto& r : c.rays()) rays.push_back(io::to_json(r));
  auto facets = nlohmann::json::array();
  for (const auto& f : c.facets()) facets.push_back(io::to_json(f));
  auto eqs = nlohmann::json::array();
  for (const auto& e : c.equations()) eqs.push_back(io::to_json(e));
  return {{"rays", rays}, {"facets", facets}, {"equations", eqs}};
}

nlohmann::json sigma_to_json(const SigmaResult& s) {
  auto rays = nlohmann::json::array();
  for (const auto& r : s.rays)
    rays.push_back({{"ray", io::to_json(r.ray)},
                    {"pulled_back", io::to_json(r.pulled_back)},
                    {"source", r.source},
                    {"H", io::to_json(r.h)},
                    {"choices", r.choices},
                    {"mfs_target_dim", r.mfs_target_dim}});
  return {{"rays", rays}, {"grid_depth", s.depth}, {"stable", s.stable}, {"traces", s.traces}, {"failures", s.failures}};
}

nlohmann::json report_to_json(const StructureReport& r) {
  nlohmann::json j = {{"check", r.check}, {"applicable", r.applicable}, {"note", r.note}, {"short_circuit", r.short_circuit},
                      {"equal", r.equal}, {"lhs", cone_to_json(r.lhs)}};
  if (r.rhs) {
    j["rhs"] = cone_to_json(*r.rhs);
    nlohmann::json cert = {{"lhs_in_rhs", nlohmann::json::array()}, {"rhs_in_lhs", nlohmann::json::array()}};
    for (const auto& c : r.certificate.a_in_b) cert["lhs_in_rhs"].push_back(io::to_json(c));
    for (const auto& c : r.certificate.b_in_a) cert["rhs_in_lhs"].push_back(io::to_json(c));
    if (r.certificate.witness) {
      cert["witness"] = io::to_json(*r.certificate.witness);
      cert["witness_side"] = r.certificate.witness_in_a ? "lhs" : "rhs";
    }
    j["certificate"] = cert;
    j["sigma"] = sigma_to_json(r.sigma);
  }
  return j;
}

nlohmann::json report_to_json(const CoverageReport& r) {
  auto rays = nlohmann::json::array();
  for (const auto& m : r.rays) {
    nlohmann::json j = {{"ray", io::to_json(m.ray)}, {"in_nef_curves", m.in_nef_curves}};
    j["sigma_index"] = m.sigma_index ? nlohmann::json(*m.sigma_index) : nlohmann::json(nullptr);
    rays.push_back(j);
  }
  return {{"check", "exposed_coverage"}, {"pass", r.pass}, {"short_circuit", r.short_circuit}, {"rays", rays}};
}

nlohmann::json report_to_json(const FinitenessReport& r) {
  auto sa = nlohmann::json::array();
  for (const auto& s : r.sigma_a) sa.push_back(io::to_json(s));
  auto cr = nlohmann::json::array();
  for (const auto& s : r.candidate_rays) cr.push_back(io::to_json(s));
  return {{"check", "finiteness"}, {"pass", r.pass}, {"failures", r.failures}, {"sigma_a", sa},
          {"candidates", r.candidates}, {"candidate_rays", cr}, {"max_a_degree", to_string(r.max_a_degree)}};
}

nlohmann::json report_to_json(const ConeScanReport& r) {
  auto rays = [](const std::vector<NegativeRay>& v) {
    auto out = nlohmann::json::array();
    for (const auto& n : v)
      out.push_back({{"ray", io::to_json(n.ray)}, {"walls", n.walls}, {"min_degree", to_string(n.min_degree)},
                     {"max_degree", to_string(n.max_degree)}, {"bound_ok", n.bound_ok}});
    return out;
  };
  return {{"check", "cone_theorem"}, {"pass", r.pass}, {"failures", r.failures}, {"negative_rays", rays(r.negative)},
          {"all_negative_rays", rays(r.all_negative)}, {"decomposition_equal", r.decomposition.equal}};
}

}  // namespace mori
