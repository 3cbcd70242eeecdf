// Acceptance suite: one PASS/FAIL line per criterion.

#include "mori/structure.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>

using namespace mori;

namespace {

using Clock = std::chrono::steady_clock;

const std::vector<std::string> kFixtures = {"p2",   "p1xp1",        "f1",            "f2",           "p1112",
                                            "p1112-blowup", "quadric-res-1", "quadric-res-2", "flip-3d-1"};

ToricPair fixture(const std::string& name) { return load_pair("fixtures/" + name + ".json"); }

Vec v(std::initializer_list<long> xs) {
  Vec out;
  for (long x : xs) out.emplace_back(x);
  return out;
}

Vec kd(const ToricPair& p) { return p.class_of(p.log_canonical_divisor()).coords; }

Vec wall_class(const ToricPair& p, const Cone& wall) {
  auto w = p.find_wall(wall);
  if (!w) throw InvariantViolation("missing wall");
  return p.walls()[*w].curve_class;
}

struct Criterion {
  std::vector<std::string> failures;
  std::string info;
  void fail(std::string s) {
    if (failures.size() < 10) failures.push_back(std::move(s));
  }
  void expect(bool ok, const std::string& what) {
    if (!ok) fail(what);
  }
};

int report(int id, const std::string& title, double limit_s, const std::function<void(Criterion&)>& body) {
  Criterion c;
  auto t0 = Clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.fail(std::string("exception: ") + e.what());
  }
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (limit_s > 0 && secs > limit_s) c.fail("took " + std::to_string(secs) + " s, limit " + std::to_string(limit_s) + " s");
  const bool ok = c.failures.empty();
  std::ostringstream line;
  line << (ok ? "PASS" : "FAIL") << " " << id << " " << title << " (" << std::fixed;
  line.precision(2);
  line << secs << " s";
  if (!c.info.empty()) line << "; " << c.info;
  line << ")";
  std::cout << line.str() << "\n";
  for (const auto& f : c.failures) std::cout << "    " << f << "\n";
  std::cout.flush();
  return ok ? 0 : 1;
}

// Random pair with a scaling divisor H such that K + Delta + H is nef.
struct RandomCase {
  ToricPair pair;
  ToricDivisor h;
};

RandomCase random_case(std::mt19937_64& rng, const RandomFanConfig& cfg) {
  Fan f = random_fan(rng, cfg);
  ToricPair p(f, random_delta(rng, f.rays.size(), cfg));
  Vec a = zero_vec(p.picard_number());
  for (const auto& r : p.cones().nef.extremal_rays()) a = axpy(a, Q(1 + static_cast<long>(rng() % 3)), r);
  Vec h = sub(a, kd(p));
  return {p, p.representative(ClassVector::divisor(h))};
}

std::string describe(const ToricPair& p) {
  std::ostringstream s;
  s << "dim " << p.dim() << " rays";
  for (const auto& r : p.fan().rays) {
    s << " (";
    for (std::size_t i = 0; i < r.size(); ++i) s << (i ? "," : "") << r[i];
    s << ")";
  }
  s << " delta " << to_string(p.delta());
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  std::uint64_t seed = 20261016;
  std::size_t suite_size = 200;
  if (argc > 1) seed = std::strtoull(argv[1], nullptr, 10);
  if (argc > 2) suite_size = std::strtoull(argv[2], nullptr, 10);
  std::cout << "seed " << seed << "\n";

  // Randomized suite shared by criteria 4 and 5.
  std::vector<RandomCase> suite;
  {
    std::mt19937_64 rng(seed);
    RandomFanConfig cfg;
    while (suite.size() < suite_size) suite.push_back(random_case(rng, cfg));
  }

  int failed = 0;

  failed += report(1, "Veronese cone pullback is l~ + e/2", 1.0, [](Criterion& c) {
    auto y = fixture("p1112-blowup");
    auto x = fixture("p1112");
    Vec e = wall_class(y, {0, 4});
    auto res = classify_and_contract(y, e);
    c.expect(res.kind == ContractionKind::divisorial && res.pushforward.has_value(), "not a divisorial contraction");
    c.expect(res.target->fan().cones == x.fan().cones, "target is not P(1,1,1,2)");
    auto m = numerical_pullback(*res.pushforward, ClassVector::curve(wall_class(x, {0, 1})));
    Vec expected = axpy(wall_class(y, {0, 1}), Q(1, 2), e);
    c.expect(m.coords == expected, "pullback " + to_string(m.coords) + " != " + to_string(expected));
    c.info = "pullback " + to_string(m.coords);
  });

  failed += report(2, "quadric cone flop pullback is -l1", 1.0, [](Criterion& c) {
    auto x1 = fixture("quadric-res-1");
    auto x2 = fixture("quadric-res-2");
    auto phi = toric_pushforward(x1, x2);
    auto m = numerical_pullback(phi, ClassVector::curve(wall_class(x2, {1, 3})));
    Vec expected = negate(wall_class(x1, {0, 2}));
    c.expect(m.coords == expected, "pullback " + to_string(m.coords) + " != " + to_string(expected));
    c.info = "pullback " + to_string(m.coords);
  });

  failed += report(3, "F1 worked chain", 0, [](Criterion& c) {
    auto f1 = fixture("f1");
    auto hd = parse_toric_divisor(f1, "4C0 + 5f");
    auto h = f1.class_of(hd);
    auto t = thresholds(f1, h);
    c.expect(t.tau == Threshold{Q(1)}, "tau " + t.tau.str());
    c.expect(t.sigma == Threshold{Q(5, 3)}, "sigma " + t.sigma.str());
    // Hand oracle: curve forms C0=(1,-1), f=(0,1); effective facets e1, e2.
    c.expect(oracle::scan_sup({v({1, -1}), v({0, 1})}, h.coords, kd(f1)) == Q(1), "tau oracle");
    c.expect(oracle::scan_sup({v({1, 0}), v({0, 1})}, h.coords, kd(f1)) == Q(5, 3), "sigma oracle");
    auto tr = run_scaling(f1, hd);
    c.expect(tr.steps.size() == 2 && tr.steps[0].lambda == 1 && tr.steps[1].lambda == Q(3, 5), "lambdas");
    c.expect(tr.mfs && tr.mfs->target_dim == 0, "outcome is not a Mori fiber space over a point");
    for (const auto& s : tr.steps) c.expect(s.sigma == Threshold{Q(5, 3)}, "sigma not invariant");
    if (tr.mfs) {
      Vec support = axpy(h.coords, Q(5, 3), kd(f1));
      c.expect(dot(support, tr.mfs->pulled_back) == 0, "support identity");
      c.info = "lambda 1, 3/5; pulled back " + to_string(tr.mfs->pulled_back);
    }
  });

  std::size_t total_traces = 0, total_steps = 0, surfaces = 0, flips = 0, divisorial = 0, max_rho = 0;
  failed += report(4, "random property suite", 600.0, [&](Criterion& c) {
    for (std::size_t k = 0; k < suite.size(); ++k) {
      const auto& rc = suite[k];
      const auto& p = rc.pair;
      surfaces += p.dim() == 2;
      max_rho = std::max(max_rho, p.picard_number());
      const std::string who = "case " + std::to_string(k) + " [" + describe(p) + "]";
      auto th = thresholds(p, p.class_of(rc.h));
      c.expect(th.tau <= th.sigma, who + ": tau > sigma");
      c.expect(!th.sigma.is_infinite(), who + ": sigma infinite");
      const bool psef = p.cones().effective.contains(kd(p));
      for (const auto& t : run_scaling_all(p, rc.h, {Policy::branch_all})) {
        ++total_traces;
        total_steps += t.steps.size();
        for (const auto& ch : check_trace(t)) c.expect(ch.pass, who + ": " + ch.name + " " + ch.detail);
        c.expect(psef || t.mfs.has_value(), who + ": no Mori fiber space");
        for (std::size_t i = 0; i < t.steps.size(); ++i) {
          flips += t.steps[i].kind == StepKind::flip;
          divisorial += t.steps[i].kind == StepKind::divisorial;
          auto cert = verify_nef_model(t, i);
          c.expect(cert.pass, who + ": nef model step " + std::to_string(i) + " " + cert.failure);
        }
      }
    }
    c.info = std::to_string(suite.size()) + " pairs (" + std::to_string(surfaces) + " surfaces), " +
             std::to_string(total_traces) + " traces, " + std::to_string(total_steps) + " steps (" + std::to_string(divisorial) + " divisorial, " +
             std::to_string(flips) + " flips), max rho " + std::to_string(max_rho);
  });

  failed += report(5, "Sigma spans the curve cone decomposition", 0, [&](Criterion& c) {
    SigmaConfig cfg;
    auto run = [&](const ToricPair& p, const std::string& who) {
      auto s = enumerate_sigma(p, cfg);
      auto t1 = verify_theorem1(p, cfg);
      c.expect(t1.equal, who + ": theorem1 not equal");
      auto cov = verify_exposed_coverage(p, s);
      c.expect(cov.pass, who + ": coverage failed");
    };
    for (const auto& name : kFixtures) run(fixture(name), name);
    for (std::size_t k = 0; k < suite.size(); ++k) run(suite[k].pair, "case " + std::to_string(k));
    std::size_t fano = 0;
    for (const char* name : {"p2", "p1xp1", "f1", "p1xp1xp1"}) {
      ToricPair p(seed_fan(name));
      c.expect(verify_corollary2(p, cfg).equal, std::string(name) + ": corollary2");
    }
    std::mt19937_64 rng(seed + 1);
    RandomFanConfig rf;
    rf.seeds = {"p2", "p1xp1", "f1", "f2", "f3"};
    for (int attempts = 0; fano < 10 && attempts < 2000; ++attempts) {
      Fan f = random_fan(rng, rf);
      ToricPair p(f, random_delta(rng, f.rays.size(), rf));
      if (!is_log_fano(p)) continue;
      ++fano;
      c.expect(verify_corollary2(p, cfg).equal, "log Fano surface [" + describe(p) + "]: corollary2");
    }
    c.expect(fano >= 10, "only " + std::to_string(fano) + " random log Fano surfaces");
    c.info = std::to_string(kFixtures.size()) + " fixtures, " + std::to_string(suite.size()) + " random pairs, " +
             std::to_string(fano) + " random log Fano surfaces";
  });

  failed += report(6, "finiteness of Sigma_A with N = 81", 30.0, [](Criterion& c) {
    std::string info;
    for (const char* name : {"p3", "p1xp1xp1"}) {
      ToricPair p(seed_fan(name));
      auto rep = verify_finiteness(p, default_ample(p), Q(81));
      c.expect(rep.pass, std::string(name) + ": " + (rep.failures.empty() ? "" : rep.failures.front()));
      c.expect(!rep.sigma_a.empty(), std::string(name) + ": empty Sigma_A");
      info += std::string(info.empty() ? "" : ", ") + name + " |Sigma_A| " + std::to_string(rep.sigma_a.size()) +
              " candidates " + std::to_string(rep.candidates);
    }
    c.info = info;
  });

  failed += report(7, "cone theorem scan on fixtures", 0, [](Criterion& c) {
    std::size_t rays = 0;
    for (const auto& name : kFixtures) {
      auto p = fixture(name);
      auto rep = cone_theorem_scan(p, default_ample(p));
      c.expect(rep.pass, name + ": " + (rep.failures.empty() ? "" : rep.failures.front()));
      rays += rep.all_negative.size();
    }
    c.info = std::to_string(rays) + " negative extremal rays";
  });

  failed += report(8, "cone double description vs brute force", 0, [&](Criterion& c) {
    std::mt19937_64 rng(seed + 2);
    std::size_t compared = 0, duals = 0;
    while (compared < 1000) {
      std::size_t d = 1 + rng() % 5;
      std::size_t k = d + rng() % 4;
      std::vector<Vec> gens;
      for (std::size_t i = 0; i < k; ++i) gens.push_back(oracle::random_int_vec(rng, d, -3, 3));
      auto cone = QCone::from_generators(d, gens);
      ++duals;
      c.expect(cone.dual().dual() == cone, "dual involution failed in dim " + std::to_string(d));
      if (!cone.is_full_dimensional() || !cone.is_pointed()) continue;
      auto facets = oracle::brute_force_facets(d, gens);
      c.expect(cone.facets() == facets, "facets differ in dim " + std::to_string(d));
      c.expect(cone.extremal_rays() == oracle::brute_force_rays(d, gens, facets), "rays differ in dim " + std::to_string(d));
      ++compared;
    }
    c.info = std::to_string(compared) + " cones against the oracle, " + std::to_string(duals) + " dual involutions";
  });

  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << "\n";
  return failed == 0 ? 0 : 1;
}
