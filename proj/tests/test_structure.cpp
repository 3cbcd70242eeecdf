#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mori/io.hpp"
#include "mori/linalg.hpp"
#include "mori/structure.hpp"

#include <nlohmann/json.hpp>

using namespace mori;

namespace {

Vec v(std::initializer_list<long> xs) {
  Vec out;
  for (long x : xs) out.emplace_back(x);
  return out;
}

ToricPair fixture(const std::string& name) { return load_pair("fixtures/" + name + ".json"); }

}  // namespace

TEST_CASE("cone decomposition with Sigma on surfaces") {
  for (const char* name : {"p2", "p1xp1", "f1", "f2"}) {
    auto rep = verify_theorem1(fixture(name));
    CHECK_MESSAGE(rep.equal, name);
    CHECK_FALSE(rep.short_circuit);
    REQUIRE(rep.rhs);
    CHECK(rep.lhs.contains(*rep.rhs));
    CHECK(rep.rhs->contains(rep.lhs));
  }
  auto f2 = verify_theorem1(fixture("f2"));
  // F2: the fiber is the only Sigma ray, and the (-2)-curve lies in K >= 0.
  REQUIRE(f2.sigma.rays.size() == 1);
  CHECK(f2.sigma.rays[0].ray == v({0, 1}));
}

TEST_CASE("nef curves are spanned by Sigma on log Fano pairs") {
  for (const char* name : {"p2", "p1xp1", "f1"}) {
    auto p = fixture(name);
    CHECK(is_log_fano(p));
    auto rep = verify_corollary2(p);
    CHECK_MESSAGE(rep.equal, name);
  }
  auto f2 = fixture("f2");
  CHECK_FALSE(is_log_fano(f2));
  CHECK_FALSE(verify_corollary2(f2).applicable);
  CHECK(is_log_fano(ToricPair(seed_fan("p1xp1xp1"))));
}

TEST_CASE("exposed rays are covered by Sigma") {
  for (const char* name : {"p2", "p1xp1", "f1", "f2", "p1112-blowup"}) {
    auto rep = verify_exposed_coverage(fixture(name));
    CHECK_MESSAGE(rep.pass, name);
    CHECK_FALSE(rep.rays.empty());
    for (const auto& r : rep.rays) CHECK(r.in_nef_curves);
  }
}

TEST_CASE("finiteness against brute-force integral classes") {
  for (const char* name : {"p3", "p1xp1xp1"}) {
    ToricPair p(seed_fan(name));
    auto rep = verify_finiteness(p, default_ample(p), Q(81));
    CHECK_MESSAGE(rep.pass, name);
    CHECK(rep.candidates > 0);
    CHECK(rep.max_a_degree < 81);
    CHECK_FALSE(rep.sigma_a.empty());
  }
  CHECK_THROWS_AS(verify_finiteness(fixture("f1"), default_ample(fixture("f1")), Q(10)), InputError);
  // P(1,1,1,2) is terminal; P(1,1,1,3) is canonical only.
  CHECK(is_terminal(fixture("p1112")));
  Fan f = seed_fan("p3");
  f.rays[3] = {-1, -1, -3};
  ToricPair p1113(f);
  CHECK_FALSE(is_terminal(p1113));
  CHECK_THROWS_AS(verify_finiteness(p1113, default_ample(p1113), Q(10)), InputError);
  ToricPair p3(seed_fan("p3"));
  CHECK_THROWS_AS(verify_finiteness(p3, ClassVector::divisor(v({0})), Q(10)), InputError);
}

TEST_CASE("cone theorem scan on fixtures") {
  for (const char* name : {"p2", "p1xp1", "f1", "f2", "p1112", "p1112-blowup", "quadric-res-1", "quadric-res-2", "flip-3d-1"}) {
    auto p = fixture(name);
    auto rep = cone_theorem_scan(p, default_ample(p));
    CHECK_MESSAGE(rep.pass, name);
    CHECK(rep.decomposition.equal);
    for (const auto& n : rep.all_negative) {
      CHECK(sgn(n.min_degree) > 0);
      CHECK(n.max_degree <= Q(static_cast<long>(2 * p.dim())));
    }
  }
  auto f1 = fixture("f1");
  // The (-1)-curve has -K.C = 1; the fiber has -K.f = 2.
  auto rep = cone_theorem_scan(f1, default_ample(f1));
  REQUIRE(rep.all_negative.size() == 2);
  CHECK_THROWS_AS(cone_theorem_scan(f1, ClassVector::divisor(v({1, 0}))), InputError);
}

TEST_CASE("abstract cubic pencil lattice") {
  auto m = abstract_model_from_json(io::parse_json(io::read_file("fixtures/cubic-pencil.json"), "cubic-pencil"));
  const Vec cubic = v({3, -1, -1, -1, -1, -1, -1, -1, -1});
  auto nm = m.nef_curves();
  bool extremal = false;
  for (const auto& r : nm.extremal_rays()) extremal |= same_ray(r, cubic);
  CHECK(extremal);
  Matrix tight;
  for (const auto& g : m.effective.rays())
    if (sgn(dot(m.functional(ClassVector::divisor(g)), cubic)) == 0) tight.push_back(g);
  CHECK(tight.size() == 8);
  CHECK(rank(tight, 9) == 8);
  auto rep = verify_theorem1(m);
  CHECK_FALSE(rep.applicable);
  CHECK_FALSE(rep.rhs);
  // -K is the cubic class, nef with self-intersection zero.
  CHECK(nm.contains(cubic));
}

TEST_CASE("random fans and boundaries") {
  std::mt19937_64 rng(5);
  RandomFanConfig cfg;
  for (int i = 0; i < 30; ++i) {
    Fan f = random_fan(rng, cfg);
    CHECK_NOTHROW(f.validate());
    CHECK(f.picard_number() <= cfg.max_rho);
    auto d = random_delta(rng, f.rays.size(), cfg);
    for (const auto& c : d) {
      CHECK(sgn(c) >= 0);
      CHECK(c <= cfg.max_coefficient);
      CHECK(c.get_den() <= 10);
    }
    CHECK_NOTHROW(ToricPair(f, d));
  }
  CHECK_THROWS_AS(seed_fan("p4"), InputError);
}

TEST_CASE("report serialization") {
  auto rep = verify_theorem1(fixture("f1"));
  auto j = report_to_json(rep);
  CHECK(j["check"] == "theorem1");
  CHECK(j["equal"] == true);
  CHECK(j["sigma"]["rays"].size() == 2);
  auto c = report_to_json(verify_exposed_coverage(fixture("f1")));
  CHECK(c["pass"] == true);
}
