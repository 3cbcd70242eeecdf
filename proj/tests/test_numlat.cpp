#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mori/io.hpp"
#include "mori/toric.hpp"

#include <nlohmann/json.hpp>

#include <random>

using namespace mori;

namespace {

Vec v(std::initializer_list<long> xs) {
  Vec out;
  for (long x : xs) out.emplace_back(x);
  return out;
}

ToricPair fixture(const std::string& name) { return load_pair("fixtures/" + name + ".json"); }

PushforwardMap blow_down_f1() {
  auto c = classify_and_contract(fixture("f1"), v({1, -1}));
  REQUIRE(c.kind == ContractionKind::divisorial);
  REQUIRE(c.pushforward);
  return *c.pushforward;
}

Vec random_vec(std::mt19937_64& rng, std::size_t n) {
  Vec out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(Q(static_cast<long>(rng() % 11) - 5) / (1 + static_cast<long>(rng() % 3)));
  return out;
}

}  // namespace

TEST_CASE("blow-down of F1") {
  auto phi = blow_down_f1();
  CHECK_NOTHROW(phi.validate());
  CHECK(phi.source.rank() == 2);
  CHECK(phi.target.rank() == 1);
  // basis (f, C0): the exceptional curve C0 vanishes, f goes to a line.
  CHECK(pushforward_divisor(phi, ClassVector::divisor(v({0, 1}))).coords == v({0}));
  CHECK(pushforward_divisor(phi, ClassVector::divisor(v({1, 0}))).coords == v({1}));
  // The line pulls back to C0 + f, which is (1, 0) in dual coordinates.
  CHECK(numerical_pullback(phi, ClassVector::curve(v({1}))).coords == v({1, 0}));
  auto id = PushforwardMap::identity(phi.target);
  CHECK(id.after(phi).matrix == phi.matrix);
  CHECK(phi.after(PushforwardMap::identity(phi.source)).matrix == phi.matrix);
}

TEST_CASE("pullback pairs dually with pushforward") {
  std::mt19937_64 rng(3);
  auto phi = blow_down_f1();
  auto q = fixture("flip-3d-1");
  std::vector<PushforwardMap> maps{phi};
  for (const auto& r : q.cones().curves.extremal_rays()) {
    if (sgn(dot(q.class_of(q.log_canonical_divisor()).coords, r)) >= 0) continue;
    auto c = classify_and_contract(q, r);
    if (c.kind == ContractionKind::small) {
      maps.push_back(flip(q, c.circuit).pushforward);
      break;
    }
  }
  REQUIRE(maps.size() == 2);
  for (const auto& m : maps) {
    for (int t = 0; t < 25; ++t) {
      auto z = ClassVector::divisor(random_vec(rng, m.target.rank()));
      auto l = ClassVector::curve(random_vec(rng, m.target.rank()));
      auto pl = numerical_pullback(m, l);
      CHECK(intersect(m.source, pullback_divisor(m, z), pl) == intersect(m.target, z, l));
      // The pulled-back class meets every kernel divisor trivially.
      auto y = ClassVector::divisor(random_vec(rng, m.source.rank()));
      auto back = pullback_divisor(m, pushforward_divisor(m, y));
      CHECK(intersect(m.source, y, pl) == intersect(m.source, back, pl));
    }
  }
}

TEST_CASE("positivity on F1") {
  auto f1 = fixture("f1");
  const auto& mc = f1.cones();
  auto p = [&](const char* e) { return positivity(f1.class_of(parse_toric_divisor(f1, e)), mc.nef, mc.effective); };
  auto fib = p("f");
  CHECK(fib.nef);
  CHECK_FALSE(fib.ample);
  CHECK_FALSE(fib.big);
  CHECK(fib.pseudo_effective);
  auto c0 = p("C0");
  CHECK_FALSE(c0.nef);
  CHECK(c0.pseudo_effective);
  CHECK_FALSE(c0.big);
  auto amp = p("C0 + 2f");
  CHECK(amp.ample);
  CHECK(amp.big);
  CHECK(p("0f").degenerate);
  CHECK_FALSE(p("-f").pseudo_effective);
}

TEST_CASE("abstract model JSON") {
  auto j = io::parse_json(io::read_file("fixtures/cubic-pencil.json"), "cubic-pencil");
  auto m = abstract_model_from_json(j);
  CHECK(m.lattice.abstract);
  CHECK(m.lattice.rank() == 9);
  auto bad = j;
  bad.erase("K_class");
  CHECK_THROWS_AS(abstract_model_from_json(bad), InputError);
  bad = j;
  bad["rank"] = 8;
  CHECK_THROWS_AS(abstract_model_from_json(bad), InputError);
  bad = j;
  bad["pairing"][0][0] = 0;
  bad["pairing"][1][1] = 0;
  for (auto& row : bad["pairing"]) row = nlohmann::json::array({0, 0, 0, 0, 0, 0, 0, 0, 0});
  CHECK_THROWS_AS(abstract_model_from_json(bad), InputError);
  CHECK_THROWS_AS(io::parse_json("{\"rank\": ", "inline"), InputError);
}

TEST_CASE("divisor expressions") {
  auto t = io::parse_divisor_expression("3/2*f - D2 + f");
  CHECK(t.at("f") == Q(5, 2));
  CHECK(t.at("D2") == -1);
  CHECK(io::parse_divisor_expression("4C0 + 5f").at("C0") == 4);
  CHECK_THROWS_AS(io::parse_divisor_expression("3/0 f"), InputError);
  CHECK_THROWS_AS(io::parse_divisor_expression("+ +"), InputError);
  auto f1 = fixture("f1");
  CHECK_THROWS_AS(parse_toric_divisor(f1, "2 Z"), InputError);
  CHECK(f1.class_of(parse_toric_divisor(f1, "f_ - f")).coords == v({0, 0}));
}
