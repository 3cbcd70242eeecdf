#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mori/toric.hpp"
#include "oracles.hpp"

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

Vec wall_class(const ToricPair& p, Cone wall) {
  auto w = p.find_wall(wall);
  REQUIRE(w.has_value());
  return p.walls()[*w].curve_class;
}

Vec wall_relation(const ToricPair& p, Cone wall) {
  auto w = p.find_wall(wall);
  REQUIRE(w.has_value());
  return p.walls()[*w].relation;
}

ToricPair with_delta(const ToricPair& p, std::size_t ray, Q a) {
  auto d = p.delta();
  d[ray] = a;
  return ToricPair(p.fan(), d);
}

bool same_rays(std::vector<Vec> a, std::vector<Vec> b) {
  for (auto& x : a) x = primitive(x);
  for (auto& x : b) x = primitive(x);
  sort_unique(a);
  sort_unique(b);
  return a == b;
}

Fan random_surface(std::mt19937_64& rng, int blowups) {
  Fan f = fixture("p2").fan();
  std::uniform_int_distribution<int> c(-3, 3);
  for (int k = 0; k < blowups;) {
    IVec u{c(rng), c(rng)};
    if (std::gcd(u[0], u[1]) != 1 || f.find_ray(u)) continue;
    f = star_subdivision(f, u);
    ++k;
  }
  return f;
}

}  // namespace

TEST_CASE("canonical classes in the chosen basis") {
  auto p2 = fixture("p2");
  CHECK(p2.lattice().basis_labels == std::vector<std::string>{"L"});
  CHECK(canonical_and_boundary(p2).canonical.coords == v({-3}));

  auto f1 = fixture("f1");
  CHECK(f1.lattice().basis_labels == std::vector<std::string>{"f", "C0"});
  auto cc = canonical_and_boundary(f1);
  CHECK(cc.canonical.coords == v({-3, -2}));
  CHECK(cc.log_canonical == cc.canonical);
  CHECK(is_zero(cc.boundary.coords));

  auto g = with_delta(f1, 3, Q(1, 2));
  auto cg = canonical_and_boundary(g);
  CHECK(cg.log_canonical.coords == add(cg.canonical.coords, cg.boundary.coords));
}

TEST_CASE("divisor classes satisfy the linear relations") {
  auto f1 = fixture("f1");
  // D_C_inf = C0 + f, D_f_ = f.
  CHECK(f1.divisor_class(3).coords == v({1, 1}));
  CHECK(f1.divisor_class(2).coords == v({1, 0}));
  CHECK(f1.class_of(parse_toric_divisor(f1, "4C0 + 5f")).coords == v({5, 4}));
  CHECK(f1.representative(ClassVector::divisor(v({5, 4})))[1] == 4);
}

TEST_CASE("Mori and effective cones of Hirzebruch surfaces") {
  auto f1 = fixture("f1");
  const auto& c = f1.cones();
  Vec c0 = wall_class(f1, {1}), f = wall_class(f1, {0});
  CHECK(c0 == v({1, -1}));
  CHECK(f == v({0, 1}));
  CHECK(same_rays(c.curves.extremal_rays(), {c0, f}));
  CHECK(same_rays(c.nef_curves.extremal_rays(), {f, add(c0, f)}));
  CHECK(c.curves.contains(c.nef_curves));
  CHECK(c.effective.contains(c.nef));

  auto f2 = fixture("f2");
  Vec c0b = wall_class(f2, {1}), fb = wall_class(f2, {0});
  CHECK(same_rays(f2.cones().nef_curves.extremal_rays(), {fb, add(c0b, scale(fb, 2))}));

  auto p2 = fixture("p2");
  for (const auto* q : {&p2.cones().curves, &p2.cones().effective, &p2.cones().nef, &p2.cones().nef_curves})
    CHECK(q->extremal_rays() == std::vector<Vec>{v({1})});
}

TEST_CASE("wall relations agree with the surface intersection oracle") {
  std::mt19937_64 rng(20261016);
  for (int trial = 0; trial < 40; ++trial) {
    Fan f = random_surface(rng, 1 + trial % 4);
    ToricPair p(f);
    auto m = oracle::surface_intersections(p.fan().rays, p.fan().cones);
    for (const auto& w : p.walls()) {
      const std::size_t i = w.wall.at(0);
      for (std::size_t j = 0; j < f.rays.size(); ++j) CHECK(w.relation[j] == m[j][i]);
      CHECK(sgn(w.relation[w.left]) > 0);
      CHECK(sgn(w.relation[w.right]) > 0);
      CHECK(p.relation_of(ClassVector::curve(w.curve_class)) == w.relation);
    }
  }
}

TEST_CASE("discrepancies") {
  auto p2 = fixture("p2");
  CHECK(discrepancy(p2, {1, 1}) == 1);
  CHECK(discrepancy(fixture("p1112"), {0, 0, -1}) == Q(1, 2));
  auto g = with_delta(fixture("f1"), 1, Q(1, 3));
  for (std::size_t i = 0; i < g.fan().rays.size(); ++i) CHECK(discrepancy(g, g.fan().rays[i]) == -g.delta()[i]);
  CHECK(klt_check(g));
  CHECK_THROWS_AS(discrepancy(p2, {0, 0}), InputError);
  CHECK_THROWS_AS(discrepancy(p2, {1, 1, 1}), InputError);
}

TEST_CASE("discrepancy agrees with the blow-up identity") {
  // K_Y = pi^* K_X + a E: pairing both sides with a curve contracted to a point.
  auto x = fixture("p1112");
  auto y = fixture("p1112-blowup");
  auto e = wall_class(y, {0, 4});
  Q ke = dot(y.class_of(y.canonical_divisor()).coords, e);
  Q ee = dot(y.divisor_class(4).coords, e);
  CHECK(discrepancy(x, {0, 0, -1}) == ke / ee);
}

TEST_CASE("terminality") {
  CHECK(is_terminal(fixture("p2")));
  CHECK(is_terminal(fixture("p1112")));
  Fan p112{2, {{1, 0}, {0, 1}, {-1, -2}}, {{0, 1}, {1, 2}, {0, 2}}, {}};
  p112.normalize();
  CHECK_FALSE(is_terminal(ToricPair(p112)));
}

TEST_CASE("contractions of surfaces") {
  auto f1 = fixture("f1");
  auto c0 = classify_and_contract(f1, wall_class(f1, {1}));
  CHECK(c0.kind == ContractionKind::divisorial);
  REQUIRE(c0.target.has_value());
  CHECK(c0.target->picard_number() == 1);
  CHECK(c0.contracted_ray == std::optional<std::size_t>(1));
  CHECK(c0.target->fan().rays == std::vector<IVec>{{1, 0}, {-1, 1}, {0, -1}});
  REQUIRE(c0.pushforward.has_value());
  CHECK(pushforward_divisor(*c0.pushforward, f1.divisor_class(1)).coords == v({0}));

  auto fib = classify_and_contract(f1, wall_class(f1, {0}));
  CHECK(fib.kind == ContractionKind::fiber);
  CHECK(fib.target_dim == 1);

  auto p2 = fixture("p2");
  auto pt = classify_and_contract(p2, v({1}));
  CHECK(pt.kind == ContractionKind::fiber);
  CHECK(pt.target_dim == 0);

  auto f2 = fixture("f2");
  CHECK_THROWS_AS(classify_and_contract(f2, wall_class(f2, {1})), InputError);  // K-trivial
  CHECK_THROWS_AS(classify_and_contract(f1, v({1, 0})), InputError);             // not extremal
}

TEST_CASE("Veronese cone: numerical pullback has half-integral coefficients") {
  auto y = fixture("p1112-blowup");
  auto x = fixture("p1112");
  auto e = wall_class(y, {0, 4});
  auto res = classify_and_contract(y, e);
  REQUIRE(res.kind == ContractionKind::divisorial);
  CHECK(res.target->fan().rays == x.fan().rays);
  CHECK(res.target->fan().cones == x.fan().cones);

  auto l = ClassVector::curve(wall_class(x, {0, 1}));
  auto m = numerical_pullback(*res.pushforward, l);
  Vec expected = add(wall_class(y, {0, 1}), scale(e, Q(1, 2)));
  CHECK(m.coords == expected);
  CHECK(y.relation_of(m) == Vec{Q(1, 2), Q(1, 2), Q(1), Q(1, 2), Q(0)});
}

TEST_CASE("quadric cone flop: numerical pullback is minus the flopped curve") {
  CHECK_THROWS_AS(fixture("quadric-cone"), InputError);
  auto x1 = fixture("quadric-res-1");
  auto x2 = fixture("quadric-res-2");
  auto phi = toric_pushforward(x1, x2);
  auto l1 = wall_class(x1, {0, 2});
  auto l2 = ClassVector::curve(wall_class(x2, {1, 3}));
  CHECK(numerical_pullback(phi, l2).coords == negate(l1));

  // With half of D1 in the boundary the flopping curve becomes a flip.
  auto pair = with_delta(x1, 0, Q(1, 2));
  CHECK(dot(pair.class_of(pair.log_canonical_divisor()).coords, l1) == Q(-1, 2));
  auto res = classify_and_contract(pair, l1);
  REQUIRE(res.kind == ContractionKind::small);
  auto fl = flip(pair, res.circuit);
  CHECK(fl.pair.fan().cones == x2.fan().cones);
}

TEST_CASE("flip fixture") {
  auto p = fixture("flip-3d-1");
  const auto kd = p.class_of(p.log_canonical_divisor()).coords;
  bool found = false;
  for (const auto& r : p.cones().curves.extremal_rays()) {
    if (sgn(dot(kd, r)) >= 0) continue;
    auto res = classify_and_contract(p, r);
    if (res.kind != ContractionKind::small) continue;
    found = true;
    auto fl = flip(p, res.circuit);
    CHECK(fl.pair.picard_number() == p.picard_number());
    const auto kp = fl.pair.class_of(fl.pair.log_canonical_divisor()).coords;
    std::size_t positive = 0;
    for (const auto& w : fl.pair.walls()) {
      if (p.find_wall(w.wall)) continue;
      CHECK(sgn(dot(kp, w.curve_class)) > 0);
      ++positive;
    }
    CHECK(positive == fl.flipped_walls.size());
    Circuit back{res.circuit.negative, res.circuit.positive, res.circuit.links};
    CHECK(retriangulate(fl.pair.fan(), back).cones == p.fan().cones);
  }
  CHECK(found);
}

TEST_CASE("common refinement") {
  auto f1 = fixture("f1").fan();
  auto same = common_refinement(f1, f1);
  CHECK(same.fan.cones.size() == f1.cones.size());
  CHECK(same.fan.rays.size() == f1.rays.size());

  Fan p2 = fixture("p2").fan();
  p2.rays = {{1, 0}, {-1, 1}, {0, -1}};
  auto r = common_refinement(f1, p2);
  CHECK(r.fan.rays.size() == 4);
  CHECK(r.fan.cones.size() == 4);
  for (std::size_t i = 0; i < r.fan.rays.size(); ++i) CHECK(r.in_a[i].has_value());

  auto w = common_refinement(fixture("quadric-res-1").fan(), fixture("quadric-res-2").fan());
  CHECK(w.fan.find_ray({0, 0, -1}).has_value());
  CHECK(w.fan.cones.size() == 8);
}

TEST_CASE("fan validation rejects bad input") {
  auto bad = [](const char* text) { return pair_from_json(nlohmann::json::parse(text)); };
  CHECK_THROWS_AS(bad(R"({"dim":2,"rays":[[1,0],[0,1],[-1,-1]],"max_cones":[[0,1],[1,2]]})"), InputError);
  CHECK_THROWS_AS(bad(R"({"dim":2,"rays":[[2,0],[0,1],[-1,-1]],"max_cones":[[0,1],[1,2],[0,2]]})"), InputError);
  CHECK_THROWS_AS(bad(R"({"dim":2,"rays":[[1,0],[0,1]],"max_cones":[[0,1]]})"), InputError);
  CHECK_THROWS_AS(bad(R"({"dim":2,"rays":[[1,0],[0,1],[-1,-1]],"max_cones":[[0,1],[1,2],[0,2]],"delta":{"0":"1"}})"),
                  InputError);
  CHECK_THROWS_AS(bad(R"({"dim":2,"rays":[[1,0],[0,1],[-1,-1]]})"), InputError);
  CHECK_THROWS_AS(parse_toric_divisor(fixture("f1"), "2Q"), InputError);
  // Overlapping cones: two copies of P^2 glued the wrong way.
  CHECK_THROWS_AS(bad(R"({"dim":2,"rays":[[1,0],[0,1],[-1,-1],[1,1]],"max_cones":[[0,1],[1,2],[0,2],[0,3],[1,3]]})"),
                  InputError);
}

TEST_CASE("json round trip") {
  auto g = with_delta(fixture("f1"), 2, Q(2, 3));
  auto h = pair_from_json(pair_to_json(g));
  CHECK(h.fan().rays == g.fan().rays);
  CHECK(h.fan().cones == g.fan().cones);
  CHECK(h.delta() == g.delta());
  auto j = pair_to_json(g);
  j["delta"] = {{j["labels"][2].get<std::string>(), "2/3"}};
  CHECK(pair_from_json(j).delta() == g.delta());
  j["delta"] = {{"nope", "1/2"}};
  CHECK_THROWS_AS(pair_from_json(j), InputError);
}

TEST_CASE("negative extremal wall classes respect the length bound") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    ToricPair p(random_surface(rng, 1 + trial % 3));
    const auto kd = p.class_of(p.log_canonical_divisor()).coords;
    const auto ext = p.cones().curves.extremal_rays();
    for (const auto& w : p.walls()) {
      Q k = dot(kd, w.curve_class);
      bool extremal = std::any_of(ext.begin(), ext.end(), [&](const Vec& r) { return same_ray(r, w.curve_class); });
      if (extremal && sgn(k) < 0) CHECK(-k <= 4);
    }
  }
}
