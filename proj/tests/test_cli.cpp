#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mori/cli.hpp"

#include <nlohmann/json.hpp>

#include <sstream>

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "mori");
  std::ostringstream out, err;
  int code = mori::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

nlohmann::json result(const Run& r) { return nlohmann::json::parse(r.out)["result"]; }

}  // namespace

TEST_CASE("run-mmp on the F1 chain") {
  auto r = cli({"run-mmp", "fixtures/f1.json", "--H", "4C0+5f"});
  REQUIRE(r.code == 0);
  auto t = result(r)["traces"][0];
  CHECK(t["steps"][0]["lambda"] == "1");
  CHECK(t["steps"][1]["lambda"] == "3/5");
  CHECK(t["outcome"]["type"] == "mori_fiber_space");
  for (const auto& c : t["checks"]) CHECK_MESSAGE(c["pass"] == true, c["name"]);
}

TEST_CASE("thresholds") {
  auto r = cli({"thresholds", "fixtures/f1.json", "--H", "4C0+5f"});
  REQUIRE(r.code == 0);
  auto j = result(r);
  CHECK(j["tau"] == "1");
  CHECK(j["sigma"] == "5/3");
  CHECK(j["kodaira_energy"] == "-3/5");
}

TEST_CASE("verify checks") {
  auto r = cli({"verify", "fixtures/p1xp1.json", "--check", "corollary2"});
  CHECK(r.code == 0);
  CHECK(result(r)["equal"] == true);
  CHECK(cli({"verify", "fixtures/f1.json", "--check", "theorem1"}).code == 0);
  CHECK(cli({"verify", "fixtures/f1.json", "--check", "cone-scan"}).code == 0);
  CHECK(cli({"verify", "fixtures/f1.json", "--check", "nef-models", "--H", "4C0+5f"}).code == 0);
  CHECK(cli({"verify", "fixtures/f2.json", "--check", "corollary2"}).code == 2);
  CHECK(cli({"verify", "fixtures/f1.json", "--check", "finiteness"}).code == 2);
}

TEST_CASE("input errors exit 2") {
  CHECK(cli({"analyze", "fixtures/missing.json"}).code == 2);
  CHECK(cli({"run-mmp", "fixtures/f1.json", "--H", "C0"}).code == 2);
  CHECK(cli({"run-mmp", "fixtures/f1.json"}).code == 2);
  CHECK(cli({"run-mmp", "fixtures/f1.json", "--H", "f", "--policy", "random"}).code == 2);
  CHECK(cli({"analyze", "fixtures/f1.json", "--grid-depth", "0"}).code == 2);
  CHECK(cli({"frobnicate", "fixtures/f1.json"}).code == 2);
  CHECK(cli({"run-mmp", "fixtures/cubic-pencil.json", "--H", "H"}).code == 2);
  auto bad = cli({"analyze", "fixtures/quadric-cone.json"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("input error") != std::string::npos);
}

TEST_CASE("invariant violations exit 1") {
  CHECK(cli({"run-mmp", "fixtures/f1.json", "--H", "4C0+5f", "--step-cap", "1"}).code == 1);
}

TEST_CASE("output is deterministic") {
  for (std::vector<std::string> args : {std::vector<std::string>{"enumerate-sigma", "fixtures/p1112-blowup.json", "--seed", "7"},
                                        std::vector<std::string>{"analyze", "fixtures/flip-3d-1.json"},
                                        std::vector<std::string>{"run-mmp", "fixtures/p1xp1.json", "--H", "2A+2B", "--policy", "branch-all"}}) {
    auto a = cli(args);
    auto b = cli(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find('.') == std::string::npos);  // no floating point
  }
}

TEST_CASE("abstract lattice input") {
  auto r = cli({"analyze", "fixtures/cubic-pencil.json"});
  CHECK(r.code == 0);
  CHECK(result(r)["rank"] == 9);
  CHECK(cli({"verify", "fixtures/cubic-pencil.json", "--check", "theorem1"}).code == 0);
}
