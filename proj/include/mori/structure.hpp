#pragma once

// Certified comparisons of curve cones with the cone spanned by pulled-back
// Mori fiber space fibers, finiteness checks and random test fans.

#include "mori/mmp.hpp"

#include <nlohmann/json_fwd.hpp>

#include <random>

namespace mori {

struct StructureReport {
  std::string check;
  bool applicable = true;
  std::string note;
  bool short_circuit = false;
  QCone lhs = QCone::zero(1);
  std::optional<QCone> rhs;
  bool equal = false;
  EqualityCertificate certificate;
  SigmaResult sigma;
};

/// NE_1(K+Delta >= 0) + NM_1 versus NE_1(K+Delta >= 0) + cone(Sigma).
StructureReport verify_theorem1(const ToricPair& pair, const SigmaConfig& cfg = {});
/// Abstract lattices have no MMP: only the left-hand side is computed.
StructureReport verify_theorem1(const AbstractModel& model);
/// NM_1 = cone(Sigma) when -(K+Delta) is ample.
StructureReport verify_corollary2(const ToricPair& pair, const SigmaConfig& cfg = {});

struct ExposedRayMatch {
  Vec ray;
  bool in_nef_curves = false;
  std::optional<std::size_t> sigma_index;
};
struct CoverageReport {
  bool pass = true;
  bool short_circuit = false;
  std::vector<ExposedRayMatch> rays;
};
CoverageReport verify_exposed_coverage(const ToricPair& pair, const SigmaResult& sigma);
CoverageReport verify_exposed_coverage(const ToricPair& pair, const SigmaConfig& cfg = {});

struct FinitenessReport {
  bool pass = true;
  std::vector<std::string> failures;
  std::vector<Vec> sigma_a;         // rays of Sigma with (K+A).C < 0
  std::size_t candidates = 0;       // integral classes found by brute force
  std::vector<Vec> candidate_rays;  // their distinct rays
  Q max_a_degree = 0;               // largest A.C among candidates
};
/// Terminal toric threefold with Delta = 0, A ample, user bound N.
FinitenessReport verify_finiteness(const ToricPair& pair, const ClassVector& a, const Q& n, const SigmaConfig& cfg = {});

struct NegativeRay {
  Vec ray;
  std::vector<std::size_t> walls;
  Q min_degree;  // min -(K+Delta).C over wall curves on the ray
  Q max_degree;
  bool bound_ok = true;
};
struct ConeScanReport {
  bool pass = true;
  std::vector<std::string> failures;
  std::vector<NegativeRay> negative;        // (K+Delta+A)-negative extremal rays
  std::vector<NegativeRay> all_negative;    // (K+Delta)-negative extremal rays
  EqualityCertificate decomposition;
};
ConeScanReport cone_theorem_scan(const ToricPair& pair, const ClassVector& a);
/// Sum of the extremal rays of the nef cone.
ClassVector default_ample(const ToricPair& pair);

bool is_log_fano(const ToricPair& pair);

/// Seed fans for random generation.
Fan seed_fan(const std::string& name);
std::vector<std::string> seed_fan_names();

struct RandomFanConfig {
  std::vector<std::string> seeds;  // empty: all
  std::size_t max_rho = 6;
  long long height = 2;
  Q max_coefficient = Q(9, 10);
  std::size_t max_denominator = 10;
};
/// Star subdivisions of a seed fan at random primitive vectors.
Fan random_fan(std::mt19937_64& rng, const RandomFanConfig& cfg);
std::vector<Q> random_delta(std::mt19937_64& rng, std::size_t n, const RandomFanConfig& cfg);

nlohmann::json cone_to_json(const QCone& c);
nlohmann::json report_to_json(const StructureReport& r);
nlohmann::json report_to_json(const CoverageReport& r);
nlohmann::json report_to_json(const FinitenessReport& r);
nlohmann::json report_to_json(const ConeScanReport& r);
nlohmann::json sigma_to_json(const SigmaResult& s);

}  // namespace mori
