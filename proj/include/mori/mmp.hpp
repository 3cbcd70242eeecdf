#pragma once

// Nef and effective thresholds, the MMP with scaling on toric pairs, sampling
// of Mori fiber space fiber classes, and nef-model certificates.

#include "mori/toric.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string>

namespace mori {

/// Exact rational or +infinity.
struct Threshold {
  std::optional<Q> value;  // nullopt = +inf

  static Threshold infinity() { return {}; }
  bool is_infinite() const { return !value.has_value(); }
  std::string str() const { return value ? to_string(*value) : "inf"; }
  bool operator==(const Threshold&) const = default;
};
bool operator<=(const Threshold& a, const Threshold& b);

/// Feasible t >= 0 with base + t*dir nonnegative on every form; nullopt if empty.
struct Interval {
  Q lo;
  Threshold hi;
};
std::optional<Interval> feasible_interval(const std::vector<Vec>& forms, const Vec& base, const Vec& dir);

/// sup{t >= 0 : H + t*KD in cone}, throws InputError when no t qualifies.
Threshold cone_threshold(const QCone& divisor_cone, const Vec& h, const Vec& kd);

Threshold nef_threshold(const ToricPair& pair, const ClassVector& h);
Threshold effective_threshold(const ToricPair& pair, const ClassVector& h);
Threshold nef_threshold(const AbstractModel& model, const ClassVector& h);
Threshold effective_threshold(const AbstractModel& model, const ClassVector& h);

struct Thresholds {
  Threshold tau;
  Threshold sigma;
  /// -1/sigma; nullopt when sigma is 0.
  std::optional<Q> kodaira_energy() const;
};
Thresholds thresholds(const ToricPair& pair, const ClassVector& h);

/// inf{t >= 0 : K + Delta + t*H nef}; throws InputError if never nef.
Q scaling_lambda(const ToricPair& pair, const ClassVector& h);

enum class Policy { deterministic, branch_all };
Policy parse_policy(const std::string& s);
std::string to_string(Policy p);

/// (K+Delta)-negative extremal rays of NE_1 on which K+Delta+lambda*H vanishes.
/// Deterministic: the lexicographically smallest primitive generator only.
std::vector<Vec> select_extremal_ray(const ToricPair& pair, const ClassVector& h, const Q& lambda, Policy policy);

enum class StepKind { divisorial, flip, terminal_nef, terminal_mfs };
std::string to_string(StepKind k);

struct MmpStep {
  ToricPair pair;
  ToricDivisor h_divisor;  // torus-invariant representative of H_i
  ClassVector h;
  Q lambda;
  Threshold sigma;
  std::optional<Vec> ray;
  StepKind kind = StepKind::terminal_nef;
  std::optional<PushforwardMap> phi;  // X_i -> X_{i+1}
};

struct MfsOutcome {
  std::size_t target_dim = 0;
  Vec fiber_class;            // wall class on the last model
  Vec pulled_back;            // numerical pullback to X_0
  PushforwardMap composed;    // X_0 -> X_n
};

struct MmpTrace {
  std::vector<MmpStep> steps;
  std::optional<MfsOutcome> mfs;  // nullopt: nef model reached
  std::vector<std::size_t> choices;  // branch index taken at each step
};

struct MmpConfig {
  Policy policy = Policy::deterministic;
  std::size_t step_cap = 0;      // 0: 10 * rho^2
  std::size_t max_traces = 20000;
};

/// One trace; under branch-all this is the first branch.
MmpTrace run_scaling(const ToricPair& pair, const ToricDivisor& h, const MmpConfig& cfg = {});
/// Every trace allowed by the policy, in branch order.
std::vector<MmpTrace> run_scaling_all(const ToricPair& pair, const ToricDivisor& h, const MmpConfig& cfg = {});

struct Check {
  std::string name;
  bool pass = true;
  std::string detail;
};
/// Trace invariants: lambda decreasing, supported rays, sigma invariance,
/// pushforward consistency, MFS identities.
std::vector<Check> check_trace(const MmpTrace& trace);
bool all_pass(const std::vector<Check>& checks);

struct NefModelCertificate {
  bool pass = true;
  std::string failure;
  std::optional<IVec> offending_ray;
  Fan refinement;
  Vec e_at_lambda;  // E_i(lambda_i) on refinement rays
  Vec e_at_zero;
};
/// Conditions (1)-(4) for (X_i, Delta_i + lambda_i H_i) as a nef model of
/// (X_0, Delta_0 + lambda_i H_0), checked on a common refinement.
NefModelCertificate verify_nef_model(const MmpTrace& trace, std::size_t i);
/// E_i(t) on the refinement; throws InputError outside 0 <= t <= lambda_i.
Vec nef_model_difference(const MmpTrace& trace, std::size_t i, const Q& t, const Refinement& w);

struct SigmaRay {
  Vec ray;           // primitive generator
  Vec pulled_back;   // first recorded class on the ray
  std::string source;  // "grid" or "exposed"
  Vec h;             // scaling divisor class that produced it
  std::vector<std::size_t> choices;
  std::size_t mfs_target_dim = 0;
};

struct SigmaConfig {
  std::size_t min_depth = 1;
  std::size_t max_depth = 4;
  bool proof_guided = true;
  MmpConfig mmp{Policy::branch_all, 0, 20000};
};

struct SigmaResult {
  std::vector<SigmaRay> rays;  // sorted by ray
  std::size_t depth = 0;       // grid depth at which the set was stable
  bool stable = false;
  std::size_t traces = 0;
  std::vector<std::string> failures;  // trace invariant failures, if any
};

/// Fiber classes of Mori fiber spaces reached by MMPs with scaling, pulled back to X.
SigmaResult enumerate_sigma(const ToricPair& pair, const SigmaConfig& cfg = {});

nlohmann::json threshold_to_json(const Threshold& t);
nlohmann::json trace_to_json(const MmpTrace& trace);
nlohmann::json checks_to_json(const std::vector<Check>& checks);

}  // namespace mori
