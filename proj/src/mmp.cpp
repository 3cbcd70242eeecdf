#include "mori/mmp.hpp"

#include "mori/io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace mori {

bool operator<=(const Threshold& a, const Threshold& b) {
  if (b.is_infinite()) return true;
  if (a.is_infinite()) return false;
  return *a.value <= *b.value;
}

std::optional<Interval> feasible_interval(const std::vector<Vec>& forms, const Vec& base, const Vec& dir) {
  Interval iv{Q(0), Threshold::infinity()};
  for (const auto& f : forms) {
    Q b = dot(f, base), d = dot(f, dir);
    if (sgn(d) == 0) {
      if (sgn(b) < 0) return std::nullopt;
      continue;
    }
    Q t = -b / d;
    if (sgn(d) > 0) {
      iv.lo = std::max(iv.lo, t);
    } else if (iv.hi.is_infinite() || t < *iv.hi.value) {
      iv.hi.value = t;
    }
  }
  if (!iv.hi.is_infinite() && *iv.hi.value < iv.lo) return std::nullopt;
  return iv;
}

namespace {

std::vector<Vec> cone_forms(const QCone& c) {
  std::vector<Vec> forms = c.facets();
  for (const auto& e : c.equations()) {
    forms.push_back(e);
    forms.push_back(negate(e));
  }
  return forms;
}

Vec log_canonical_class(const ToricPair& p) { return p.class_of(p.log_canonical_divisor()).coords; }

void require_divisor(const ClassVector& h, std::size_t rank) {
  if (h.side != Side::divisor || h.coords.size() != rank) throw InputError("scaling divisor must be a divisor class on this pair");
}

}  // namespace

Threshold cone_threshold(const QCone& divisor_cone, const Vec& h, const Vec& kd) {
  auto iv = feasible_interval(cone_forms(divisor_cone), h, kd);
  if (!iv) throw InputError("threshold undefined: H + t(K+Delta) lies outside the cone for every t >= 0");
  return iv->hi;
}

Threshold nef_threshold(const ToricPair& pair, const ClassVector& h) {
  require_divisor(h, pair.picard_number());
  return cone_threshold(pair.cones().nef, h.coords, log_canonical_class(pair));
}

Threshold effective_threshold(const ToricPair& pair, const ClassVector& h) {
  require_divisor(h, pair.picard_number());
  return cone_threshold(pair.cones().effective, h.coords, log_canonical_class(pair));
}

Threshold nef_threshold(const AbstractModel& model, const ClassVector& h) {
  require_divisor(h, model.lattice.rank());
  return cone_threshold(model.nef, h.coords, add(model.canonical.coords, model.boundary.coords));
}

Threshold effective_threshold(const AbstractModel& model, const ClassVector& h) {
  require_divisor(h, model.lattice.rank());
  return cone_threshold(model.effective, h.coords, add(model.canonical.coords, model.boundary.coords));
}

std::optional<Q> Thresholds::kodaira_energy() const {
  if (sigma.is_infinite()) return Q(0);
  if (sgn(*sigma.value) == 0) return std::nullopt;
  return -1 / *sigma.value;
}

Thresholds thresholds(const ToricPair& pair, const ClassVector& h) {
  Thresholds t{nef_threshold(pair, h), effective_threshold(pair, h)};
  if (!(t.tau <= t.sigma)) throw InvariantViolation("nef threshold " + t.tau.str() + " exceeds effective threshold " + t.sigma.str());
  return t;
}

Q scaling_lambda(const ToricPair& pair, const ClassVector& h) {
  require_divisor(h, pair.picard_number());
  auto iv = feasible_interval(cone_forms(pair.cones().nef), log_canonical_class(pair), h.coords);
  if (!iv) throw InputError("K + Delta + t H is not nef for any t >= 0");
  return iv->lo;
}

Policy parse_policy(const std::string& s) {
  if (s == "deterministic") return Policy::deterministic;
  if (s == "branch-all") return Policy::branch_all;
  throw InputError("unknown policy '" + s + "' (expected deterministic or branch-all)");
}

std::string to_string(Policy p) { return p == Policy::deterministic ? "deterministic" : "branch-all"; }

std::vector<Vec> select_extremal_ray(const ToricPair& pair, const ClassVector& h, const Q& lambda, Policy policy) {
  const Vec kd = log_canonical_class(pair);
  const Vec supp = axpy(kd, lambda, h.coords);
  std::vector<Vec> out;
  for (const auto& r : pair.cones().curves.extremal_rays())
    if (sgn(dot(kd, r)) < 0 && sgn(dot(supp, r)) == 0) out.push_back(primitive(r));
  if (out.empty())
    throw InvariantViolation("no (K+Delta)-negative extremal ray is supported on K+Delta+" + to_string(lambda) + "H");
  std::sort(out.begin(), out.end(), lex_less);
  if (policy == Policy::deterministic) out.resize(1);
  return out;
}

std::string to_string(StepKind k) {
  switch (k) {
    case StepKind::divisorial: return "divisorial";
    case StepKind::flip: return "flip";
    case StepKind::terminal_nef: return "terminal_nef";
    case StepKind::terminal_mfs: return "terminal_mfs";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Driver

namespace {

struct Explorer {
  const MmpConfig& cfg;
  std::size_t cap;
  std::vector<MmpTrace> out;
  bool first_only = false;

  bool done() const { return first_only && !out.empty(); }

  void explore(const ToricPair& pair, const ToricDivisor& hdiv, MmpTrace trace, const PushforwardMap& composed) {
    if (done()) return;
    if (trace.steps.size() >= cap)
      throw InvariantViolation("MMP exceeded the step cap of " + std::to_string(cap) + " steps");
    MmpStep step{pair, hdiv, pair.class_of(hdiv), Q(0), {}, std::nullopt, StepKind::terminal_nef, std::nullopt};
    step.lambda = scaling_lambda(pair, step.h);
    step.sigma = effective_threshold(pair, step.h);
    if (sgn(step.lambda) == 0) {
      trace.steps.push_back(std::move(step));
      push(std::move(trace));
      return;
    }
    const auto rays = select_extremal_ray(pair, step.h, step.lambda, cfg.policy);
    for (std::size_t b = 0; b < rays.size() && !done(); ++b) {
      MmpTrace t = trace;
      MmpStep s = step;
      s.ray = rays[b];
      t.choices.push_back(b);
      auto res = classify_and_contract(pair, rays[b]);
      if (res.kind == ContractionKind::fiber) {
        s.kind = StepKind::terminal_mfs;
        MfsOutcome mfs{res.target_dim, pair.walls()[res.walls.front()].curve_class, {}, composed};
        mfs.pulled_back = numerical_pullback(composed, ClassVector::curve(mfs.fiber_class)).coords;
        t.steps.push_back(std::move(s));
        t.mfs = std::move(mfs);
        push(std::move(t));
        continue;
      }
      std::optional<ToricPair> next;
      ToricDivisor next_h = hdiv;
      if (res.kind == ContractionKind::divisorial) {
        s.kind = StepKind::divisorial;
        s.phi = *res.pushforward;
        next = std::move(*res.target);
        next_h.erase(next_h.begin() + static_cast<std::ptrdiff_t>(*res.contracted_ray));
      } else {
        s.kind = StepKind::flip;
        auto fl = flip(pair, res.circuit);
        s.phi = std::move(fl.pushforward);
        next = std::move(fl.pair);
      }
      PushforwardMap comp = s.phi->after(composed);
      t.steps.push_back(std::move(s));
      explore(*next, next_h, std::move(t), comp);
    }
  }

  void push(MmpTrace t) {
    if (out.size() >= cfg.max_traces)
      throw InputError("branch-all exploration exceeded " + std::to_string(cfg.max_traces) + " traces");
    out.push_back(std::move(t));
  }
};

std::vector<MmpTrace> run(const ToricPair& pair, const ToricDivisor& h, const MmpConfig& cfg, bool first_only) {
  if (h.size() != pair.fan().rays.size()) throw InputError("scaling divisor needs one coefficient per ray");
  const std::size_t rho = pair.picard_number();
  Explorer ex{cfg, cfg.step_cap ? cfg.step_cap : 10 * rho * rho, {}, first_only};
  auto hc = pair.class_of(h);
  if (!pair.cones().nef.contains(add(log_canonical_class(pair), hc.coords)))
    throw InputError("K + Delta + H is not nef; MMP with scaling needs a nef starting point");
  ex.explore(pair, h, {}, PushforwardMap::identity(pair.lattice()));
  return std::move(ex.out);
}

}  // namespace

MmpTrace run_scaling(const ToricPair& pair, const ToricDivisor& h, const MmpConfig& cfg) {
  return std::move(run(pair, h, cfg, true).front());
}

std::vector<MmpTrace> run_scaling_all(const ToricPair& pair, const ToricDivisor& h, const MmpConfig& cfg) {
  return run(pair, h, cfg, false);
}

// ---------------------------------------------------------------------------
// Checks

bool all_pass(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::vector<Check> check_trace(const MmpTrace& trace) {
  std::vector<Check> out;
  auto add_check = [&](std::string name, bool pass, std::string detail = {}) {
    out.push_back({std::move(name), pass, pass ? std::string() : std::move(detail)});
  };
  const auto& st = trace.steps;
  if (st.empty()) {
    add_check("nonempty", false, "trace has no steps");
    return out;
  }
  const auto& x0 = st.front().pair;
  const Vec kd0 = log_canonical_class(x0);

  bool decreasing = true, in_range = true, supported = true, sigma_const = true, tau_sigma = true, push = true;
  std::string d_dec, d_sup, d_sig, d_ts, d_push;
  for (std::size_t i = 0; i < st.size(); ++i) {
    const auto& s = st[i];
    if (sgn(s.lambda) < 0 || s.lambda > 1) {
      in_range = false;
    }
    if (i > 0 && s.lambda > st[i - 1].lambda) {
      decreasing = false;
      d_dec = "step " + std::to_string(i);
    }
    if (s.ray) {
      const Vec kd = log_canonical_class(s.pair);
      if (!(sgn(dot(kd, *s.ray)) < 0 && sgn(dot(axpy(kd, s.lambda, s.h.coords), *s.ray)) == 0)) {
        supported = false;
        d_sup = "step " + std::to_string(i);
      }
    }
    if (!(s.sigma == st.front().sigma)) {
      sigma_const = false;
      d_sig = "step " + std::to_string(i) + ": " + s.sigma.str() + " vs " + st.front().sigma.str();
    }
    Threshold tau = nef_threshold(s.pair, s.h);
    if (!(tau <= s.sigma)) {
      tau_sigma = false;
      d_ts = "step " + std::to_string(i);
    }
    if (s.phi) {
      const auto& nx = st.at(i + 1).pair;
      const auto& phi = *s.phi;
      bool ok = pushforward_divisor(phi, s.h) == st[i + 1].h &&
                pushforward_divisor(phi, s.pair.class_of(s.pair.delta())) == nx.class_of(nx.delta()) &&
                pushforward_divisor(phi, s.pair.class_of(s.pair.canonical_divisor())) == nx.class_of(nx.canonical_divisor());
      if (!ok) {
        push = false;
        d_push = "step " + std::to_string(i);
      }
    }
  }
  add_check("lambda_in_unit_interval", in_range, "a step has lambda outside [0, 1]");
  add_check("lambda_decreasing", decreasing, d_dec);
  add_check("ray_supported_and_negative", supported, d_sup);
  add_check("sigma_invariant", sigma_const, d_sig);
  add_check("tau_le_sigma", tau_sigma, d_ts);
  add_check("pushforward_consistent", push, d_push);

  const bool psef = x0.cones().effective.contains(kd0);
  add_check("outcome_matches_pseudo_effectivity", psef != trace.mfs.has_value(),
            psef ? "K+Delta is pseudo-effective but the trace ends in a Mori fiber space"
                 : "K+Delta is not pseudo-effective but the trace ends in a nef model");
  if (trace.mfs) {
    const auto& last = st.back();
    Threshold tau = nef_threshold(last.pair, last.h);
    add_check("mfs_tau_is_inverse_lambda", sgn(last.lambda) > 0 && tau == Threshold{1 / last.lambda},
              "tau(H_n) = " + tau.str() + ", lambda_n = " + to_string(last.lambda));
    const auto& sigma = st.front().sigma;
    bool support = !sigma.is_infinite() &&
                   sgn(dot(axpy(st.front().h.coords, *sigma.value, kd0), trace.mfs->pulled_back)) == 0;
    add_check("mfs_support_identity", support, "(H + sigma(K+Delta)) . pullback is nonzero");
    add_check("mfs_pullback_in_nef_curves", x0.cones().nef_curves.contains(trace.mfs->pulled_back),
              "pulled back fiber class " + to_string(trace.mfs->pulled_back) + " is not in NM_1");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Nef models

Vec nef_model_difference(const MmpTrace& trace, std::size_t i, const Q& t, const Refinement& w) {
  const auto& s0 = trace.steps.at(0);
  const auto& si = trace.steps.at(i);
  if (sgn(t) < 0 || t > si.lambda)
    throw InputError("t = " + to_string(t) + " is outside [0, lambda_" + std::to_string(i) + "] = [0, " + to_string(si.lambda) + "]");
  auto coeffs = [&](const MmpStep& s) {
    ToricDivisor c = s.pair.log_canonical_divisor();
    for (std::size_t j = 0; j < c.size(); ++j) c[j] += t * s.h_divisor[j];
    return c;
  };
  const ToricDivisor c0 = coeffs(s0), ci = coeffs(si);
  Vec e;
  for (std::size_t k = 0; k < w.fan.rays.size(); ++k) {
    Vec r = w.fan.ray(k);
    e.push_back(piecewise_linear_value(s0.pair.fan(), c0, r) - piecewise_linear_value(si.pair.fan(), ci, r));
  }
  return e;
}

NefModelCertificate verify_nef_model(const MmpTrace& trace, std::size_t i) {
  if (i >= trace.steps.size()) throw InputError("step index " + std::to_string(i) + " is out of range");
  const auto& s0 = trace.steps[0];
  const auto& si = trace.steps[i];
  const Fan& f0 = s0.pair.fan();
  const Fan& fi = si.pair.fan();
  NefModelCertificate cert;
  auto fail = [&](std::string why, std::optional<IVec> ray = std::nullopt) {
    cert.pass = false;
    cert.failure = std::move(why);
    cert.offending_ray = std::move(ray);
    return cert;
  };
  // (1) the inverse map contracts no divisor; (2) boundary and H are pushforwards.
  for (std::size_t j = 0; j < fi.rays.size(); ++j) {
    auto k = f0.find_ray(fi.rays[j]);
    if (!k) return fail("X_i has a divisor that is not a divisor on X", fi.rays[j]);
    if (si.pair.delta()[j] != s0.pair.delta()[*k]) return fail("Delta_i is not the pushforward of Delta", fi.rays[j]);
    if (si.h_divisor[j] != s0.h_divisor[*k]) return fail("H_i is not the pushforward of H", fi.rays[j]);
  }
  // (3) nefness on X_i.
  const Vec kdi = log_canonical_class(si.pair);
  if (!si.pair.cones().nef.contains(axpy(kdi, si.lambda, si.h.coords))) return fail("K_i + Delta_i + lambda_i H_i is not nef");
  // (4) E_i(t) effective and exceptional for t in {0, lambda_i}.
  Refinement w = common_refinement(f0, fi);
  cert.refinement = w.fan;
  cert.e_at_lambda = nef_model_difference(trace, i, si.lambda, w);
  cert.e_at_zero = nef_model_difference(trace, i, Q(0), w);
  for (const Vec* e : {&cert.e_at_lambda, &cert.e_at_zero}) {
    for (std::size_t k = 0; k < w.fan.rays.size(); ++k) {
      if (sgn((*e)[k]) < 0) return fail("E_i has a negative coefficient", w.fan.rays[k]);
      if (sgn((*e)[k]) != 0 && w.in_b[k]) return fail("E_i is not exceptional over X_i", w.fan.rays[k]);
    }
  }
  return cert;
}

// ---------------------------------------------------------------------------
// Sigma enumeration

namespace {

void compositions(std::size_t parts, std::size_t total, std::vector<long>& cur, const std::function<void()>& f) {
  if (cur.size() + 1 == parts) {
    cur.push_back(static_cast<long>(total));
    f();
    cur.pop_back();
    return;
  }
  for (std::size_t k = 1; k + (parts - cur.size() - 1) <= total; ++k) {
    cur.push_back(static_cast<long>(k));
    compositions(parts, total - k, cur, f);
    cur.pop_back();
  }
}

struct SigmaCollector {
  const ToricPair& pair;
  const SigmaConfig& cfg;
  SigmaResult result;
  std::map<Vec, std::size_t, decltype(&lex_less)> index{&lex_less};
  std::set<Vec, decltype(&lex_less)> seen_h{&lex_less};

  // Runs the MMPs with scaling of h / tau(h). Returns the number of new rays.
  std::size_t sample(const Vec& h, const std::string& source) {
    if (!seen_h.insert(primitive(h)).second) return 0;
    Threshold tau = nef_threshold(pair, ClassVector::divisor(h));
    if (tau.is_infinite() || sgn(*tau.value) <= 0) throw InvariantViolation("sampled divisor has no finite positive nef threshold");
    Vec scaled = scale(h, 1 / *tau.value);
    auto traces = run_scaling_all(pair, pair.representative(ClassVector::divisor(scaled)), cfg.mmp);
    std::size_t added = 0;
    for (const auto& t : traces) {
      ++result.traces;
      for (const auto& c : check_trace(t))
        if (!c.pass) result.failures.push_back(source + " sample " + to_string(h) + ": " + c.name + " " + c.detail);
      if (!t.mfs) {
        result.failures.push_back(source + " sample " + to_string(h) + ": trace ended without a Mori fiber space");
        continue;
      }
      Vec r = primitive(t.mfs->pulled_back);
      if (index.count(r)) continue;
      index.emplace(r, result.rays.size());
      result.rays.push_back({r, t.mfs->pulled_back, source, scaled, t.choices, t.mfs->target_dim});
      ++added;
    }
    return added;
  }
};

}  // namespace

SigmaResult enumerate_sigma(const ToricPair& pair, const SigmaConfig& cfg) {
  if (cfg.min_depth < 1 || cfg.max_depth < cfg.min_depth) throw InputError("grid depth must satisfy 1 <= min_depth <= max_depth");
  const auto& mc = pair.cones();
  const Vec kd = log_canonical_class(pair);
  if (mc.effective.contains(kd)) throw InputError("K + Delta is pseudo-effective; no Mori fiber space exists");
  const auto nef_rays = mc.nef.extremal_rays();
  if (nef_rays.empty()) throw InputError("empty ample cone sample");

  SigmaCollector col{pair, cfg, {}};
  if (cfg.proof_guided) {
    // For every (K+Delta)-negative exposed ray R of NE_1(K+Delta >= 0) + NM_1,
    // an ample H = D - a(K+Delta) with D exposing R forces the MFS onto R.
    QCone lhs = mc.curves.restrict_halfspace(kd).sum(mc.nef_curves);
    const auto ne_rays = mc.curves.extremal_rays();
    for (const auto& r : lhs.exposed_rays()) {
      if (sgn(dot(kd, r)) >= 0) continue;
      auto d = lhs.exposing_functional(r);
      if (!d) throw InvariantViolation("exposed ray without an exposing functional");
      Q lo = 0;
      std::optional<Q> hi;
      for (const auto& g : ne_rays) {
        Q dg = dot(*d, g), k = dot(kd, g);
        if (sgn(k) == 0) continue;
        Q ratio = dg / k;
        if (sgn(k) < 0) lo = std::max(lo, ratio);
        else if (sgn(k) > 0) hi = hi ? std::min(*hi, ratio) : ratio;
      }
      Q a = hi ? Q((lo + *hi) / 2) : Q(lo + 1);
      Vec h = axpy(*d, -a, kd);
      if (!mc.nef.interior_contains(h)) throw InvariantViolation("no ample divisor of the form D - a(K+Delta) for exposed ray " + to_string(r));
      col.sample(h, "exposed");
    }
  }
  for (std::size_t depth = 1; depth <= cfg.max_depth; ++depth) {
    std::size_t added = 0;
    std::vector<long> cur;
    compositions(nef_rays.size(), nef_rays.size() + depth - 1, cur, [&] {
      Vec h = zero_vec(pair.picard_number());
      for (std::size_t i = 0; i < cur.size(); ++i) h = axpy(h, Q(cur[i]), nef_rays[i]);
      added += col.sample(h, "grid");
    });
    col.result.depth = depth;
    if (depth > cfg.min_depth && added == 0) {
      col.result.stable = true;
      break;
    }
  }
  std::sort(col.result.rays.begin(), col.result.rays.end(), [](const SigmaRay& a, const SigmaRay& b) { return lex_less(a.ray, b.ray); });
  return std::move(col.result);
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json threshold_to_json(const Threshold& t) { return t.str(); }

nlohmann::json trace_to_json(const MmpTrace& trace) {
  auto steps = nlohmann::json::array();
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    nlohmann::json js = {{"index", i},
                         {"pair", pair_to_json(s.pair)},
                         {"basis", s.pair.lattice().basis_labels},
                         {"H", io::to_json(s.h.coords)},
                         {"H_divisor", io::to_json(s.h_divisor)},
                         {"lambda", to_string(s.lambda)},
                         {"sigma", threshold_to_json(s.sigma)},
                         {"kind", to_string(s.kind)}};
    js["ray"] = s.ray ? io::to_json(*s.ray) : nlohmann::json(nullptr);
    if (s.phi) js["pushforward"] = {{"matrix", io::to_json(s.phi->matrix)}, {"section", io::to_json(s.phi->section)}};
    steps.push_back(std::move(js));
  }
  nlohmann::json out = {{"steps", steps}, {"choices", trace.choices}};
  if (trace.mfs) {
    out["outcome"] = {{"type", "mori_fiber_space"},
                      {"target_dim", trace.mfs->target_dim},
                      {"fiber_class", io::to_json(trace.mfs->fiber_class)},
                      {"pulled_back", io::to_json(trace.mfs->pulled_back)},
                      {"composed_pushforward", io::to_json(trace.mfs->composed.matrix)}};
  } else {
    out["outcome"] = {{"type", "nef_model_reached"}};
  }
  return out;
}

nlohmann::json checks_to_json(const std::vector<Check>& checks) {
  auto out = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json j = {{"name", c.name}, {"pass", c.pass}};
    if (!c.pass) j["detail"] = c.detail;
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace mori
