#include "mori/cli.hpp"

#include "mori/io.hpp"
#include "mori/structure.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <ostream>
#include <sstream>

namespace mori::cli {

namespace {

using nlohmann::json;

struct RunConfig {
  std::string command;
  std::string input_path;
  std::string policy;  // empty: command default
  std::size_t grid_depth = 4;
  std::size_t step_cap = 0;
  std::uint64_t seed = 0;
  std::string output_path;
  std::string h;
  std::string a;
  std::string n = "81";
  std::string check;
};

struct Input {
  std::optional<ToricPair> pair;
  std::optional<AbstractModel> model;
  json raw;
};

Input load(const std::string& path) {
  Input in;
  in.raw = io::parse_json(io::read_file(path), path);
  if (in.raw.is_object() && in.raw.contains("rank"))
    in.model = abstract_model_from_json(in.raw);
  else
    in.pair = pair_from_json(in.raw);
  return in;
}

ClassVector abstract_class(const AbstractModel& m, const std::string& text) {
  Vec c = zero_vec(m.lattice.rank());
  for (const auto& [label, q] : io::parse_divisor_expression(text)) {
    auto it = std::find(m.lattice.basis_labels.begin(), m.lattice.basis_labels.end(), label);
    if (it == m.lattice.basis_labels.end()) throw InputError("unknown basis label '" + label + "'");
    c[static_cast<std::size_t>(it - m.lattice.basis_labels.begin())] += q;
  }
  return ClassVector::divisor(c);
}

std::string require(const std::string& value, const char* flag) {
  if (value.empty()) throw InputError(std::string("missing required flag ") + flag);
  return value;
}

MmpConfig mmp_config(const RunConfig& rc, Policy fallback) {
  MmpConfig m;
  m.policy = rc.policy.empty() ? fallback : parse_policy(rc.policy);
  m.step_cap = rc.step_cap;
  return m;
}

SigmaConfig sigma_config(const RunConfig& rc) {
  SigmaConfig s;
  s.max_depth = rc.grid_depth;
  s.min_depth = std::min(s.min_depth, rc.grid_depth);
  s.mmp = mmp_config(rc, Policy::branch_all);
  return s;
}

json checklist(const std::vector<Check>& checks) { return checks_to_json(checks); }

struct Outcome {
  json report;
  std::vector<std::string> summary;
  bool pass = true;
  std::string witness;
};

// ---------------------------------------------------------------------------

Outcome analyze(const Input& in) {
  Outcome o;
  if (in.model) {
    const auto& m = *in.model;
    auto rep = verify_theorem1(m);
    o.report = {{"type", "abstract"},
                {"rank", m.lattice.rank()},
                {"basis", m.lattice.basis_labels},
                {"NE^1", cone_to_json(m.effective)},
                {"NM^1", cone_to_json(m.nef)},
                {"NE_1", cone_to_json(m.curves())},
                {"NM_1", cone_to_json(m.nef_curves())},
                {"theorem1_lhs", cone_to_json(rep.lhs)}};
    o.summary.push_back("abstract lattice of rank " + std::to_string(m.lattice.rank()));
    return o;
  }
  const auto& p = *in.pair;
  const auto& mc = p.cones();
  const Vec kd = p.class_of(p.log_canonical_divisor()).coords;
  auto basis = json::array();
  for (auto i : p.basis_rays()) basis.push_back(p.fan().labels[i]);
  auto walls = json::array();
  for (const auto& r : mc.curves.extremal_rays()) {
    json w = {{"ray", io::to_json(r)}, {"K_Delta_degree", to_string(dot(kd, r))}};
    if (sgn(dot(kd, r)) < 0) {
      auto c = classify_and_contract(p, r);
      w["contraction"] = to_string(c.kind);
      w["target_dim"] = c.target_dim;
    }
    walls.push_back(w);
  }
  const bool fano = is_log_fano(p);
  const bool klt = klt_check(p);
  const bool term = is_terminal(p);
  o.report = {{"type", "toric"},
              {"dim", p.dim()},
              {"rho", p.picard_number()},
              {"basis", basis},
              {"K", io::to_json(p.class_of(p.canonical_divisor()).coords)},
              {"K_plus_Delta", io::to_json(kd)},
              {"NE_1", cone_to_json(mc.curves)},
              {"NE^1", cone_to_json(mc.effective)},
              {"NM^1", cone_to_json(mc.nef)},
              {"NM_1", cone_to_json(mc.nef_curves)},
              {"extremal_rays", walls},
              {"klt", klt},
              {"terminal", term},
              {"log_fano", fano},
              {"K_plus_Delta_pseudo_effective", mc.effective.contains(kd)}};
  o.summary.push_back("dim " + std::to_string(p.dim()) + ", rho " + std::to_string(p.picard_number()) + ", " +
                      std::to_string(mc.curves.extremal_rays().size()) + " extremal rays of NE_1");
  o.summary.push_back(std::string("klt ") + (klt ? "yes" : "no") + ", terminal " + (term ? "yes" : "no") +
                      ", log Fano " + (fano ? "yes" : "no"));
  return o;
}

Outcome thresholds_cmd(const Input& in, const RunConfig& rc) {
  Outcome o;
  const std::string h = require(rc.h, "--H");
  Threshold tau, sigma;
  if (in.model) {
    auto hc = abstract_class(*in.model, h);
    tau = nef_threshold(*in.model, hc);
    sigma = effective_threshold(*in.model, hc);
  } else {
    auto hc = in.pair->class_of(parse_toric_divisor(*in.pair, h));
    auto t = thresholds(*in.pair, hc);
    tau = t.tau;
    sigma = t.sigma;
  }
  Thresholds t{tau, sigma};
  const bool ok = tau <= sigma;
  auto ke = t.kodaira_energy();
  o.report = {{"H", h},
              {"tau", threshold_to_json(tau)},
              {"sigma", threshold_to_json(sigma)},
              {"kodaira_energy", ke ? json(to_string(*ke)) : json(nullptr)},
              {"checks", checklist({{"tau_le_sigma", ok, tau.str() + " <= " + sigma.str()}})}};
  o.pass = ok;
  if (!ok) o.witness = "tau " + tau.str() + " exceeds sigma " + sigma.str();
  o.summary.push_back("tau = " + tau.str() + ", sigma = " + sigma.str() +
                      ", kodaira_energy = " + (ke ? to_string(*ke) : std::string("undefined")));
  return o;
}

const ToricPair& toric_only(const Input& in, const std::string& what) {
  if (!in.pair) throw InputError(what + " needs a toric pair; abstract lattices have no MMP");
  return *in.pair;
}

Outcome run_mmp_cmd(const Input& in, const RunConfig& rc) {
  Outcome o;
  const auto& p = toric_only(in, "run-mmp");
  const auto h = parse_toric_divisor(p, require(rc.h, "--H"));
  const auto cfg = mmp_config(rc, Policy::deterministic);
  auto traces = run_scaling_all(p, h, cfg);
  if (cfg.policy == Policy::deterministic) traces.resize(1);
  auto arr = json::array();
  for (std::size_t k = 0; k < traces.size(); ++k) {
    const auto& t = traces[k];
    auto checks = check_trace(t);
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
      auto cert = verify_nef_model(t, i);
      checks.push_back({"nef_model_step_" + std::to_string(i), cert.pass, cert.failure});
    }
    for (const auto& c : checks)
      if (!c.pass && o.pass) {
        o.pass = false;
        o.witness = "trace " + std::to_string(k) + ": " + c.name + " " + c.detail;
      }
    auto j = trace_to_json(t);
    j["checks"] = checklist(checks);
    arr.push_back(j);
    std::string line = "trace " + std::to_string(k) + ": lambda";
    for (const auto& s : t.steps) line += " " + to_string(s.lambda) + " (" + to_string(s.kind) + ")";
    line += t.mfs ? ", Mori fiber space over a " + std::to_string(t.mfs->target_dim) + "-dimensional base, pulled back " +
                        to_string(t.mfs->pulled_back)
                  : ", nef model";
    o.summary.push_back(line);
  }
  o.report = {{"policy", to_string(cfg.policy)}, {"H", rc.h}, {"traces", arr}};
  return o;
}

Outcome sigma_cmd(const Input& in, const RunConfig& rc) {
  Outcome o;
  const auto& p = toric_only(in, "enumerate-sigma");
  auto s = enumerate_sigma(p, sigma_config(rc));
  o.report = sigma_to_json(s);
  o.pass = s.failures.empty();
  if (!o.pass) o.witness = s.failures.front();
  for (const auto& r : s.rays) o.summary.push_back("Sigma ray " + to_string(r.ray) + " (" + r.source + ")");
  o.summary.push_back(std::to_string(s.rays.size()) + " rays from " + std::to_string(s.traces) + " traces, grid depth " +
                      std::to_string(s.depth) + (s.stable ? ", stable" : ", not stable"));
  return o;
}

ClassVector ample_from(const ToricPair& p, const RunConfig& rc) {
  return rc.a.empty() ? default_ample(p) : p.class_of(parse_toric_divisor(p, rc.a));
}

Outcome verify_cmd(const Input& in, const RunConfig& rc) {
  Outcome o;
  const std::string check = require(rc.check, "--check");
  if (check == "theorem1") {
    auto rep = in.model ? verify_theorem1(*in.model) : verify_theorem1(*in.pair, sigma_config(rc));
    o.report = report_to_json(rep);
    o.pass = !rep.applicable || rep.equal;
    if (!o.pass && rep.certificate.witness) o.witness = "witness " + to_string(*rep.certificate.witness);
    o.summary.push_back(std::string("theorem1: ") + (!rep.applicable ? "left-hand side only" : rep.equal ? "equal" : "NOT equal"));
    if (!rep.note.empty()) o.summary.push_back(rep.note);
  } else if (check == "corollary2") {
    auto rep = verify_corollary2(toric_only(in, check), sigma_config(rc));
    if (!rep.applicable) throw InputError("corollary2 precondition: " + rep.note);
    o.report = report_to_json(rep);
    o.pass = rep.equal;
    if (!o.pass && rep.certificate.witness) o.witness = "witness " + to_string(*rep.certificate.witness);
    o.summary.push_back(std::string("corollary2: NM_1 ") + (rep.equal ? "equals" : "differs from") + " cone(Sigma)");
  } else if (check == "coverage") {
    auto rep = verify_exposed_coverage(toric_only(in, check), sigma_config(rc));
    o.report = report_to_json(rep);
    o.pass = rep.pass;
    for (const auto& r : rep.rays)
      if (!r.sigma_index || !r.in_nef_curves) o.witness = "uncovered exposed ray " + to_string(r.ray);
    o.summary.push_back("coverage: " + std::to_string(rep.rays.size()) + " K-negative exposed rays, " + (rep.pass ? "all covered" : "NOT covered"));
  } else if (check == "finiteness") {
    const auto& p = toric_only(in, check);
    auto rep = verify_finiteness(p, ample_from(p, rc), parse_rational(rc.n), sigma_config(rc));
    o.report = report_to_json(rep);
    o.pass = rep.pass;
    if (!o.pass) o.witness = rep.failures.front();
    o.summary.push_back("finiteness: " + std::to_string(rep.sigma_a.size()) + " Sigma_A rays, " + std::to_string(rep.candidates) +
                        " integral candidates, max A.C " + to_string(rep.max_a_degree));
  } else if (check == "cone-scan") {
    const auto& p = toric_only(in, check);
    auto rep = cone_theorem_scan(p, ample_from(p, rc));
    o.report = report_to_json(rep);
    o.pass = rep.pass;
    if (!o.pass) o.witness = rep.failures.front();
    o.summary.push_back("cone scan: " + std::to_string(rep.all_negative.size()) + " negative extremal rays, " +
                        (rep.pass ? "bounds and decomposition hold" : "FAILED"));
  } else if (check == "nef-models") {
    RunConfig r = rc;
    if (r.policy.empty()) r.policy = "branch-all";
    o = run_mmp_cmd(in, r);
    o.report["check"] = "nef-models";
    o.summary.insert(o.summary.begin(), std::string("nef models: ") + (o.pass ? "all steps certified" : "FAILED"));
  } else {
    throw InputError("unknown check '" + check + "' (theorem1, corollary2, coverage, finiteness, cone-scan, nef-models)");
  }
  o.report["check"] = check;
  return o;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cones of curves and the MMP with scaling on toric pairs"};
  app.require_subcommand(1);
  RunConfig rc;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("input", rc.input_path, "fan/pair or abstract lattice JSON")->required();
    sub->add_option("--policy", rc.policy, "deterministic or branch-all");
    sub->add_option("--grid-depth", rc.grid_depth, "maximum sampling grid depth")->check(CLI::PositiveNumber);
    sub->add_option("--step-cap", rc.step_cap, "MMP step cap")->check(CLI::PositiveNumber);
    sub->add_option("--seed", rc.seed, "recorded in the report");
    sub->add_option("--output", rc.output_path, "write the JSON report here");
    sub->add_option("--H", rc.h, "scaling divisor, e.g. \"4C0+5f\"");
    sub->add_option("--A", rc.a, "ample divisor (default: sum of nef cone rays)");
    sub->add_option("--N", rc.n, "degree bound for finiteness");
  };
  for (const char* name : {"analyze", "run-mmp", "thresholds", "enumerate-sigma", "verify"}) {
    auto* sub = app.add_subcommand(name);
    add_common(sub);
    if (std::string(name) == "verify")
      sub->add_option("--check", rc.check, "theorem1|corollary2|coverage|finiteness|cone-scan|nef-models")->required();
    sub->callback([&rc, name] { rc.command = name; });
  }

  std::vector<std::string> rest(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rest.begin(), rest.end());
  try {
    app.parse(rest);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? 0 : 2;
  }

  try {
    Input in = load(rc.input_path);
    Outcome o;
    if (rc.command == "analyze") o = analyze(in);
    else if (rc.command == "thresholds") o = thresholds_cmd(in, rc);
    else if (rc.command == "run-mmp") o = run_mmp_cmd(in, rc);
    else if (rc.command == "enumerate-sigma") o = sigma_cmd(in, rc);
    else o = verify_cmd(in, rc);

    json report = {{"command", rc.command},
                   {"input", in.raw.value("name", rc.input_path)},
                   {"seed", rc.seed},
                   {"pass", o.pass},
                   {"result", o.report}};
    const std::string text = report.dump(2) + "\n";
    if (rc.output_path.empty()) {
      out << text;
    } else {
      std::ofstream f(rc.output_path, std::ios::binary);
      if (!f) throw InputError("cannot write " + rc.output_path);
      f << text;
      for (const auto& line : o.summary) out << line << "\n";
    }
    if (!o.pass) {
      err << "verification failed: " << o.witness << "\n";
      return 1;
    }
    return 0;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return 2;
  } catch (const InvariantViolation& e) {
    err << "invariant violation: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mori::cli
