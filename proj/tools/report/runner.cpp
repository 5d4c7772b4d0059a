#include "report/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mmdim/caratheodory.hpp"
#include "mmdim/error.hpp"
#include "mmdim/measure.hpp"
#include "mmdim/parallel.hpp"
#include "mmdim/pressure.hpp"
#include "mmdim/rng.hpp"
#include "report/verify.hpp"

namespace mmdim::report {

namespace {

PressureOptions pressure_options(const ExperimentConfig& cfg) {
  PressureOptions o;
  o.source = cfg.source;
  o.exact_cap = cfg.exact_cap;
  o.brute_limit = cfg.brute_limit;
  return o;
}

Potential potential_or(const ExperimentConfig& cfg, const std::string& name, double fallback) {
  auto it = cfg.potentials.find(name);
  return it == cfg.potentials.end() ? Potential::constant(fallback) : it->second;
}

void need_eps(const ExperimentConfig& cfg, std::size_t count) {
  if (cfg.eps.size() < count)
    throw ConfigError("schedule.eps", "need at least " + std::to_string(count) + " radii");
}

void add_fit_rows(RunResult& out, const std::string& name, const DimensionEstimate& d) {
  out.summary.push_back({name, d.slope, d.exact, "slope against log(1/eps)"});
  out.summary.push_back({name + "_intercept", d.intercept, d.exact, ""});
  out.summary.push_back({name + "_residual", d.residual, d.exact, "rms"});
  out.summary.push_back({name + "_max_ratio", d.max_ratio, d.exact, "max of value/log(1/eps)"});
}

bool witness_exact(const SystemModel& sys, const Potential& phi, const PressureRecord& r) {
  switch (r.witness) {
    case WitnessKind::separated_exact:
    case WitnessKind::spanning_exact:
      return true;
    case WitnessKind::analytic_oracle:
      return analytic_oracle(sys, phi, r.eps).exact_on_words;
    default:
      return false;
  }
}

RunResult estimate_mdim(const ExperimentConfig& cfg, const CommandOptions& opt) {
  need_eps(cfg, 3);
  if (cfg.n.size() < 2) throw ConfigError("schedule.n", "need at least two orders");
  const std::string phi_name = opt.phi.value_or("phi");
  const Potential phi = potential_or(cfg, phi_name, 0.0);
  const SystemFamily fam = cfg.family();
  const PressureOptions po = pressure_options(cfg);

  std::vector<PressureEstimate> per(cfg.eps.size());
  std::vector<char> exact(cfg.eps.size(), 1);
  parallel_for(cfg.eps.size(), [&](std::size_t i) {
    const SystemModel sys = fam.at(cfg.eps[i]);
    per[i] = pressure_estimate(sys, phi, cfg.eps[i], cfg.n, po);
    for (const auto& r : per[i].records) exact[i] = exact[i] && witness_exact(sys, phi, r);
  });

  RunResult out;
  std::vector<double> values;
  for (std::size_t i = 0; i < cfg.eps.size(); ++i) {
    for (const auto& r : per[i].records) {
      Record rec{"log_sum", {{"eps", r.eps}, {"n", double(r.n)}}, r.log_sum, false, {}, {}};
      rec.exact = r.witness == WitnessKind::separated_exact || r.witness == WitnessKind::spanning_exact ||
                  (r.witness == WitnessKind::analytic_oracle && exact[i]);
      rec.tags["witness"] = to_string(r.witness);
      out.records.push_back(rec);
    }
    Record p{"pressure", {{"eps", cfg.eps[i]}}, per[i].slope, bool(exact[i]), {}, {}};
    std::ostringstream mr;
    mr << std::setprecision(17) << per[i].max_ratio;
    p.tags["max_ratio"] = mr.str();
    out.records.push_back(p);
    values.push_back(per[i].slope);
  }
  DimensionEstimate d =
      fit_dimension(cfg.eps, values, std::vector<double>(cfg.n.begin(), cfg.n.end()));
  d.exact = std::all_of(exact.begin(), exact.end(), [](char c) { return c != 0; });
  add_fit_rows(out, "mdim", d);
  return out;
}

RunResult induced_mdim(const ExperimentConfig& cfg, const CommandOptions& opt) {
  need_eps(cfg, 3);
  if (cfg.T.size() < 2) throw ConfigError("schedule.T", "need at least two levels");
  const Potential phi = potential_or(cfg, opt.phi.value_or("phi"), 0.0);
  const std::string psi_name = opt.psi.value_or("psi");
  const Potential psi = cfg.potential(psi_name, "potential:" + psi_name);
  const SystemFamily fam = cfg.family();
  const PressureOptions po = pressure_options(cfg);

  std::vector<std::vector<InducedRecord>> per(cfg.eps.size());
  parallel_for(cfg.eps.size(), [&](std::size_t i) {
    const SystemModel sys = fam.at(cfg.eps[i]);
    for (double T : cfg.T) per[i].push_back(induced_record(sys, phi, psi, T, cfg.eps[i], po));
  });

  RunResult out;
  std::vector<double> values;
  bool all_exact = true;
  for (std::size_t i = 0; i < cfg.eps.size(); ++i) {
    std::vector<double> xs, ys;
    bool ex = true;
    for (const auto& r : per[i]) {
      out.records.push_back({"induced_log_p", {{"eps", r.eps}, {"T", r.T}}, r.log_p, r.exact, {}, {}});
      out.records.push_back({"induced_log_q", {{"eps", r.eps}, {"T", r.T}}, r.log_q, r.exact, {}, {}});
      ex = ex && r.exact;
      if (std::isfinite(r.log_p)) {
        xs.push_back(r.T);
        ys.push_back(r.log_p);
      }
    }
    if (xs.size() < 2) throw Error("fewer than two usable levels at eps=" + std::to_string(cfg.eps[i]));
    const double slope = fit_line(xs, ys).slope;
    out.records.push_back({"induced_pressure", {{"eps", cfg.eps[i]}}, slope, ex, {}, {}});
    values.push_back(slope);
    all_exact = all_exact && ex;
  }
  DimensionEstimate d = fit_dimension(cfg.eps, values, cfg.T);
  d.exact = all_exact;
  add_fit_rows(out, "induced_mdim", d);
  return out;
}

RunResult solve_root(const ExperimentConfig& cfg, const CommandOptions& opt) {
  need_eps(cfg, 3);
  if (cfg.n.size() < 2) throw ConfigError("schedule.n", "need at least two orders");
  const std::string phi_name = opt.phi.value_or(cfg.root_phi);
  const std::string psi_name = opt.psi.value_or(cfg.root_psi);
  const Potential phi = cfg.potential(phi_name, "potential:" + phi_name);
  const Potential psi = cfg.potential(psi_name, "potential:" + psi_name);
  const double tol = opt.tol.value_or(cfg.root_tol);
  if (!(tol > 0.0)) throw ConfigError("tol", "tolerance must be positive");
  const SystemFamily fam = cfg.family();
  const PressureOptions po = pressure_options(cfg);

  RunResult out;
  bool all_exact = true;
  auto mdim_fn = [&](double beta) {
    const Potential f = Potential::affine(1.0, phi, -beta, psi);
    DimensionEstimate d = mdim_estimate(fam, f, cfg.eps, cfg.n, po);
    all_exact = all_exact && d.exact;
    out.records.push_back({"mdim_at_beta", {{"beta", beta}}, d.slope, d.exact, {}, {}});
    return d.slope;
  };
  const RootResult r = solve_bowen_root(mdim_fn, phi, psi, tol);
  out.summary.push_back({"beta", r.beta, all_exact, r.diagnostics});
  out.summary.push_back({"mdim_at_root", r.value, all_exact, ""});
  out.summary.push_back({"bracket_lo", r.lo, all_exact, ""});
  out.summary.push_back({"bracket_hi", r.hi, all_exact, ""});
  out.summary.push_back({"iterations", double(r.iterations), true, r.widened ? "widened" : ""});
  out.failed = !r.converged;
  return out;
}

RunResult subset_dim(const ExperimentConfig& cfg, const CommandOptions& opt) {
  need_eps(cfg, 2);
  Structure s = cfg.structure;
  if (opt.structure) {
    try {
      s = parse_structure(*opt.structure);
    } catch (const Error&) {
      throw ConfigError("structure", "unknown structure '" + *opt.structure + "'");
    }
  }
  const bool bs = s == Structure::bs || s == Structure::packing_bs || s == Structure::weighted;
  const Potential phi = potential_or(cfg, opt.phi.value_or("phi"), bs ? 1.0 : 0.0);
  const double eta = cfg.eta.empty() ? 0.3 : cfg.eta.front();
  auto z_of = [&](const SystemModel& sys, double) {
    PointSet all = sys.enumerate_points(cfg.subset_depth);
    if (!cfg.subset_generic) return all;
    const MeasureModel mu = cfg.measure_on(sys);
    const auto dict = default_dictionary(sys, cfg.dictionary_size);
    PointSet z;
    for (auto& x : all)
      if (generic_point_test(sys, x, mu, cfg.subset_depth, eta, dict)) z.push_back(x);
    if (z.empty()) throw Error("no generic words at the configured tolerance");
    return z;
  };
  SubsetMdimOptions so;
  so.N = cfg.subset_N;
  so.n_max = cfg.subset_n_max;
  so.tol = cfg.subset_tol;
  so.exact_cap = cfg.exact_cap;
  const DimensionEstimate d = subset_mdim(cfg.family(), z_of, phi, s, cfg.eps, so);

  RunResult out;
  for (std::size_t i = 0; i < cfg.eps.size(); ++i) {
    Record r{"critical_lambda", {{"eps", cfg.eps[i]}}, d.per_eps[i], d.exact, {}, {}};
    r.tags["structure"] = to_string(s);
    out.records.push_back(r);
  }
  add_fit_rows(out, "subset_mdim", d);
  return out;
}

RunResult entropy(const ExperimentConfig& cfg, const CommandOptions& opt) {
  need_eps(cfg, 1);
  const std::string q = opt.quantity.value_or(cfg.quantity);
  if (q != "bk" && q != "bs" && q != "katok" && q != "ps")
    throw ConfigError("quantity", "expected bk, bs, katok or ps, got '" + q + "'");
  if (cfg.n.size() < 2) throw ConfigError("schedule.n", "need at least two orders");
  const SystemFamily fam = cfg.family();

  RunResult out;
  // One estimate per (eps, parameter) cell, in schedule order.
  struct Cell {
    double eps;
    std::string key;
    double param;
  };
  std::vector<Cell> cells;
  for (double e : cfg.eps) {
    if (q == "katok") {
      if (cfg.delta.empty()) throw ConfigError("schedule.delta", "katok needs delta values");
      for (double d : cfg.delta) cells.push_back({e, "delta", d});
    } else if (q == "ps") {
      if (cfg.eta.empty()) throw ConfigError("schedule.eta", "ps needs eta values");
      for (double h : cfg.eta) cells.push_back({e, "eta", h});
    } else {
      cells.push_back({e, "", 0.0});
    }
  }
  std::optional<Potential> phi;
  if (q == "bs") phi = cfg.potential(cfg.entropy_potential, "entropy.potential");

  std::vector<EntropyEstimate> est(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const SystemModel sys = fam.at(cells[c].eps);
    const MeasureModel mu = cfg.measure_on(sys);
    const std::uint64_t seed = mix_seed(cfg.seed, c);
    if (q == "bk" || q == "bs") {
      EntropyOptions eo;
      eo.n_schedule = cfg.n;
      eo.x_samples = cfg.x_samples;
      eo.mass.method = cfg.mass_method;
      eo.mass.samples = cfg.mass_samples;
      eo.mass.bootstrap = cfg.bootstrap;
      eo.bootstrap = cfg.bootstrap;
      eo.seed = seed;
      est[c] = q == "bk" ? brin_katok(mu, cells[c].eps, cfg.bound, eo)
                         : bs_entropy(mu, *phi, cells[c].eps, cfg.bound, eo);
    } else if (q == "katok") {
      KatokOptions ko;
      ko.pool = cfg.katok_pool;
      ko.eval_samples = cfg.katok_eval;
      ko.exact_cap = std::min<std::size_t>(cfg.exact_cap, 16);
      ko.seed = seed;
      est[c] = katok_entropy(mu, cells[c].eps, cells[c].param, cfg.n, ko);
    } else {
      PsOptions po;
      po.n_schedule = cfg.n;
      po.dictionary_size = cfg.dictionary_size;
      po.exact_cap = cfg.exact_cap;
      est[c] = ps_entropy(mu, cells[c].eps, cells[c].param, po);
    }
  }

  const bool stochastic = q == "bk" || q == "bs";
  std::map<double, std::vector<double>> by_param;  // param -> value per eps
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto& e = est[c];
    std::map<std::string, double> keys{{"eps", cells[c].eps}};
    if (!cells[c].key.empty()) keys[cells[c].key] = cells[c].param;
    for (const auto& [n, v] : e.per_scale) {
      auto k = keys;
      k["n"] = n;
      out.records.push_back({e.quantity + "_per_n", k, v, e.exact, {}, {}});
    }
    Record r{e.quantity, keys, e.value, e.exact, {}, {}};
    if (stochastic) r.ci = std::make_pair(e.ci_lo, e.ci_hi);
    if (!e.flags.empty()) r.tags["flags"] = e.flags;
    out.records.push_back(r);
    Record ratio{e.quantity + "_ratio", keys, e.value / std::log(1.0 / cells[c].eps), e.exact, {}, {}};
    if (stochastic) {
      const double l = std::log(1.0 / cells[c].eps);
      ratio.ci = std::make_pair(e.ci_lo / l, e.ci_hi / l);
    }
    out.records.push_back(ratio);
    by_param[cells[c].param].push_back(e.value);
  }
  if (cfg.eps.size() >= 2) {
    for (const auto& [param, vals] : by_param) {
      DimensionEstimate d = fit_dimension(cfg.eps, vals, std::vector<double>(cfg.n.begin(), cfg.n.end()));
      std::string name = q + "_mdim";
      if (q == "katok") name += "_delta_" + std::to_string(param);
      if (q == "ps") name += "_eta_" + std::to_string(param);
      d.exact = false;
      out.summary.push_back({name, d.slope, false, "slope against log(1/eps)"});
      out.summary.push_back({name + "_max_ratio", d.max_ratio, false, ""});
    }
  } else {
    for (const auto& [param, vals] : by_param)
      out.summary.push_back({q + "_ratio", vals.front() / std::log(1.0 / cfg.eps.front()), false, ""});
  }
  return out;
}

RunResult verify(const ExperimentConfig& cfg, const CommandOptions& opt) {
  const std::string suite = opt.suite.value_or(cfg.suite);
  const std::vector<Assertion> as = verify_suite(suite, cfg.seed);
  RunResult out;
  std::size_t passed = 0;
  for (const auto& a : as) {
    Record r{"assertion", {}, a.slack, a.passed, {}, {}};
    r.tags["suite"] = a.suite;
    r.tags["name"] = a.name;
    r.tags["status"] = a.passed ? "pass" : "fail";
    r.tags["cases"] = std::to_string(a.cases);
    if (!a.detail.empty()) r.tags["detail"] = a.detail;
    out.records.push_back(r);
    passed += a.passed;
    out.summary.push_back({a.suite + "/" + a.name, a.slack, a.passed, a.passed ? "pass" : "FAIL"});
  }
  out.failed = passed != as.size();
  out.summary.push_back({"passed", double(passed), true, std::to_string(as.size()) + " assertions"});
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char c : s) {
    if (c == '"') o += '"';
    o += c;
  }
  return o + "\"";
}

}  // namespace

RunResult run(const std::string& command, const ExperimentConfig& cfg, const CommandOptions& opt) {
  RunResult r;
  if (command == "estimate-mdim")
    r = estimate_mdim(cfg, opt);
  else if (command == "induced-mdim")
    r = induced_mdim(cfg, opt);
  else if (command == "solve-root")
    r = solve_root(cfg, opt);
  else if (command == "subset-dim")
    r = subset_dim(cfg, opt);
  else if (command == "entropy")
    r = entropy(cfg, opt);
  else if (command == "verify")
    r = verify(cfg, opt);
  else
    throw ConfigError("command", "unknown command '" + command + "'");
  r.command = command;
  return r;
}

std::string record_json(const Record& r, const std::string& command, const std::string& hash,
                        const std::string& timestamp) {
  nlohmann::json j;
  j["command"] = command;
  j["config_hash"] = hash;
  j["quantity"] = r.quantity;
  j["keys"] = nlohmann::json::object();
  for (const auto& [k, v] : r.keys) j["keys"][k] = v;
  j["value"] = r.value;
  j["exact"] = r.exact;
  if (r.ci) j["ci"] = {r.ci->first, r.ci->second};
  if (!r.tags.empty()) j["tags"] = r.tags;
  j["timestamp"] = timestamp;
  return j.dump();
}

std::string summary_csv(const RunResult& r) {
  std::ostringstream o;
  o << "command,quantity,value,exact,note\n";
  for (const auto& row : r.summary)
    o << r.command << "," << csv_field(row.quantity) << "," << std::setprecision(17) << row.value << ","
      << (row.exact ? "true" : "false") << "," << csv_field(row.note) << "\n";
  return o.str();
}

std::string timestamp_now() {
  std::time_t t = std::time(nullptr);
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) {
    char* end = nullptr;
    long long v = std::strtoll(sde, &end, 10);
    if (end && *end == '\0') t = static_cast<std::time_t>(v);
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace mmdim::report
