#include "report/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mmdim/error.hpp"

namespace mmdim::report {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

long long parse_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(t, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, "not an integer: '" + t + "'");
  }
  if (used != t.size()) throw ConfigError(key, "not an integer: '" + t + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
  if (t == "false" || t == "no" || t == "0" || t == "off") return false;
  throw ConfigError(key, "not a boolean: '" + t + "'");
}

// Section view with key bookkeeping so unknown keys can be reported.
class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  std::optional<std::string> get(const std::string& key) {
    seen_.insert(key);
    if (!tree_) return std::nullopt;
    auto it = tree_->find(key);
    if (it == tree_->not_found()) return std::nullopt;
    return trim(it->second.data());
  }
  std::string full(const std::string& key) const { return name_ + "." + key; }

  void number(const std::string& key, double& out) {
    if (auto v = get(key)) out = parse_number(full(key), *v);
  }
  template <class Int>
  void integer(const std::string& key, Int& out, long long lo) {
    if (auto v = get(key)) {
      long long x = parse_integer(full(key), *v);
      if (x < lo) throw ConfigError(full(key), "must be at least " + std::to_string(lo));
      out = static_cast<Int>(x);
    }
  }
  void text(const std::string& key, std::string& out) {
    if (auto v = get(key)) out = *v;
  }
  void flag(const std::string& key, bool& out) {
    if (auto v = get(key)) out = parse_bool(full(key), *v);
  }
  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    if (auto v = get(key))
      for (const auto& item : split_list(*v)) out.push_back(parse_number(full(key), item));
    return out;
  }

  void reject_unknown() const {
    if (!tree_) return;
    for (const auto& kv : *tree_)
      if (!seen_.count(kv.first)) throw ConfigError(full(kv.first), "unknown key");
  }

 private:
  const pt::ptree* tree_;
  std::string name_;
  std::set<std::string> seen_;
};

const pt::ptree* child(const pt::ptree& root, const std::string& name) {
  auto it = root.find(name);
  return it == root.not_found() ? nullptr : &it->second;
}

template <class T>
void require_strict(const std::string& key, const std::vector<T>& v, bool increasing) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    bool ok = increasing ? v[i] > v[i - 1] : v[i] < v[i - 1];
    if (!ok)
      throw ConfigError(key, std::string("schedule must be strictly ") +
                                 (increasing ? "increasing" : "decreasing"));
  }
}

Potential parse_potential(Section& s, const std::string& name) {
  std::string kind = "constant";
  s.text("kind", kind);
  if (kind == "constant") {
    double c = 0.0;
    if (!s.get("value")) throw ConfigError(s.full("value"), "missing value for constant potential");
    s.number("value", c);
    return Potential::constant(c);
  }
  if (kind == "coordinate") {
    auto vals = s.numbers("values");
    if (vals.empty()) throw ConfigError(s.full("values"), "missing symbol table");
    return Potential::coordinate(vals);
  }
  throw ConfigError(s.full("kind"), "unknown potential kind '" + kind + "' for " + name);
}

std::string fmt(double v) {
  std::ostringstream o;
  o << std::setprecision(17) << v;
  return o.str();
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_floating_point_v<T>)
      out += fmt(v[i]);
    else
      out += std::to_string(v[i]);
  }
  return out;
}

}  // namespace

double parse_number(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError(key, "empty number");
  if (t.rfind("2^", 0) == 0) {
    const std::string e = trim(t.substr(2));
    std::size_t used = 0;
    double ex = 0.0;
    try {
      ex = std::stod(e, &used);
    } catch (const std::exception&) {
      throw ConfigError(key, "bad exponent in '" + t + "'");
    }
    if (used != e.size()) throw ConfigError(key, "bad exponent in '" + t + "'");
    return std::pow(2.0, ex);
  }
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError(key, "not a number: '" + t + "'");
  }
  if (used != t.size() || !std::isfinite(v)) throw ConfigError(key, "not a number: '" + t + "'");
  return v;
}

ExperimentConfig parse_config(std::istream& in, const std::string& origin) {
  pt::ptree root;
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("syntax", origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }

  ExperimentConfig cfg;
  static const std::set<std::string> known{"run",     "system",  "schedule", "caps",
                                           "pressure", "root",   "subset",   "measure",
                                           "entropy", "verify"};
  for (const auto& kv : root) {
    if (kv.first.rfind("potential:", 0) == 0) continue;
    if (!kv.second.data().empty() || !known.count(kv.first))
      throw ConfigError(kv.first, "unknown section or key outside a section");
  }

  {
    Section s(child(root, "run"), "run");
    auto seed = s.get("seed");
    if (!seed) throw ConfigError("seed", "missing required key run.seed");
    long long v = parse_integer("seed", *seed);
    if (v < 0) throw ConfigError("seed", "seed must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(v);
    s.reject_unknown();
  }
  {
    Section s(child(root, "system"), "system");
    std::string kind = "full", side = "one-sided", metric = "discrete";
    s.text("kind", kind);
    s.text("sidedness", side);
    s.text("metric", metric);
    if (kind == "full")
      cfg.system.kind = ShiftKind::full;
    else if (kind == "grid")
      cfg.system.kind = ShiftKind::grid;
    else
      throw ConfigError("system.kind", "expected full or grid, got '" + kind + "'");
    if (side == "one-sided")
      cfg.system.sidedness = Sidedness::one_sided;
    else if (side == "two-sided")
      cfg.system.sidedness = Sidedness::two_sided;
    else
      throw ConfigError("system.sidedness", "expected one-sided or two-sided, got '" + side + "'");
    if (metric == "discrete")
      cfg.system.symbol_metric = SymbolMetric::discrete;
    else if (metric == "abs-diff")
      cfg.system.symbol_metric = SymbolMetric::abs_diff;
    else
      throw ConfigError("system.metric", "expected discrete or abs-diff, got '" + metric + "'");
    s.integer("k", cfg.system.k, 1);
    s.integer("window", cfg.system.window, 1);
    s.number("weight_base", cfg.system.weight_base);
    s.flag("grid_per_scale", cfg.grid_per_scale);
    if (s.get("eps_min")) {
      s.number("eps_min", cfg.system.eps_min);
      cfg.eps_min_given = true;
    }
    s.reject_unknown();
  }
  {
    Section s(child(root, "schedule"), "schedule");
    cfg.eps = s.numbers("eps");
    for (double v : s.numbers("n")) {
      if (v != std::floor(v) || v < 1) throw ConfigError("schedule.n", "orders must be positive integers");
      cfg.n.push_back(static_cast<int>(v));
    }
    cfg.T = s.numbers("T");
    cfg.delta = s.numbers("delta");
    cfg.eta = s.numbers("eta");
    for (double e : cfg.eps)
      if (!(e > 0.0)) throw ConfigError("schedule.eps", "radii must be positive");
    for (double d : cfg.delta)
      if (!(d > 0.0 && d < 1.0)) throw ConfigError("schedule.delta", "delta must lie in (0,1)");
    require_strict("schedule.eps", cfg.eps, false);
    require_strict("schedule.n", cfg.n, true);
    require_strict("schedule.T", cfg.T, true);
    require_strict("schedule.eta", cfg.eta, true);
    s.reject_unknown();
  }
  {
    Section s(child(root, "caps"), "caps");
    s.integer("exact", cfg.exact_cap, 1);
    s.integer("enumeration", cfg.system.enumeration_cap, 1);
    s.integer("brute_limit", cfg.brute_limit, 1);
    s.reject_unknown();
  }
  {
    Section s(child(root, "pressure"), "pressure");
    std::string src = "hybrid";
    s.text("source", src);
    if (src == "brute")
      cfg.source = PressureSource::brute;
    else if (src == "oracle")
      cfg.source = PressureSource::oracle;
    else if (src == "hybrid")
      cfg.source = PressureSource::hybrid;
    else
      throw ConfigError("pressure.source", "expected brute, oracle or hybrid");
    s.reject_unknown();
  }
  {
    Section s(child(root, "root"), "root");
    s.text("phi", cfg.root_phi);
    s.text("psi", cfg.root_psi);
    s.number("tol", cfg.root_tol);
    if (!(cfg.root_tol > 0.0)) throw ConfigError("root.tol", "tolerance must be positive");
    s.reject_unknown();
  }
  {
    Section s(child(root, "subset"), "subset");
    if (auto v = s.get("structure")) {
      try {
        cfg.structure = parse_structure(*v);
      } catch (const Error&) {
        throw ConfigError("subset.structure", "unknown structure '" + *v + "'");
      }
    }
    s.integer("depth", cfg.subset_depth, 1);
    s.integer("N", cfg.subset_N, 1);
    s.integer("n_max", cfg.subset_n_max, 1);
    s.number("tol", cfg.subset_tol);
    s.flag("generic", cfg.subset_generic);
    if (cfg.subset_n_max < cfg.subset_N) throw ConfigError("subset.n_max", "n_max must be >= N");
    s.reject_unknown();
  }
  {
    Section s(child(root, "measure"), "measure");
    std::string kind = "product-uniform";
    s.text("kind", kind);
    if (kind == "product-uniform")
      cfg.measure = MeasureKind::product_uniform;
    else if (kind == "bernoulli")
      cfg.measure = MeasureKind::bernoulli;
    else
      throw ConfigError("measure.kind", "expected product-uniform or bernoulli");
    cfg.probabilities = s.numbers("probabilities");
    if (cfg.measure == MeasureKind::bernoulli && cfg.probabilities.empty())
      throw ConfigError("measure.probabilities", "bernoulli measure needs probabilities");
    s.reject_unknown();
  }
  {
    Section s(child(root, "entropy"), "entropy");
    s.text("quantity", cfg.quantity);
    std::string bound = "lower", method = "automatic";
    s.text("bound", bound);
    if (bound == "lower")
      cfg.bound = EntropyBound::lower;
    else if (bound == "upper")
      cfg.bound = EntropyBound::upper;
    else
      throw ConfigError("entropy.bound", "expected lower or upper");
    s.text("mass_method", method);
    if (method == "automatic")
      cfg.mass_method = MassMethod::automatic;
    else if (method == "frequency")
      cfg.mass_method = MassMethod::frequency;
    else if (method == "importance")
      cfg.mass_method = MassMethod::importance;
    else if (method == "exact")
      cfg.mass_method = MassMethod::exact;
    else
      throw ConfigError("entropy.mass_method", "unknown mass method '" + method + "'");
    s.text("potential", cfg.entropy_potential);
    s.integer("x_samples", cfg.x_samples, 1);
    s.integer("mass_samples", cfg.mass_samples, 1000);
    s.integer("katok_pool", cfg.katok_pool, 1);
    s.integer("katok_eval", cfg.katok_eval, 1);
    s.integer("dictionary_size", cfg.dictionary_size, 1);
    s.integer("bootstrap", cfg.bootstrap, 1);
    s.reject_unknown();
  }
  {
    Section s(child(root, "verify"), "verify");
    s.text("suite", cfg.suite);
    s.reject_unknown();
  }
  for (const auto& kv : root) {
    if (kv.first.rfind("potential:", 0) != 0) continue;
    const std::string name = kv.first.substr(10);
    if (name.empty()) throw ConfigError(kv.first, "potential needs a name");
    Section s(&kv.second, kv.first);
    cfg.potentials.emplace(name, parse_potential(s, name));
    s.reject_unknown();
  }

  if (!cfg.eps_min_given && !cfg.eps.empty()) cfg.system.eps_min = cfg.eps.back();
  try {
    (void)cfg.family().at(cfg.eps.empty() ? cfg.system.eps_min : cfg.eps.front());
  } catch (const ConfigError& e) {
    throw ConfigError("system." + e.key(), e.what());
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  return parse_config(in, path);
}

SystemFamily ExperimentConfig::family() const { return SystemFamily{system, grid_per_scale}; }

const Potential& ExperimentConfig::potential(const std::string& name, const std::string& key) const {
  auto it = potentials.find(name);
  if (it == potentials.end()) throw ConfigError(key, "no potential named '" + name + "'");
  return it->second;
}

MeasureModel ExperimentConfig::measure_on(const SystemModel& sys) const {
  if (measure == MeasureKind::bernoulli) {
    if (static_cast<int>(probabilities.size()) != sys.k())
      throw ConfigError("measure.probabilities", "need one probability per symbol");
    return MeasureModel::bernoulli(sys, probabilities);
  }
  return MeasureModel::product_uniform(sys);
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream o;
  o << "seed=" << seed << "\n";
  o << "system=" << to_string(system.kind) << "," << system.k << "," << to_string(system.sidedness)
    << "," << system.window << "," << to_string(system.symbol_metric) << ","
    << fmt(system.weight_base) << "," << fmt(system.eps_min) << "," << system.enumeration_cap
    << "," << grid_per_scale << "\n";
  for (const auto& [name, p] : potentials)
    o << "potential:" << name << "=" << p.range() << "," << p.k() << "," << join(p.table()) << "\n";
  o << "eps=" << join(eps) << "\nn=" << join(n) << "\nT=" << join(T) << "\ndelta=" << join(delta)
    << "\neta=" << join(eta) << "\n";
  o << "caps=" << exact_cap << "," << brute_limit << "\n";
  o << "source=" << static_cast<int>(source) << "\n";
  o << "root=" << root_phi << "," << root_psi << "," << fmt(root_tol) << "\n";
  o << "subset=" << to_string(structure) << "," << subset_depth << "," << subset_N << ","
    << subset_n_max << "," << fmt(subset_tol) << "," << subset_generic << "\n";
  o << "measure=" << to_string(measure) << "," << join(probabilities) << "\n";
  o << "entropy=" << quantity << "," << static_cast<int>(bound) << "," << entropy_potential << ","
    << x_samples << "," << mass_samples << "," << to_string(mass_method) << "," << katok_pool << ","
    << katok_eval << "," << dictionary_size << "," << bootstrap << "\n";
  o << "suite=" << suite << "\n";
  return o.str();
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::ostringstream o;
  o << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(cfg.canonical());
  return o.str();
}

}  // namespace mmdim::report
