#include "mmdim/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "mmdim/bowen.hpp"
#include "mmdim/caratheodory.hpp"
#include "mmdim/combinatorics.hpp"
#include "mmdim/error.hpp"
#include "mmdim/parallel.hpp"

namespace mmdim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> cumulative(const std::vector<double>& p) {
  std::vector<double> c(p.size());
  std::partial_sum(p.begin(), p.end(), c.begin());
  if (!c.empty()) c.back() = 1.0;
  return c;
}

std::size_t draw(const std::vector<double>& cum, Rng& rng) {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cum.begin(), cum.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cum.begin()), cum.size() - 1);
}

void check_probability(const std::vector<double>& p, const char* key) {
  double s = 0.0;
  for (double v : p) {
    if (!(v >= 0)) throw ConfigError(key, "probabilities must be nonnegative");
    s += v;
  }
  if (std::fabs(s - 1.0) > 1e-12) throw ConfigError(key, "probabilities must sum to 1");
}

}  // namespace

std::string to_string(MeasureKind k) {
  switch (k) {
    case MeasureKind::product_uniform: return "product-uniform";
    case MeasureKind::bernoulli: return "bernoulli";
    case MeasureKind::empirical: return "empirical";
  }
  return "unknown";
}

std::string to_string(MassMethod m) {
  switch (m) {
    case MassMethod::automatic: return "automatic";
    case MassMethod::frequency: return "frequency";
    case MassMethod::importance: return "importance";
    case MassMethod::exact: return "exact";
  }
  return "unknown";
}

// ---- MeasureModel ----

MeasureModel MeasureModel::product_uniform(const SystemModel& sys) {
  MeasureModel m(sys);
  m.kind_ = MeasureKind::product_uniform;
  m.probs_.assign(sys.k(), 1.0 / sys.k());
  m.cum_ = cumulative(m.probs_);
  return m;
}

MeasureModel MeasureModel::bernoulli(const SystemModel& sys, std::vector<double> p) {
  if (static_cast<int>(p.size()) != sys.k())
    throw ConfigError("probabilities", "need one probability per symbol");
  check_probability(p, "probabilities");
  MeasureModel m(sys);
  m.kind_ = MeasureKind::bernoulli;
  m.probs_ = std::move(p);
  m.cum_ = cumulative(m.probs_);
  return m;
}

MeasureModel MeasureModel::empirical(const SystemModel& sys, PointSet pts, std::vector<double> weights) {
  if (pts.empty()) throw ConfigError("points", "empirical measure needs at least one point");
  if (weights.empty()) weights.assign(pts.size(), 1.0);
  if (weights.size() != pts.size()) throw ConfigError("weights", "one weight per point");
  double s = 0.0;
  for (double w : weights) {
    if (!(w > 0)) throw ConfigError("weights", "empirical weights must be positive");
    s += w;
  }
  for (const auto& x : pts) sys.check_point(x);
  MeasureModel m(sys);
  m.kind_ = MeasureKind::empirical;
  m.pts_ = std::move(pts);
  for (double& w : weights) w /= s;
  m.weights_ = std::move(weights);
  m.wcum_ = cumulative(m.weights_);
  return m;
}

MeasureModel MeasureModel::point_mass(const SystemModel& sys, const PointWindow& x) {
  return empirical(sys, {x}, {1.0});
}

PointWindow MeasureModel::sample(Rng& rng) const {
  if (kind_ == MeasureKind::empirical) return pts_[draw(wcum_, rng)];
  PointWindow x;
  x.origin = sys_.origin();
  x.symbols.resize(sys_.length());
  for (auto& s : x.symbols) s = static_cast<std::uint16_t>(draw(cum_, rng));
  return x;
}

double MeasureModel::integral(const Potential& f) const {
  if (kind_ == MeasureKind::empirical) {
    double s = 0.0;
    for (std::size_t i = 0; i < pts_.size(); ++i) s += weights_[i] * f.eval(sys_, pts_[i], 0);
    return s;
  }
  if (f.is_constant()) return f.table()[0];
  const int k = sys_.k();
  double s = 0.0;
  for (std::size_t idx = 0; idx < f.table().size(); ++idx) {
    double p = 1.0;
    std::size_t rest = idx;
    for (int t = 0; t < f.range(); ++t) {
      p *= probs_[rest % k];
      rest /= k;
    }
    s += p * f.table()[idx];
  }
  return s;
}

// ---- bracket ----

MassBracket ball_mass_bracket(const MeasureModel& mu, const PointWindow& x, int n, double eps) {
  const SystemModel& sys = mu.system();
  sys.check_point(x);
  if (mu.kind() != MeasureKind::product_uniform)
    throw PreconditionError("mass bracket needs the uniform product measure");
  if (sys.params().symbol_metric != SymbolMetric::abs_diff || sys.params().weight_base != 0.5)
    throw PreconditionError("mass bracket needs absolute-difference symbols and weight base 1/2");
  if (!(eps > 0 && eps < 0.25)) throw PreconditionError("mass bracket needs 0 < eps < 1/4");
  const double k = sys.k();
  if (k * eps < 1.0 - 1e-12 || k * eps > 6.0 + 1e-12)
    throw PreconditionError("mass bracket needs 1/eps <= k <= 6/eps");
  if (n < 0) throw PreconditionError("order must be nonnegative");
  MassBracket b;
  b.r = static_cast<int>(std::ceil(std::log2(4.0 / eps) - 1e-12)) + 1;
  b.lower = std::pow(eps / 6.0, n + 2 * b.r);
  b.upper = n == 0 ? 1.0 : std::pow(4.0 * eps, n);
  return b;
}

// ---- ball geometry shared by the mass estimators ----

namespace {

struct Geometry {
  int n = 0;
  int L = 0;
  double budget = 0.0;         // d_j must stay strictly below this
  std::vector<int> order;      // window positions, nearest to the segment first
  std::vector<double> coef;    // coef[p*n + j]: weight of position p in d_j
};

Geometry geometry(const SystemModel& sys, int n, double eps) {
  if (n < 1) throw PreconditionError("bowen order must be at least 1");
  if (n > sys.window()) throw WindowExhausted("bowen order exceeds the window");
  Geometry g;
  g.n = n;
  g.L = sys.length();
  const int o = sys.origin();
  g.budget = eps - sys.tail_bound(n);
  g.coef.assign(static_cast<std::size_t>(g.L) * n, 0.0);
  for (int p = 0; p < g.L; ++p)
    for (int j = 0; j < n; ++j)
      if (p >= j) g.coef[p * n + j] = sys.weight(p - o - j);
  g.order.resize(g.L);
  std::iota(g.order.begin(), g.order.end(), 0);
  auto dist = [&](int p) { return p < o ? o - p : (p > o + n - 1 ? p - (o + n - 1) : 0); };
  std::stable_sort(g.order.begin(), g.order.end(), [&](int a, int b) { return dist(a) < dist(b); });
  return g;
}

// Symbols sorted by distance from each center symbol, with prefix sums of
// prior, prior*delta and prior*delta^2.
struct SymbolTable {
  int k = 0;
  std::vector<std::vector<int>> sym;
  std::vector<std::vector<double>> dl, p0, p1, p2;
};

SymbolTable symbol_table(const SystemModel& sys, const std::vector<double>& prior) {
  SymbolTable t;
  t.k = sys.k();
  t.sym.resize(t.k);
  t.dl.resize(t.k);
  t.p0.resize(t.k);
  t.p1.resize(t.k);
  t.p2.resize(t.k);
  for (int a = 0; a < t.k; ++a) {
    auto& s = t.sym[a];
    s.resize(t.k);
    std::iota(s.begin(), s.end(), 0);
    std::stable_sort(s.begin(), s.end(), [&](int u, int v) {
      return sys.symbol_distance(a, u) < sys.symbol_distance(a, v);
    });
    t.p0[a].assign(t.k + 1, 0.0);
    t.p1[a].assign(t.k + 1, 0.0);
    t.p2[a].assign(t.k + 1, 0.0);
    for (int i = 0; i < t.k; ++i) {
      const double d = sys.symbol_distance(a, s[i]);
      t.dl[a].push_back(d);
      t.p0[a][i + 1] = t.p0[a][i] + prior[s[i]];
      t.p1[a][i + 1] = t.p1[a][i] + prior[s[i]] * d;
      t.p2[a][i + 1] = t.p2[a][i] + prior[s[i]] * d * d;
    }
  }
  return t;
}

double bound_at(const Geometry& g, const std::vector<double>& S, int p) {
  double b = kInf;
  for (int j = 0; j < g.n; ++j) {
    const double c = g.coef[p * g.n + j];
    if (c > 0) b = std::min(b, (g.budget - S[j]) / c);
  }
  return b;
}

std::size_t feasible_count(const std::vector<double>& dl, double bnd) {
  return static_cast<std::size_t>(std::lower_bound(dl.begin(), dl.end(), bnd) - dl.begin());
}

double wilson_z(double confidence) {
  boost::math::normal nd;
  return boost::math::quantile(nd, 1.0 - (1.0 - confidence) / 2.0);
}

}  // namespace

double exact_ball_mass(const MeasureModel& mu, const PointWindow& x, int n, double eps,
                       std::size_t node_cap) {
  const SystemModel& sys = mu.system();
  sys.check_point(x);
  if (!mu.is_product()) {
    double s = 0.0;
    for (std::size_t i = 0; i < mu.points().size(); ++i)
      if (in_open_ball(sys, bowen_distance(sys, x, mu.points()[i], n), n, eps)) s += mu.weights()[i];
    return s;
  }
  const Geometry g = geometry(sys, n, eps);
  if (g.budget <= 0) return 0.0;
  const SymbolTable t = symbol_table(sys, mu.probs());
  const double maxd = sys.max_symbol_distance();
  // rest[idx*n + j]: largest possible contribution of positions order[idx..].
  std::vector<double> rest(static_cast<std::size_t>(g.L + 1) * n, 0.0);
  for (int idx = g.L - 1; idx >= 0; --idx)
    for (int j = 0; j < n; ++j)
      rest[idx * n + j] = rest[(idx + 1) * n + j] + g.coef[g.order[idx] * n + j] * maxd;
  std::size_t nodes = 0;
  std::vector<double> S(n, 0.0);
  std::function<double(int)> rec = [&](int idx) -> double {
    if (++nodes > node_cap) throw CapExceeded("exact ball mass exceeds the node cap");
    bool free = true;
    for (int j = 0; j < n && free; ++j) free = S[j] + rest[idx * n + j] < g.budget;
    if (free) return 1.0;
    const int p = g.order[idx];
    const int a = x.symbols[p];
    const std::size_t cnt = feasible_count(t.dl[a], bound_at(g, S, p));
    double sum = 0.0;
    for (std::size_t i = 0; i < cnt; ++i) {
      const double pr = mu.probs()[t.sym[a][i]];
      if (pr <= 0) continue;
      const double d = t.dl[a][i];
      for (int j = 0; j < n; ++j) S[j] += g.coef[p * n + j] * d;
      sum += pr * rec(idx + 1);
      for (int j = 0; j < n; ++j) S[j] -= g.coef[p * n + j] * d;
    }
    return sum;
  };
  return rec(0);
}

namespace {

MassEstimate frequency_mass(const MeasureModel& mu, const PointWindow& x, int n, double eps,
                            const MassOptions& opt, std::uint64_t seed) {
  const SystemModel& sys = mu.system();
  Rng rng(seed);
  MassEstimate e;
  e.method = MassMethod::frequency;
  e.samples = opt.samples;
  for (std::size_t i = 0; i < opt.samples; ++i) {
    const PointWindow y = mu.sample(rng);
    if (in_open_ball(sys, bowen_distance(sys, x, y, n), n, eps)) ++e.hits;
  }
  const double N = static_cast<double>(opt.samples);
  const double ph = e.hits / N;
  const double z = wilson_z(opt.confidence);
  const double den = 1.0 + z * z / N;
  const double center = (ph + z * z / (2 * N)) / den;
  const double half = z * std::sqrt(ph * (1 - ph) / N + z * z / (4 * N * N)) / den;
  e.value = ph;
  e.ci_lo = std::max(0.0, center - half);
  e.ci_hi = std::min(1.0, center + half);
  if (e.hits == 0) {
    e.zero_hits = true;
    e.ci_lo = 0.0;
  }
  return e;
}

MassEstimate importance_mass(const MeasureModel& mu, const PointWindow& x, int n, double eps,
                             const MassOptions& opt, std::uint64_t seed) {
  if (!mu.is_product()) throw PreconditionError("importance sampling needs a product measure");
  const SystemModel& sys = mu.system();
  const Geometry g = geometry(sys, n, eps);
  MassEstimate e;
  e.method = MassMethod::importance;
  e.samples = opt.samples;
  if (g.budget <= 0) {
    e.zero_hits = true;
    e.ci_lo = e.ci_hi = 0.0;
    return e;
  }
  const SymbolTable t = symbol_table(sys, mu.probs());
  const double maxd = sys.max_symbol_distance();
  const std::size_t k = static_cast<std::size_t>(sys.k());
  // rest[idx*n + j]: largest possible contribution of positions order[idx..].
  // Once every d_j stays below the budget whatever those positions hold, the
  // remaining draws come from the prior and carry weight 1.
  std::vector<double> rest(static_cast<std::size_t>(g.L + 1) * n, 0.0);
  for (int idx = g.L - 1; idx >= 0; --idx)
    for (int j = 0; j < n; ++j)
      rest[idx * n + j] = rest[(idx + 1) * n + j] + g.coef[g.order[idx] * n + j] * maxd;
  Rng rng(seed);
  std::vector<double> logw(opt.samples, 0.0);
  std::vector<double> S(n);
  for (std::size_t s = 0; s < opt.samples; ++s) {
    std::fill(S.begin(), S.end(), 0.0);
    // Likelihood ratios multiply into `w`; one log per sample.
    double w = 1.0;
    for (int idx = 0; idx < g.L; ++idx) {
      bool free = true;
      for (int j = 0; j < n && free; ++j) free = S[j] + rest[idx * n + j] < g.budget;
      if (free) break;
      const int p = g.order[idx];
      const int a = x.symbols[p];
      const double bnd = bound_at(g, S, p);
      const std::size_t cnt = feasible_count(t.dl[a], bnd);
      const std::vector<double>& P0 = t.p0[a];
      if (cnt == 0 || P0[cnt] <= 0) {
        w = 0.0;
        break;
      }
      std::size_t pick;
      if (cnt == k && bnd >= 4 * maxd) {
        const double u = rng.uniform() * P0[cnt];
        pick = static_cast<std::size_t>(std::upper_bound(P0.begin() + 1, P0.begin() + cnt + 1, u) - P0.begin() - 1);
      } else {
        // Defensive mixture: half the prior restricted to the feasible
        // symbols, half the same tilted by (1 - d/bnd)^2 towards the center.
        // The likelihood ratio stays below 2 * p0 per coordinate.
        const std::vector<double>& P1 = t.p1[a];
        const std::vector<double>& P2 = t.p2[a];
        const double ib = 1.0 / bnd;
        auto tilted = [&](std::size_t i) { return P0[i] - 2 * P1[i] * ib + P2[i] * ib * ib; };
        const double p0 = P0[cnt];
        const double Z = tilted(cnt);
        const bool prior = rng.uniform() < 0.5;
        const double u = rng.uniform() * (prior ? p0 : Z);
        // Smallest i with cdf(i + 1) > u.
        std::size_t lo = 0, hi = cnt - 1;
        while (lo < hi) {
          const std::size_t mid = (lo + hi) / 2;
          if ((prior ? P0[mid + 1] : tilted(mid + 1)) > u) hi = mid;
          else lo = mid + 1;
        }
        pick = lo;
        const double r = 1.0 - t.dl[a][pick] * ib;
        w /= 0.5 / p0 + 0.5 * r * r / Z;
      }
      const double d = t.dl[a][pick];
      if (d > 0)
        for (int j = 0; j < n; ++j) S[j] += g.coef[p * n + j] * d;
    }
    const double lw = w > 0 ? std::log(w) : -kInf;
    logw[s] = lw;
  }
  double top = -kInf;
  for (double v : logw) top = std::max(top, v);
  if (top == -kInf) {
    e.zero_hits = true;
    e.ci_lo = e.ci_hi = 0.0;
    return e;
  }
  std::vector<double> w(opt.samples);
  for (std::size_t s = 0; s < opt.samples; ++s) {
    w[s] = std::exp(logw[s] - top);
    if (w[s] > 0) ++e.hits;
  }
  const double N = static_cast<double>(opt.samples);
  const double mean = std::accumulate(w.begin(), w.end(), 0.0) / N;
  // Batch-means bootstrap: resample at most kBatches batch sums instead of
  // every draw. Batch sizes differ by at most one.
  constexpr std::size_t kBatches = 1000;
  const std::size_t nb = std::min(kBatches, opt.samples);
  std::vector<double> bsum(nb, 0.0), bcount(nb, 0.0);
  for (std::size_t s = 0; s < opt.samples; ++s) {
    bsum[s % nb] += w[s];
    bcount[s % nb] += 1.0;
  }
  std::vector<double> boots(opt.bootstrap);
  Rng brng(seed, 0xB0075);
  for (int b = 0; b < opt.bootstrap; ++b) {
    double acc = 0.0, cnt = 0.0;
    for (std::size_t i = 0; i < nb; ++i) {
      const std::size_t r = brng.below(nb);
      acc += bsum[r];
      cnt += bcount[r];
    }
    boots[b] = acc / cnt;
  }
  std::sort(boots.begin(), boots.end());
  const double tail = (1.0 - opt.confidence) / 2.0;
  const std::size_t B = boots.size();
  const std::size_t lo = std::min(B - 1, static_cast<std::size_t>(std::floor(tail * B)));
  const std::size_t hi = std::min(B - 1, static_cast<std::size_t>(std::ceil((1.0 - tail) * B)) - 1);
  const double scale = std::exp(top);
  e.value = mean * scale;
  e.ci_lo = boots[lo] * scale;
  e.ci_hi = boots[hi] * scale;
  return e;
}

}  // namespace

MassEstimate estimate_ball_mass(const MeasureModel& mu, const PointWindow& x, int n, double eps,
                                const MassOptions& opt, std::uint64_t seed) {
  mu.system().check_point(x);
  if (opt.method == MassMethod::frequency || opt.method == MassMethod::importance) {
    if (opt.samples < 1000) throw ConfigError("samples", "need at least 1000 samples");
    if (opt.bootstrap < 1) throw ConfigError("bootstrap", "need at least one resample");
  }
  switch (opt.method) {
    case MassMethod::frequency: return frequency_mass(mu, x, n, eps, opt, seed);
    case MassMethod::importance: return importance_mass(mu, x, n, eps, opt, seed);
    case MassMethod::exact:
    case MassMethod::automatic: {
      try {
        MassEstimate e;
        e.method = MassMethod::exact;
        e.value = exact_ball_mass(mu, x, n, eps, opt.exact_node_cap);
        e.ci_lo = e.ci_hi = e.value;
        e.zero_hits = e.value <= 0;
        return e;
      } catch (const CapExceeded&) {
        if (opt.method == MassMethod::exact) throw;
      }
      return importance_mass(mu, x, n, eps, opt, seed);
    }
  }
  throw PreconditionError("unknown mass method");
}

// ---- local entropies ----

namespace {

std::pair<double, double> bootstrap_mean(const std::vector<double>& v, int resamples,
                                         double confidence, std::uint64_t seed) {
  if (v.empty()) return {0.0, 0.0};
  Rng rng(seed, 0xC1);
  std::vector<double> m(resamples);
  for (int b = 0; b < resamples; ++b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += v[rng.below(v.size())];
    m[b] = acc / v.size();
  }
  std::sort(m.begin(), m.end());
  const double tail = (1.0 - confidence) / 2.0;
  const std::size_t B = m.size();
  const std::size_t lo = std::min(B - 1, static_cast<std::size_t>(std::floor(tail * B)));
  const std::size_t hi = std::min(B - 1, static_cast<std::size_t>(std::ceil((1.0 - tail) * B)) - 1);
  return {m[lo], m[hi]};
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

}  // namespace

EntropyEstimate bs_entropy(const MeasureModel& mu, const Potential& phi, double eps,
                           EntropyBound bound, const EntropyOptions& opt) {
  if (!(phi.inf() > 0)) throw PreconditionError("BS entropy needs phi > 0");
  if (opt.n_schedule.size() < 2) throw ConfigError("n", "entropy needs at least two orders");
  for (std::size_t i = 1; i < opt.n_schedule.size(); ++i)
    if (opt.n_schedule[i] <= opt.n_schedule[i - 1])
      throw ConfigError("n", "order schedule must be strictly increasing");
  if (opt.x_samples < 1) throw ConfigError("x_samples", "need at least one center");
  const SystemModel& sys = mu.system();
  const std::size_t X = opt.x_samples, S = opt.n_schedule.size();
  struct PerX {
    std::vector<double> y, s;
    std::vector<int> used;
    std::vector<BallMassRecord> balls;
    bool exact = true;
    bool dropped = false;
  };
  std::vector<PerX> per(X);
  parallel_for(X, [&](std::size_t i) {
    Rng rng(opt.seed, i);
    const PointWindow x = mu.sample(rng);
    PerX& r = per[i];
    for (std::size_t t = 0; t < S; ++t) {
      const int n = opt.n_schedule[t];
      const MassEstimate m =
          estimate_ball_mass(mu, x, n, eps, opt.mass, mix_seed(opt.seed, 0x100000 + i * 1024 + t));
      r.exact = r.exact && m.method == MassMethod::exact;
      r.balls.push_back({x, n, m});
      if (!(m.value > 0)) {
        r.dropped = true;
        continue;
      }
      r.y.push_back(-std::log(m.value));
      r.s.push_back(birkhoff_sum(sys, phi, x, n));
      r.used.push_back(n);
    }
  });
  EntropyEstimate est;
  est.quantity = phi.is_constant() && phi.table()[0] == 1.0 ? "BK" : "BS";
  std::vector<double> lows, ups, slopes;
  std::map<int, std::vector<double>> ratio;
  bool dropped = false;
  for (const auto& r : per) {
    est.exact = est.exact && r.exact;
    dropped = dropped || r.dropped;
    est.balls.insert(est.balls.end(), r.balls.begin(), r.balls.end());
    for (std::size_t t = 0; t < r.used.size(); ++t) ratio[r.used[t]].push_back(r.y[t] / r.s[t]);
    if (r.used.size() < 2) continue;
    std::vector<double> inc;
    for (std::size_t t = 1; t < r.used.size(); ++t)
      inc.push_back((r.y[t] - r.y[t - 1]) / (r.s[t] - r.s[t - 1]));
    const std::size_t start = inc.size() / 2;
    lows.push_back(*std::min_element(inc.begin() + start, inc.end()));
    ups.push_back(*std::max_element(inc.begin() + start, inc.end()));
    slopes.push_back(fit_line(r.s, r.y).slope);
  }
  if (lows.empty()) throw Error("ball masses vanished at every order; shrink the order schedule");
  if (dropped) est.flags = "zero-mass orders dropped";
  for (const auto& [n, v] : ratio) est.per_scale.emplace_back(n, mean_of(v));
  est.lower = mean_of(lows);
  est.upper = mean_of(ups);
  est.extrapolated = mean_of(slopes);
  est.value = bound == EntropyBound::lower ? est.lower : est.upper;
  const auto ci = bootstrap_mean(bound == EntropyBound::lower ? lows : ups, opt.bootstrap,
                                 opt.mass.confidence, opt.seed);
  est.ci_lo = ci.first;
  est.ci_hi = ci.second;
  return est;
}

EntropyEstimate brin_katok(const MeasureModel& mu, double eps, EntropyBound bound,
                           const EntropyOptions& opt) {
  return bs_entropy(mu, Potential::constant(1.0), eps, bound, opt);
}

// ---- Katok ----

namespace {

// Greedy mass cover over a coverage matrix. Returns the gains in pick order.
std::vector<double> greedy_gains(const std::vector<Bits>& cover, const std::vector<double>& mass) {
  const std::size_t E = mass.size();
  Bits covered(E);
  auto gain_of = [&](std::size_t c) {
    double g = 0.0;
    for (std::size_t e = cover[c].find_first(); e != Bits::npos; e = cover[c].find_next(e))
      if (!covered.test(e)) g += mass[e];
    return g;
  };
  using Item = std::pair<double, std::size_t>;
  auto cmp = [](const Item& a, const Item& b) {
    return a.first < b.first || (a.first == b.first && a.second > b.second);
  };
  std::priority_queue<Item, std::vector<Item>, decltype(cmp)> pq(cmp);
  for (std::size_t c = 0; c < cover.size(); ++c) pq.push({gain_of(c), c});
  std::vector<double> gains;
  while (!pq.empty()) {
    auto [g, c] = pq.top();
    pq.pop();
    const double fresh = gain_of(c);
    if (fresh <= 0) continue;
    if (!pq.empty() && fresh < pq.top().first) {
      pq.push({fresh, c});
      continue;
    }
    gains.push_back(fresh);
    covered |= cover[c];
  }
  return gains;
}

struct CylinderClass {
  double mass;
  double count;
};

std::vector<CylinderClass> cylinder_classes(const std::vector<double>& p, int n) {
  const int k = static_cast<int>(p.size());
  bool uniform = true;
  for (double v : p) uniform = uniform && v == p[0];
  if (uniform) return {{std::pow(p[0], n), std::pow(static_cast<double>(k), n)}};
  std::vector<CylinderClass> out;
  std::vector<int> c(k, 0);
  std::size_t visited = 0;
  std::function<void(int, int)> rec = [&](int a, int left) {
    if (++visited > 2000000) throw CapExceeded("too many cylinder classes");
    if (a == k - 1) {
      c[a] = left;
      double lm = std::lgamma(n + 1.0), lp = 0.0;
      bool zero = false;
      for (int s = 0; s < k; ++s) {
        lm -= std::lgamma(c[s] + 1.0);
        if (c[s] > 0) {
          if (p[s] <= 0) zero = true;
          else lp += c[s] * std::log(p[s]);
        }
      }
      if (!zero) out.push_back({std::exp(lp), std::round(std::exp(lm))});
      return;
    }
    for (int v = 0; v <= left; ++v) {
      c[a] = v;
      rec(a + 1, left - v);
    }
  };
  rec(0, n);
  return out;
}

KatokResult katok_factorized(const MeasureModel& mu, int n, double eps, double delta,
                             const KatokOptions& opt) {
  const SystemModel& sys = mu.system();
  const Geometry g = geometry(sys, n, eps);
  if (g.budget <= 0) throw PreconditionError("radius below the truncation tail");
  const int o = sys.origin();
  std::vector<int> bpos;
  for (int p : g.order)
    if (p < o || p > o + n - 1) bpos.push_back(p);
  const std::size_t B = bpos.size();
  const int k = sys.k();
  const auto& prior = mu.probs();

  std::vector<std::vector<std::uint16_t>> words, centers;
  std::vector<double> mass;
  bool enumerated = false;
  const double space = std::pow(static_cast<double>(k), static_cast<double>(B));
  if (space <= static_cast<double>(opt.boundary_enum_cap)) {
    enumerated = true;
    const std::size_t total = static_cast<std::size_t>(space);
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::vector<std::uint16_t> w(B);
      std::size_t rest = idx;
      double m = 1.0;
      for (std::size_t b = 0; b < B; ++b) {
        w[b] = static_cast<std::uint16_t>(rest % k);
        rest /= k;
        m *= prior[w[b]];
      }
      if (m <= 0) continue;
      words.push_back(std::move(w));
      mass.push_back(m);
    }
    centers = words;
  } else {
    Rng rng(opt.seed, 0xCA70);
    auto draw_word = [&] {
      const PointWindow x = mu.sample(rng);
      std::vector<std::uint16_t> w(B);
      for (std::size_t b = 0; b < B; ++b) w[b] = x.symbols[bpos[b]];
      return w;
    };
    for (std::size_t i = 0; i < opt.eval_samples; ++i) words.push_back(draw_word());
    mass.assign(words.size(), 1.0 / words.size());
    for (std::size_t i = 0; i < opt.pool; ++i) centers.push_back(draw_word());
    std::sort(centers.begin(), centers.end());
    centers.erase(std::unique(centers.begin(), centers.end()), centers.end());
  }
  std::vector<Bits> cover(centers.size(), Bits(words.size()));
  std::vector<double> S(n);
  for (std::size_t c = 0; c < centers.size(); ++c)
    for (std::size_t e = 0; e < words.size(); ++e) {
      std::fill(S.begin(), S.end(), 0.0);
      bool in = true;
      for (std::size_t b = 0; b < B && in; ++b) {
        const double d = sys.symbol_distance(centers[c][b], words[e][b]);
        if (d == 0) continue;
        for (int j = 0; j < n; ++j) {
          S[j] += g.coef[bpos[b] * n + j] * d;
          if (!(S[j] < g.budget)) in = false;
        }
      }
      if (in) cover[c].set(e);
    }
  const std::vector<double> gains = greedy_gains(cover, mass);
  const auto classes = cylinder_classes(prior, n);
  struct Item {
    double value, count;
  };
  std::vector<Item> items;
  for (const auto& cl : classes)
    for (double gn : gains) items.push_back({cl.mass * gn, cl.count});
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.value > b.value; });
  KatokResult res;
  res.factorized = true;
  const double need = 1.0 - delta;
  for (const auto& it : items) {
    if (res.covered_mass + it.count * it.value > need) {
      double t = std::floor((need - res.covered_mass) / it.value) + 1.0;
      t = std::min(t, it.count);
      res.count += t;
      res.covered_mass += t * it.value;
      break;
    }
    res.count += it.count;
    res.covered_mass += it.count * it.value;
  }
  if (!(res.covered_mass > need))
    throw CapExceeded("candidate pool cannot reach mass 1 - delta; enlarge the pool");
  res.exact = enumerated && gains.size() == 1 && classes.size() == 1;
  return res;
}

KatokResult katok_general(const MeasureModel& mu, int n, double eps, double delta,
                          const KatokOptions& opt) {
  const SystemModel& sys = mu.system();
  PointSet pool, evalp;
  std::vector<double> mass;
  if (!mu.is_product()) {
    evalp = mu.points();
    mass = mu.weights();
    pool = mu.points();
  } else {
    Rng rng(opt.seed, 0xE7A1);
    for (std::size_t i = 0; i < opt.eval_samples; ++i) evalp.push_back(mu.sample(rng));
    mass.assign(evalp.size(), 1.0 / evalp.size());
    Rng prng(opt.seed, 0x9001);
    for (std::size_t i = 0; i < opt.pool; ++i) pool.push_back(mu.sample(prng));
  }
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  std::vector<Bits> cover(pool.size(), Bits(evalp.size()));
  for (std::size_t c = 0; c < pool.size(); ++c)
    for (std::size_t e = 0; e < evalp.size(); ++e)
      if (in_open_ball(sys, bowen_distance(sys, pool[c], evalp[e], n), n, eps)) cover[c].set(e);
  const double need = 1.0 - delta;
  KatokResult res;
  if (pool.size() <= opt.exact_cap) {
    const std::size_t P = pool.size();
    std::size_t best = P + 1;
    double best_mass = 0.0;
    for (std::uint32_t mask = 1; mask < (1u << P); ++mask) {
      const std::size_t c = static_cast<std::size_t>(__builtin_popcount(mask));
      if (c >= best) continue;
      Bits u(evalp.size());
      for (std::size_t i = 0; i < P; ++i)
        if (mask >> i & 1u) u |= cover[i];
      double m = 0.0;
      for (std::size_t e = u.find_first(); e != Bits::npos; e = u.find_next(e)) m += mass[e];
      if (m > need) {
        best = c;
        best_mass = m;
      }
    }
    if (best > P) throw CapExceeded("candidate pool cannot reach mass 1 - delta; enlarge the pool");
    res.count = static_cast<double>(best);
    res.covered_mass = best_mass;
    res.exact = !mu.is_product();
    return res;
  }
  for (double gn : greedy_gains(cover, mass)) {
    res.count += 1;
    res.covered_mass += gn;
    if (res.covered_mass > need) return res;
  }
  throw CapExceeded("candidate pool cannot reach mass 1 - delta; enlarge the pool");
}

}  // namespace

KatokResult katok_rn(const MeasureModel& mu, int n, double eps, double delta, const KatokOptions& opt) {
  if (!(delta > 0 && delta < 1)) throw ConfigError("delta", "delta must lie in (0, 1)");
  if (!(eps > 0)) throw ConfigError("eps", "radius must be positive");
  if (mu.is_product() && mu.system().min_symbol_gap() >= eps)
    return katok_factorized(mu, n, eps, delta, opt);
  return katok_general(mu, n, eps, delta, opt);
}

EntropyEstimate katok_entropy(const MeasureModel& mu, double eps, double delta,
                              const std::vector<int>& n_schedule, const KatokOptions& opt) {
  if (n_schedule.size() < 2) throw ConfigError("n", "entropy needs at least two orders");
  EntropyEstimate est;
  est.quantity = "Katok";
  std::vector<double> xs, ys;
  for (int n : n_schedule) {
    const KatokResult r = katok_rn(mu, n, eps, delta, opt);
    est.exact = est.exact && r.exact;
    xs.push_back(n);
    ys.push_back(std::log(r.count));
    est.per_scale.emplace_back(n, ys.back());
  }
  const LinearFit f = fit_line(xs, ys);
  est.value = est.extrapolated = f.slope;
  est.lower = est.upper = f.slope;
  est.ci_lo = est.ci_hi = f.slope;
  return est;
}

// ---- generic points and PS ----

std::vector<Potential> default_dictionary(const SystemModel& sys, std::size_t size) {
  std::vector<Potential> d;
  for (int a = 0; a < sys.k() && d.size() < size; ++a) {
    std::vector<double> t(sys.k(), 0.0);
    t[a] = 1.0;
    d.push_back(Potential::coordinate(t));
  }
  return d;
}

bool generic_point_test(const SystemModel& sys, const PointWindow& x, const MeasureModel& mu, int n,
                        double tol, const std::vector<Potential>& dictionary) {
  if (n < 1) throw PreconditionError("generic test needs n >= 1");
  for (const auto& f : dictionary) {
    const double avg = birkhoff_sum(sys, f, x, n) / n;
    if (std::fabs(avg - mu.integral(f)) > tol + 1e-12) return false;
  }
  return true;
}

EntropyEstimate ps_entropy(const MeasureModel& mu, double eps, double eta, const PsOptions& opt) {
  if (opt.n_schedule.size() < 2) throw ConfigError("n", "entropy needs at least two orders");
  const SystemModel& sys = mu.system();
  const auto dict = default_dictionary(sys, opt.dictionary_size);
  EntropyEstimate est;
  est.quantity = "PS";
  std::vector<double> xs, ys;
  std::ostringstream flags;
  for (int n : opt.n_schedule) {
    const PointSet all = sys.enumerate_points(n);
    PointSet z;
    for (const auto& w : all)
      if (generic_point_test(sys, w, mu, n, eta, dict)) z.push_back(w);
    if (z.empty()) {
      flags << "empty generic set at n=" << n << "; ";
      est.per_scale.emplace_back(n, -kInf);
      continue;
    }
    const bool exact = z.size() <= opt.exact_cap;
    const SeparatedResult r =
        max_separated(sys, z, n, eps, exact ? SearchMode::exact : SearchMode::greedy, opt.exact_cap);
    est.exact = est.exact && r.exact;
    xs.push_back(n);
    ys.push_back(std::log(static_cast<double>(r.indices.size())));
    est.per_scale.emplace_back(n, ys.back());
  }
  est.flags = flags.str();
  if (xs.size() < 2) {
    est.value = est.extrapolated = std::numeric_limits<double>::quiet_NaN();
    est.flags += "fewer than two usable orders";
    return est;
  }
  const LinearFit f = fit_line(xs, ys);
  est.value = est.extrapolated = est.lower = est.upper = f.slope;
  est.ci_lo = est.ci_hi = f.slope;
  return est;
}

PsScan ps_entropy_scan(const MeasureModel& mu, double eps, std::vector<double> etas,
                       const PsOptions& opt) {
  std::sort(etas.begin(), etas.end());
  PsScan scan;
  for (double eta : etas) {
    EntropyEstimate e = ps_entropy(mu, eps, eta, opt);
    if (!scan.found && e.flags.empty()) {
      scan.found = true;
      scan.inf_eta = eta;
      scan.inf_value = e.value;
    }
    scan.per_eta.emplace_back(eta, std::move(e));
  }
  return scan;
}

GmuEstimate gmu_mdim_estimate(const SystemFamily& family,
                              const std::function<MeasureModel(const SystemModel&)>& measure_of,
                              const std::vector<double>& eps_schedule, const GmuOptions& opt) {
  if (eps_schedule.size() < 3) throw ConfigError("eps", "estimate needs at least three scales");
  const std::size_t E = eps_schedule.size();
  std::vector<double> ps(E), kat(E), bkl(E), bku(E), sub(E);
  GmuEstimate out;
  out.generic_counts.resize(E);
  std::vector<char> ex(E, 1);
  for (std::size_t i = 0; i < E; ++i) {
    const double eps = eps_schedule[i];
    const SystemModel sys = family.at(eps);
    const MeasureModel mu = measure_of(sys);
    EntropyOptions bko = opt.bk;
    const EntropyEstimate bk = brin_katok(mu, eps, EntropyBound::lower, bko);
    bkl[i] = bk.lower;
    bku[i] = bk.upper;
    kat[i] = katok_entropy(mu, eps, opt.delta, opt.n_schedule, opt.katok).value;
    PsOptions pso = opt.ps;
    pso.n_schedule = opt.n_schedule;
    const EntropyEstimate pe = ps_entropy(mu, eps, opt.tol, pso);
    if (!pe.flags.empty()) throw Error("generic sets empty at eps=" + std::to_string(eps) + ": " + pe.flags);
    ps[i] = pe.value;

    const auto dict = default_dictionary(sys, opt.ps.dictionary_size);
    PointSet z;
    for (const auto& w : sys.enumerate_points(opt.subset_depth))
      if (generic_point_test(sys, w, mu, opt.subset_depth, opt.tol, dict)) z.push_back(w);
    if (z.empty()) throw Error("no generic words for the subset estimate at eps=" + std::to_string(eps));
    out.generic_counts[i] = z.size();
    OuterMeasureProblem p{sys, z, {}, Potential::constant(0.0)};
    p.N = opt.subset_N;
    p.n_max = opt.subset_n_max;
    p.eps = eps;
    bool exact = true;
    const CriticalValue cv = critical_lambda(
        [&](double l) {
          OuterMeasureProblem q = p;
          q.lambda = l;
          const ValueResult v = cover_value(q);
          exact = exact && v.exact;
          return v.value;
        },
        1e-6);
    sub[i] = cv.lambda;
    ex[i] = exact;
  }
  out.ps = fit_dimension(eps_schedule, ps, {});
  out.katok = fit_dimension(eps_schedule, kat, {});
  out.bk_lower = fit_dimension(eps_schedule, bkl, {});
  out.bk_upper = fit_dimension(eps_schedule, bku, {});
  out.bowen_subset = fit_dimension(eps_schedule, sub, {});
  out.bowen_subset.exact = std::all_of(ex.begin(), ex.end(), [](char c) { return c != 0; });
  return out;
}

}  // namespace mmdim
