#include "mmdim/pressure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mmdim/error.hpp"
#include "mmdim/parallel.hpp"

namespace mmdim {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

std::string to_string(WitnessKind w) {
  switch (w) {
    case WitnessKind::separated_exact: return "separated-exact";
    case WitnessKind::separated_greedy: return "separated-greedy";
    case WitnessKind::spanning_exact: return "spanning-exact";
    case WitnessKind::spanning_greedy: return "spanning-greedy";
    case WitnessKind::analytic_oracle: return "analytic-oracle";
  }
  return "unknown";
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw PreconditionError("fit needs at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0)) throw PreconditionError("degenerate fit: all abscissae are equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.slope * x[i] + f.intercept);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

double log_sum_exp(const std::vector<double>& terms) {
  double m = kNegInf;
  for (double t : terms) m = std::max(m, t);
  if (m == kNegInf) return kNegInf;
  if (std::isinf(m)) return m;
  double s = 0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

DimensionEstimate fit_dimension(const std::vector<double>& eps, const std::vector<double>& values,
                                const std::vector<double>& inner) {
  for (std::size_t i = 1; i < eps.size(); ++i)
    if (!(eps[i] < eps[i - 1])) throw ConfigError("eps", "eps schedule must be strictly decreasing");
  DimensionEstimate d;
  d.eps_schedule = eps;
  d.inner_schedule = inner;
  d.per_eps = values;
  std::vector<double> x;
  for (double e : eps) x.push_back(std::log(1.0 / e));
  const LinearFit f = fit_line(x, values);
  d.slope = f.slope;
  d.intercept = f.intercept;
  d.residual = f.residual;
  d.max_ratio = kNegInf;
  for (std::size_t i = 0; i < eps.size(); ++i) d.max_ratio = std::max(d.max_ratio, values[i] / x[i]);
  return d;
}

int grid_size_for(double eps) {
  if (!(eps > 0)) throw ConfigError("eps", "radius must be positive");
  return static_cast<int>(std::ceil(1.0 / eps - 1e-9));
}

SystemModel SystemFamily::at(double eps) const {
  SystemParams p = base;
  if (grid_per_scale) p.k = grid_size_for(eps);
  return SystemModel(p);
}

double pressure_sum(const SystemModel& sys, const PointSet& f, const Potential& phi, int n,
                    double eps) {
  std::vector<double> terms;
  terms.reserve(f.size());
  const double le = std::log(1.0 / eps);
  for (const auto& x : f) terms.push_back(birkhoff_sum(sys, phi, x, n) * le);
  return log_sum_exp(terms);
}

// ---- oracle ----

OracleBracket analytic_oracle(const SystemModel& sys, const Potential& phi, double eps) {
  if (phi.range() > 1) throw PreconditionError("oracle needs a potential of range at most 1");
  if (!(eps > 0)) throw PreconditionError("radius must be positive");
  const int k = sys.k();
  const double le = std::log(1.0 / eps);
  std::vector<double> v(k);
  for (int a = 0; a < k; ++a)
    v[a] = (phi.is_constant() ? phi.table()[0] : phi.table()[a]) * le;
  OracleBracket b;
  b.upper_rate = log_sum_exp(v);
  // Heaviest sub-alphabet whose symbols are pairwise at distance >= eps; such
  // words are separated through the coordinate where they differ.
  if (sys.params().symbol_metric == SymbolMetric::discrete) {
    b.lower_rate = eps <= 1.0 ? b.upper_rate : *std::max_element(v.begin(), v.end());
  } else {
    const int gap = std::max(1, static_cast<int>(std::ceil(eps * k - 1e-9)));
    std::vector<double> best(k, kNegInf);
    for (int i = 0; i < k; ++i) {
      const double skip = i > 0 ? best[i - 1] : kNegInf;
      const double take = i >= gap ? log_sum_exp({v[i], best[i - gap]}) : v[i];
      best[i] = std::max(skip, take);
    }
    b.lower_rate = best[k - 1];
  }
  b.exact_on_words = sys.min_symbol_gap() >= eps;
  // Points agreeing on the r coordinates beyond each end of [0,n) are within
  // eps at every step j < n, so a separated set has at most k^R of them per
  // word on [0,n).
  const double w = sys.params().weight_base;
  const double sides = sys.two_sided() ? 2.0 : 1.0;
  int r = 0;
  while (sys.max_symbol_distance() * sides * std::pow(w, r + 1) / (1.0 - w) >= eps) ++r;
  b.boundary_coords = static_cast<int>(sides) * r;
  b.upper_offset = b.boundary_coords * std::log(static_cast<double>(k));
  return b;
}

// ---- records ----

namespace {

struct Witness {
  double log_sum = kNegInf;
  std::vector<std::size_t> indices;
  std::vector<double> log_weights;  // per point of the universe
  bool exact = false;
};

Witness separated_witness(const SystemModel& sys, const PointSet& z, const Potential& phi, int n,
                          double eps, std::size_t exact_cap) {
  Witness w;
  if (z.empty()) {
    w.exact = true;
    return w;
  }
  const double le = std::log(1.0 / eps);
  double top = kNegInf;
  for (const auto& x : z) {
    w.log_weights.push_back(birkhoff_sum(sys, phi, x, n) * le);
    top = std::max(top, w.log_weights.back());
  }
  std::vector<double> scaled;
  for (double lw : w.log_weights) scaled.push_back(std::max(std::exp(lw - top), 1e-300));
  const bool exact = z.size() <= exact_cap && z.size() <= 64;
  SeparatedResult r = max_separated(sys, z, n, eps, exact ? SearchMode::exact : SearchMode::greedy,
                                    exact_cap, &scaled);
  w.indices = r.indices;
  w.exact = r.exact;
  std::vector<double> terms;
  for (std::size_t i : r.indices) terms.push_back(w.log_weights[i]);
  w.log_sum = log_sum_exp(terms);
  return w;
}

}  // namespace

PressureRecord pressure_record(const SystemModel& sys, const Potential& phi, int n, double eps,
                               const PressureOptions& opt) {
  PressureRecord rec;
  rec.n = n;
  rec.eps = eps;
  const double kn = std::pow(static_cast<double>(sys.k()), n);
  bool use_brute = opt.source == PressureSource::brute ||
                   (opt.source == PressureSource::hybrid && kn <= static_cast<double>(opt.brute_limit));
  if (use_brute) {
    const PointSet z = sys.enumerate_points(n);
    Witness w = separated_witness(sys, z, phi, n, eps, opt.exact_cap);
    rec.log_sum = w.log_sum;
    rec.witness = w.exact ? WitnessKind::separated_exact : WitnessKind::separated_greedy;
    if (opt.source == PressureSource::hybrid) {
      const OracleBracket b = analytic_oracle(sys, phi, eps);
      const double tol = 1e-9 * std::max(1.0, std::fabs(w.log_sum));
      const bool ok = b.exact_on_words && w.exact ? std::fabs(w.log_sum - n * b.lower_rate) <= tol
                                                  : w.log_sum <= n * b.upper_rate + b.upper_offset + tol;
      if (!ok) {
        std::ostringstream os;
        os << "oracle disagrees with brute force at n=" << n << " eps=" << eps << ": brute "
           << w.log_sum << " vs oracle rate " << b.lower_rate;
        throw Error(os.str());
      }
    }
    return rec;
  }
  const OracleBracket b = analytic_oracle(sys, phi, eps);
  rec.log_sum = n * (b.exact_on_words ? b.lower_rate : b.midpoint());
  rec.witness = WitnessKind::analytic_oracle;
  return rec;
}

PressureEstimate pressure_estimate(const SystemModel& sys, const Potential& phi, double eps,
                                   const std::vector<int>& n_schedule, const PressureOptions& opt) {
  PressureEstimate est;
  std::vector<double> xs, ys;
  est.max_ratio = kNegInf;
  for (int n : n_schedule) {
    PressureRecord r = pressure_record(sys, phi, n, eps, opt);
    est.records.push_back(r);
    if (r.witness == WitnessKind::separated_greedy || r.witness == WitnessKind::spanning_greedy)
      est.exact = false;
    if (r.witness == WitnessKind::analytic_oracle &&
        !analytic_oracle(sys, phi, eps).exact_on_words)
      est.exact = false;
    if (std::isfinite(r.log_sum)) {
      xs.push_back(n);
      ys.push_back(r.log_sum);
      est.max_ratio = std::max(est.max_ratio, r.log_sum / n);
    }
  }
  if (xs.size() < 2) throw PreconditionError("pressure estimate needs at least two usable n values");
  est.fit = fit_line(xs, ys);
  est.slope = est.fit.slope;
  return est;
}

DimensionEstimate mdim_estimate(const SystemFamily& family, const Potential& phi,
                                const std::vector<double>& eps_schedule,
                                const std::vector<int>& n_schedule, const PressureOptions& opt) {
  if (eps_schedule.size() < 3) throw ConfigError("eps", "mdim estimate needs at least three scales");
  std::vector<double> values(eps_schedule.size());
  std::vector<char> exact(eps_schedule.size(), 1);
  parallel_for(eps_schedule.size(), [&](std::size_t i) {
    const SystemModel sys = family.at(eps_schedule[i]);
    PressureEstimate e = pressure_estimate(sys, phi, eps_schedule[i], n_schedule, opt);
    values[i] = e.slope;
    exact[i] = e.exact;
  });
  DimensionEstimate d =
      fit_dimension(eps_schedule, values, std::vector<double>(n_schedule.begin(), n_schedule.end()));
  d.exact = std::all_of(exact.begin(), exact.end(), [](char c) { return c != 0; });
  return d;
}

// ---- induced ----

TimeLevelPartition time_level_partition(const SystemModel& sys, const PointSet& z,
                                        const Potential& psi, double T, LevelVariant variant,
                                        int tail_max) {
  if (!(psi.inf() > 0)) throw PreconditionError("psi must be strictly positive");
  TimeLevelPartition part;
  part.T = T;
  part.variant = variant;
  const double m = psi.inf();
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (variant == LevelVariant::level) {
      double s = psi.eval(sys, z[i], 0);
      if (s > T) continue;  // no level n >= 1
      int n = 1;
      for (;;) {
        const double next = s + psi.eval(sys, z[i], n);
        if (next > T) break;
        s = next;
        ++n;
      }
      if (n > static_cast<int>(std::floor(T / m)) + 1)
        throw Error("level exceeds floor(T/m)+1; potential bounds are inconsistent");
      part.members[n].push_back(i);
    } else {
      double s = 0.0;
      for (int n = 1; n <= tail_max; ++n) {
        s += psi.eval(sys, z[i], n - 1);
        if (s > T) part.members[n].push_back(i);
      }
    }
  }
  for (const auto& [n, v] : part.members) part.levels.push_back(n);
  return part;
}

InducedPressure induced_pressure(const SystemModel& sys, const PointSet& z, const Potential& phi,
                                 const Potential& psi, double T, double eps,
                                 InducedWitness witness, std::size_t exact_cap) {
  const TimeLevelPartition part = time_level_partition(sys, z, psi, T, LevelVariant::level);
  InducedPressure out;
  std::vector<double> level_logs;
  for (int n : part.levels) {
    PointSet xn;
    for (std::size_t i : part.members.at(n)) xn.push_back(z[i]);
    Witness sep = separated_witness(sys, xn, phi, n, eps, exact_cap);
    double level_log = sep.log_sum;
    bool exact = sep.exact;
    if (witness == InducedWitness::spanning) {
      std::vector<double> scaled;
      double top = *std::max_element(sep.log_weights.begin(), sep.log_weights.end());
      for (double lw : sep.log_weights) scaled.push_back(std::max(std::exp(lw - top), 1e-300));
      const bool ex = xn.size() <= exact_cap && xn.size() <= 64;
      SpanningResult span = min_spanning(sys, xn, n, eps, ex ? SearchMode::exact : SearchMode::greedy,
                                         exact_cap, &scaled);
      std::vector<double> terms;
      for (std::size_t c : span.centers) terms.push_back(sep.log_weights[c]);
      // A maximal separated set also spans, so it bounds the infimum too.
      level_log = std::min(log_sum_exp(terms), sep.log_sum);
      exact = span.exact;
    }
    out.exact = out.exact && exact;
    out.per_level.emplace_back(n, level_log);
    level_logs.push_back(level_log);
  }
  out.log_value = log_sum_exp(level_logs);
  return out;
}

int induced_depth(const Potential& psi, double T) {
  if (!(psi.inf() > 0)) throw PreconditionError("psi must be strictly positive");
  return static_cast<int>(std::floor(T / psi.inf()));
}

InducedRecord induced_record(const SystemModel& sys, const Potential& phi, const Potential& psi,
                             double T, double eps, const PressureOptions& opt) {
  InducedRecord rec;
  rec.T = T;
  rec.eps = eps;
  const int depth = induced_depth(psi, T);
  const double kd = std::pow(static_cast<double>(sys.k()), depth);
  const bool brute = opt.source == PressureSource::brute ||
                     (opt.source == PressureSource::hybrid && kd <= static_cast<double>(opt.brute_limit));
  if (brute || !psi.is_constant()) {
    const PointSet z = sys.enumerate_points(depth);
    const InducedPressure p = induced_pressure(sys, z, phi, psi, T, eps, InducedWitness::separated,
                                               opt.exact_cap);
    const InducedPressure q = induced_pressure(sys, z, phi, psi, T, eps, InducedWitness::spanning,
                                               opt.exact_cap);
    rec.log_p = p.log_value;
    rec.log_q = q.log_value;
    rec.exact = p.exact && q.exact;
    return rec;
  }
  // Constant psi = c puts every point at level floor(T/c).
  const double c = psi.table()[0];
  const int n = static_cast<int>(std::floor(T / c));
  if (n < 1) {
    rec.log_p = rec.log_q = kNegInf;
    return rec;
  }
  const OracleBracket b = analytic_oracle(sys, phi, eps);
  rec.log_p = rec.log_q = n * (b.exact_on_words ? b.lower_rate : b.midpoint());
  rec.exact = b.exact_on_words;
  return rec;
}

DimensionEstimate induced_mdim_estimate(const SystemFamily& family, const Potential& phi,
                                        const Potential& psi,
                                        const std::vector<double>& eps_schedule,
                                        const std::vector<double>& T_schedule,
                                        const PressureOptions& opt) {
  if (eps_schedule.size() < 3) throw ConfigError("eps", "mdim estimate needs at least three scales");
  std::vector<double> values(eps_schedule.size());
  std::vector<char> exact(eps_schedule.size(), 1);
  parallel_for(eps_schedule.size(), [&](std::size_t i) {
    const SystemModel sys = family.at(eps_schedule[i]);
    std::vector<double> xs, ys;
    for (double T : T_schedule) {
      const InducedRecord r = induced_record(sys, phi, psi, T, eps_schedule[i], opt);
      exact[i] = exact[i] && r.exact;
      if (std::isfinite(r.log_p)) {
        xs.push_back(T);
        ys.push_back(r.log_p);
      }
    }
    if (xs.size() < 2) throw PreconditionError("induced estimate needs at least two usable T values");
    values[i] = fit_line(xs, ys).slope;
  });
  DimensionEstimate d = fit_dimension(eps_schedule, values, T_schedule);
  d.exact = std::all_of(exact.begin(), exact.end(), [](char c) { return c != 0; });
  return d;
}

// ---- root ----

RootResult solve_bowen_root(const std::function<double(double)>& mdim_fn, const Potential& phi,
                            const Potential& psi, double tol, int max_iter) {
  (void)phi;
  if (!(psi.inf() > 0)) throw PreconditionError("psi must be strictly positive");
  if (!(tol > 0)) throw ConfigError("tol", "tolerance must be positive");
  RootResult res;
  const double m = psi.inf();
  const double norm = psi.norm();
  const double d0 = mdim_fn(0.0);
  double lo = std::min(0.0, d0 / m) - tol;
  double hi = std::max(0.0, d0 / m) + tol;
  double flo = mdim_fn(lo), fhi = mdim_fn(hi);
  if (!(flo >= 0 && fhi <= 0)) {
    const double mid = 0.5 * (lo + hi), half = hi - lo;
    lo = mid - half;
    hi = mid + half;
    flo = mdim_fn(lo);
    fhi = mdim_fn(hi);
    res.widened = true;
    if (!(flo >= 0 && fhi <= 0)) {
      std::ostringstream os;
      os << "bracket [" << lo << ", " << hi << "] does not straddle zero: f(lo)=" << flo
         << " f(hi)=" << fhi;
      res.diagnostics = os.str();
      res.lo = lo;
      res.hi = hi;
      return res;
    }
  }
  double beta = 0.5 * (lo + hi), f = 0;
  for (int it = 0; it < max_iter; ++it) {
    beta = 0.5 * (lo + hi);
    f = mdim_fn(beta);
    res.iterations = it + 1;
    if (std::fabs(f) <= tol * norm) {
      res.converged = true;
      break;
    }
    if (f > 0)
      lo = beta;
    else
      hi = beta;
  }
  res.beta = beta;
  res.value = f;
  res.lo = lo;
  res.hi = hi;
  if (!res.converged) res.diagnostics = "iteration limit reached";
  return res;
}

}  // namespace mmdim
