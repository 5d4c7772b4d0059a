#include "report/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "mmdim/bowen.hpp"
#include "mmdim/caratheodory.hpp"
#include "mmdim/error.hpp"
#include "mmdim/measure.hpp"
#include "mmdim/pressure.hpp"
#include "mmdim/rng.hpp"

namespace mmdim::report {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Accumulates cases of one assertion; the slack is the minimum margin.
struct Check {
  Assertion a;
  Check(std::string suite, std::string name) {
    a.suite = std::move(suite);
    a.name = std::move(name);
    a.slack = kInf;
  }
  void margin(double m, double tol = 0.0, const std::string& where = "") {
    ++a.cases;
    if (std::isnan(m)) m = -kInf;
    if (m < a.slack) a.slack = m;
    if (m < -tol && a.passed) {
      a.passed = false;
      a.detail = where;
    }
  }
  void truth(bool ok, const std::string& where = "") { margin(ok ? 0.0 : -1.0, 0.0, where); }
  Assertion done() {
    if (a.cases == 0) {
      a.passed = false;
      a.detail = "no cases generated";
      a.slack = 0.0;
    }
    return a;
  }
};

SystemModel shift(int k, SymbolMetric metric, int window = 12, double eps_min = 0.05) {
  SystemParams p;
  p.kind = ShiftKind::full;
  p.k = k;
  p.window = window;
  p.symbol_metric = metric;
  p.eps_min = eps_min;
  return SystemModel(p);
}

std::string where(std::initializer_list<std::pair<const char*, double>> kv) {
  std::ostringstream o;
  bool first = true;
  for (const auto& [k, v] : kv) {
    o << (first ? "" : " ") << k << "=" << v;
    first = false;
  }
  return o.str();
}

PointSet random_subset(const PointSet& all, std::size_t size, Rng& rng) {
  std::vector<std::size_t> idx(all.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i + 1 < idx.size(); ++i)
    std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
  idx.resize(std::min(size, idx.size()));
  std::sort(idx.begin(), idx.end());
  PointSet out;
  for (std::size_t i : idx) out.push_back(all[i]);
  return out;
}

Potential random_table(int k, double lo, double hi, Rng& rng) {
  std::vector<double> t(k);
  for (auto& v : t) v = lo + (hi - lo) * rng.uniform();
  return Potential::coordinate(t);
}

double rel_gap(double a, double b) {
  if (a == b) return 0.0;
  return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)});
}

}  // namespace

// ---------------------------------------------------------------- counting

std::vector<Assertion> verify_counting(std::uint64_t seed) {
  std::vector<Assertion> out;
  const SystemModel sys = shift(2, SymbolMetric::discrete, 12, 0.05);
  const std::vector<double> radii{0.1, 0.2, 0.3, 0.45, 0.6, 0.8, 1.0, 1.3};

  Check sandwich("counting", "r_n(eps) <= s_n(eps) <= r_n(eps/2)");
  Check mono_eps("counting", "s_n nonincreasing in eps");
  Check greedy_spans("counting", "maximal separated set spans");
  for (int depth = 1; depth <= 4; ++depth) {
    const PointSet z = sys.enumerate_points(depth);
    for (int n = 1; n <= 3; ++n) {
      std::size_t prev_s = std::numeric_limits<std::size_t>::max();
      for (double e : radii) {
        const auto s = max_separated(sys, z, n, e, SearchMode::exact);
        const auto r = min_spanning(sys, z, n, e, SearchMode::exact);
        const auto r2 = min_spanning(sys, z, n, e / 2, SearchMode::exact);
        const double sn = s.indices.size(), rn = r.centers.size(), rh = r2.centers.size();
        const std::string w = where({{"depth", depth}, {"n", n}, {"eps", e}});
        sandwich.margin(std::min(sn - rn, rh - sn), 0.0, w);
        mono_eps.margin(double(prev_s) - sn, 0.0, w);
        prev_s = s.indices.size();
        const auto g = max_separated(sys, z, n, e, SearchMode::greedy);
        greedy_spans.truth(is_spanning_set(sys, z, g.indices, n, e), w);
      }
    }
  }
  out.push_back(sandwich.done());
  out.push_back(mono_eps.done());
  out.push_back(greedy_spans.done());

  Check mono_n("counting", "s_{n+1} >= s_n on all depth-4 words");
  {
    const PointSet z = sys.enumerate_points(4);
    for (double e : radii) {
      std::size_t prev = 0;
      for (int n = 1; n <= 4; ++n) {
        const std::size_t s = max_separated(sys, z, n, e, SearchMode::exact).indices.size();
        mono_n.margin(double(s) - double(prev), 0.0, where({{"n", n}, {"eps", e}}));
        prev = s;
      }
    }
  }
  out.push_back(mono_n.done());

  Check five_r("counting", "5r disjointification postconditions");
  Rng rng(seed, 0x5A);
  for (int fam = 0; fam < 100; ++fam) {
    const int k = 2 + static_cast<int>(rng.below(2));
    const SystemModel s = shift(k, fam % 2 ? SymbolMetric::abs_diff : SymbolMetric::discrete, 12, 0.05);
    const PointSet universe = s.enumerate_points(3);
    const int order = 1 + static_cast<int>(rng.below(2));
    SetFamily f;
    const std::size_t balls = 2 + rng.below(7);
    for (std::size_t b = 0; b < balls; ++b) {
      BallSpec ball;
      ball.center = universe[rng.below(universe.size())];
      ball.order = order;
      ball.radius = 0.1 + 0.9 * rng.uniform();
      ball.closed = true;
      f.balls.push_back(ball);
    }
    const auto res = five_r_disjointify(s, f, universe);
    const auto chk = check_five_r(s, f, res.kept, universe, 5.0);
    five_r.truth(chk.disjoint && chk.covered, where({{"family", fam}}));
  }
  out.push_back(five_r.done());

  Check empty("counting", "empty Z gives zero counts");
  {
    const auto c = count_separated_spanning(sys, {}, 2, 0.5);
    empty.truth(c.s_lower == 0 && c.r_upper == 0);
  }
  out.push_back(empty.done());
  return out;
}

// ---------------------------------------------------------------- pressure

std::vector<Assertion> verify_pressure(std::uint64_t seed) {
  std::vector<Assertion> out;
  Rng rng(seed, 0x9E);
  Check lip("pressure", "Lipschitz in beta at fixed witness set");
  Check dec("pressure", "strict decrease in beta at fixed witness set");
  for (int inst = 0; inst < 200; ++inst) {
    const int k = 2 + static_cast<int>(rng.below(3));
    const SystemModel sys = shift(k, inst % 2 ? SymbolMetric::abs_diff : SymbolMetric::discrete);
    const int n = 1 + static_cast<int>(rng.below(4));
    const PointSet all = sys.enumerate_points(n);
    const PointSet f = random_subset(all, 1 + rng.below(all.size()), rng);
    const Potential phi = random_table(k, -1.0, 1.0, rng);
    const Potential psi = random_table(k, 0.2, 2.0, rng);
    const double eps = 0.05 + 0.9 * rng.uniform();
    double b1 = 3.0 * rng.uniform() - 1.0, b2 = 3.0 * rng.uniform() - 1.0;
    if (b1 > b2) std::swap(b1, b2);
    const double s1 = pressure_sum(sys, f, Potential::affine(1.0, phi, -b1, psi), n, eps);
    const double s2 = pressure_sum(sys, f, Potential::affine(1.0, phi, -b2, psi), n, eps);
    const double le = std::log(1.0 / eps);
    const double fp = 1e-12 * std::max({1.0, std::fabs(s1), std::fabs(s2)});
    const std::string w = where({{"instance", inst}});
    lip.margin((b2 - b1) * psi.norm() * n * le - std::fabs(s1 - s2), fp, w);
    dec.margin(s1 - (b2 - b1) * psi.inf() * n * le - s2, fp, w);
  }
  out.push_back(lip.done());
  out.push_back(dec.done());

  Check qp("pressure", "Q_{psi,T} <= P_{psi,T} on every cell");
  Check partition("pressure", "time-level partition invariants");
  for (int inst = 0; inst < 40; ++inst) {
    const int k = 2 + static_cast<int>(rng.below(2));
    const SystemModel sys = shift(k, inst % 2 ? SymbolMetric::abs_diff : SymbolMetric::discrete);
    const Potential phi = random_table(k, -0.5, 1.0, rng);
    const Potential psi = random_table(k, 0.6, 2.0, rng);
    for (double T : {1.5, 2.5, 3.5}) {
      const int depth = induced_depth(psi, T);
      if (std::pow(k, depth) > 81) continue;
      const PointSet z = sys.enumerate_points(std::max(depth, 1));
      const auto part = time_level_partition(sys, z, psi, T, LevelVariant::level);
      bool ok = true;
      for (const auto& [lvl, members] : part.members) {
        ok = ok && lvl <= int(std::floor(T / psi.inf())) + 1;
        for (std::size_t i : members) {
          ok = ok && birkhoff_sum(sys, psi, z[i], lvl) <= T &&
               birkhoff_sum(sys, psi, z[i], lvl + 1) > T;
        }
      }
      partition.truth(ok, where({{"instance", inst}, {"T", T}}));
      for (double eps : {0.3, 0.6}) {
        const auto p = induced_pressure(sys, z, phi, psi, T, eps, InducedWitness::separated);
        const auto q = induced_pressure(sys, z, phi, psi, T, eps, InducedWitness::spanning);
        if (part.levels.empty()) continue;
        qp.margin(p.log_value - q.log_value, 1e-12 * std::max(1.0, std::fabs(p.log_value)),
                  where({{"instance", inst}, {"T", T}, {"eps", eps}}));
      }
    }
  }
  out.push_back(qp.done());
  out.push_back(partition.done());

  Check rec("pressure", "psi=1 induced records equal plain records at T=n+1/2");
  for (int k : {2, 3}) {
    const SystemModel sys = shift(k, SymbolMetric::abs_diff);
    const Potential phi = random_table(k, -0.5, 0.5, rng);
    PressureOptions po;
    po.source = PressureSource::brute;
    for (double eps : {0.2, 0.4, 0.7})
      for (int n = 1; n <= 4; ++n) {
        const auto plain = pressure_record(sys, phi, n, eps, po);
        const auto ind = induced_record(sys, phi, Potential::constant(1.0), n + 0.5, eps, po);
        rec.margin(-std::fabs(plain.log_sum - ind.log_p), 0.0,
                   where({{"k", k}, {"eps", eps}, {"n", n}}));
      }
  }
  out.push_back(rec.done());

  Check oracle("pressure", "oracle bracket contains brute-force counts");
  for (int k = 2; k <= 4; ++k)
    for (auto metric : {SymbolMetric::discrete, SymbolMetric::abs_diff}) {
      const SystemModel sys = shift(k, metric);
      const Potential phi = Potential::constant(0.0);
      for (double eps : {0.2, 0.3, 0.5, 0.7}) {
        const OracleBracket b = analytic_oracle(sys, phi, eps);
        for (int n = 1; n <= 3; ++n) {
          const PointSet z = sys.enumerate_points(n);
          const double s = std::log(double(max_separated(sys, z, n, eps, SearchMode::exact, 64).indices.size()));
          double m = std::min(s - n * b.lower_rate, n * b.upper_rate + b.upper_offset - s);
          if (b.exact_on_words) m = std::min(m, -std::fabs(s - n * b.lower_rate));
          oracle.margin(m, 1e-9, where({{"k", k}, {"eps", eps}, {"n", n}}));
        }
      }
    }
  out.push_back(oracle.done());

  Check shift_id("pressure", "constant shift identity of pressure sums");
  {
    const SystemModel sys = shift(3, SymbolMetric::abs_diff);
    const PointSet f = sys.enumerate_points(2);
    for (double c : {-0.7, 0.3, 1.1})
      for (double eps : {0.2, 0.5}) {
        const double a = pressure_sum(sys, f, Potential::constant(c), 2, eps);
        const double b = pressure_sum(sys, f, Potential::constant(0.0), 2, eps) + c * 2 * std::log(1 / eps);
        shift_id.margin(-std::fabs(a - b), 1e-12);
      }
  }
  out.push_back(shift_id.done());
  return out;
}

// ---------------------------------------------------------------- caratheodory

namespace {

// Small problem whose balls pin every coordinate a coordinate potential reads,
// so S_n phi is constant on each ball and every supremum is exact.
OuterMeasureProblem pinned_instance(Rng& rng, int index) {
  const int k = 2 + static_cast<int>(rng.below(2));
  const bool discrete = index % 2 == 0;
  const SystemModel sys = shift(k, discrete ? SymbolMetric::discrete : SymbolMetric::abs_diff, 12, 0.02);
  const PointSet all = sys.enumerate_points(3);
  OuterMeasureProblem p{sys, {}, {}, random_table(k, 0.2, 1.5, rng)};
  p.z = random_subset(all, 2 + rng.below(7), rng);
  for (const auto& w : all)
    if (std::find(p.z.begin(), p.z.end(), w) == p.z.end()) p.extras.push_back(w);
  p.N = 1 + static_cast<int>(rng.below(2));
  p.n_max = p.N + static_cast<int>(rng.below(3));
  const double gap = sys.min_symbol_gap();
  p.eps = gap * (0.3 + 0.7 * rng.uniform());
  p.lambda = 2.0 * rng.uniform();
  return p;
}

double critical(const OuterMeasureProblem& p, Structure s, double tol, double threshold = 1.0) {
  return critical_lambda(
             [&](double l) {
               OuterMeasureProblem q = p;
               q.lambda = l;
               return structure_value(q, s).value;
             },
             tol, threshold)
      .lambda;
}

}  // namespace

std::vector<Assertion> verify_caratheodory(std::uint64_t seed) {
  std::vector<Assertion> out;
  Rng rng(seed, 0xCA);
  Check bs_id("caratheodory", "BS value equals cover value at potential -lambda*phi/log(1/eps)");
  Check pbs_id("caratheodory", "packing-BS value equals packing value at the same substitution");
  Check w_le_r("caratheodory", "W <= R");
  Check r_le_w("caratheodory", "R(lambda+delta, 6eps) <= W(lambda, eps)");
  Check refine("caratheodory", "refined packing <= packing, equal for one block");
  Check sup_exact("caratheodory", "pinned instances have exact suprema");
  for (int inst = 0; inst < 50; ++inst) {
    OuterMeasureProblem p = pinned_instance(rng, inst);
    const std::string w = where({{"instance", inst}});
    const double le = std::log(1.0 / p.eps);
    OuterMeasureProblem q = p;
    std::vector<double> t = p.phi.table();
    for (auto& v : t) v *= -p.lambda / le;
    q.phi = Potential::coordinate(t);
    q.lambda = 0.0;
    const ValueResult bs = bs_value(p), cov = cover_value(q);
    const ValueResult pbs = packing_bs_value(p), pk = packing_value(q);
    sup_exact.truth(bs.sup_exact && cov.sup_exact && pbs.sup_exact && pk.sup_exact, w);
    bs_id.margin(-rel_gap(bs.value, cov.value), 1e-10, w);
    pbs_id.margin(-rel_gap(pbs.value, pk.value), 1e-10, w);

    const ValueResult wv = weighted_value(p);
    w_le_r.margin((bs.value - wv.value) / std::max(1.0, bs.value), 1e-9, w);
    for (double delta : {0.1, 0.5, 1.0}) {
      OuterMeasureProblem big = p;
      big.eps = 6.0 * p.eps;
      big.lambda = p.lambda + delta;
      const ValueResult r6 = bs_value(big);
      // Suprema at 6 eps may be conservative upper bounds, which only raise R.
      if (!(r6.exact && wv.exact && wv.sup_exact)) continue;
      r_le_w.margin((wv.value - r6.value) / std::max(1.0, wv.value), 1e-9,
                    where({{"instance", inst}, {"delta", delta}}));
    }
    OuterMeasureProblem z0 = p;
    z0.phi = Potential::constant(0.0);
    const ValueResult pv = packing_value(z0);
    const ValueResult r1 = refined_packing_value(z0, 1);
    const ValueResult rk = refined_packing_value(z0, z0.z.size());
    refine.margin(std::min(-rel_gap(r1.value, pv.value), (pv.value - rk.value) / std::max(1.0, pv.value)),
                  1e-12, w);
  }
  out.push_back(bs_id.done());
  out.push_back(pbs_id.done());
  out.push_back(sup_exact.done());
  out.push_back(w_le_r.done());
  out.push_back(r_le_w.done());
  out.push_back(refine.done());

  Check chain("caratheodory", "cover(3eps) <= packing(eps) at potential 0");
  Check crit("caratheodory", "critical lambda bracket postconditions");
  Check bs_crit("caratheodory", "critical lambda of BS(1) equals cover(0)");
  Check mono_z("caratheodory", "values and critical lambda monotone in Z");
  Check uni("caratheodory", "finite union sandwich of critical lambda");
  const double tol = 1e-6;
  for (int inst = 0; inst < 30; ++inst) {
    OuterMeasureProblem p = pinned_instance(rng, inst);
    p.phi = Potential::constant(0.0);
    const std::string w = where({{"instance", inst}});
    for (int n = p.N; n <= p.n_max; ++n) {
      OuterMeasureProblem a = p, b = p;
      a.N = a.n_max = b.N = b.n_max = n;
      b.eps = 3.0 * p.eps;
      const ValueResult pk = packing_value(a), cv = cover_value(b);
      if (pk.exact && cv.exact)
        chain.margin((pk.value - cv.value) / std::max(1.0, pk.value), 1e-12,
                     where({{"instance", inst}, {"n", n}}));
    }
    const CriticalValue cvl = critical_lambda(
        [&](double l) {
          OuterMeasureProblem q = p;
          q.lambda = l;
          return cover_value(q).value;
        },
        tol);
    OuterMeasureProblem lo = p, hi = p;
    lo.lambda = cvl.lo;
    hi.lambda = cvl.hi;
    crit.truth(!cvl.degenerate && cover_value(lo).value >= 1.0 && cover_value(hi).value <= 1.0 &&
                   cvl.hi - cvl.lo <= tol,
               w);
    OuterMeasureProblem one = p;
    one.phi = Potential::constant(1.0);
    bs_crit.margin(-std::fabs(critical(one, Structure::bs, tol) - cvl.lambda), 0.0, w);

    if (p.z.size() >= 2) {
      OuterMeasureProblem z1 = p, z2 = p;
      z1.z.assign(p.z.begin(), p.z.begin() + p.z.size() / 2);
      z2.z.assign(p.z.begin() + p.z.size() / 2, p.z.end());
      for (auto* part : {&z1, &z2}) {
        part->extras = p.extras;
        for (const auto& x : p.z)
          if (std::find(part->z.begin(), part->z.end(), x) == part->z.end()) part->extras.push_back(x);
      }
      mono_z.margin(cover_value(p).value - cover_value(z1).value, 1e-12, w);
      const double l1 = critical(z1, Structure::cover_m, tol), l2 = critical(z2, Structure::cover_m, tol);
      mono_z.margin(cvl.lambda - l1 + tol, 0.0, w);
      const double h1 = critical(z1, Structure::cover_m, tol, 0.5);
      const double h2 = critical(z2, Structure::cover_m, tol, 0.5);
      uni.margin(std::min(cvl.lambda - std::max(l1, l2), std::max(h1, h2) - cvl.lambda) + tol, 0.0, w);
    }
  }
  out.push_back(chain.done());
  out.push_back(crit.done());
  out.push_back(bs_crit.done());
  out.push_back(mono_z.done());
  out.push_back(uni.done());

  // Odd-cycle search: a fractional cover strictly cheaper than any 0/1 cover.
  Check odd("caratheodory", "fractional cover strictly beats integral cover somewhere");
  {
    bool found = false;
    for (int k = 3; k <= 5 && !found; ++k) {
      const SystemModel sys = shift(k, SymbolMetric::abs_diff, 12, 0.02);
      const PointSet all = sys.enumerate_points(2);
      for (double eps = 0.15; eps < 1.0 && !found; eps += 0.05) {
        for (std::size_t start = 0; start + 5 <= all.size() && !found; ++start) {
          OuterMeasureProblem p{sys, PointSet(all.begin() + start, all.begin() + start + 5), {},
                                Potential::constant(1.0)};
          p.eps = eps;
          p.N = p.n_max = 1;
          const ValueResult r = bs_value(p), wv = weighted_value(p);
          if (r.exact && wv.exact && wv.value < r.value - 1e-9) {
            found = true;
            odd.margin(r.value - wv.value, 0.0, where({{"k", k}, {"eps", eps}}));
          }
        }
      }
    }
    if (!found) odd.truth(false, "no instance found");
  }
  out.push_back(odd.done());
  return out;
}

// ---------------------------------------------------------------- entropy

std::vector<Assertion> verify_entropy(std::uint64_t seed) {
  std::vector<Assertion> out;
  Check k_bk("entropy", "katok(2eps) <= BK-upper(eps) + 0.05");
  Check k_ps("entropy", "katok(eps) <= PS(eps) + 0.1");
  Check bk_order("entropy", "BK-lower <= BK-upper");
  Check bs_one("entropy", "BS entropy with phi=1 equals Brin-Katok bit for bit");
  for (const auto& probs : {std::vector<double>{0.5, 0.5}, std::vector<double>{0.3, 0.7}}) {
    SystemParams sp;
    sp.k = 2;
    sp.window = 12;
    sp.eps_min = 0.1;
    const SystemModel sys(sp);
    const MeasureModel mu = MeasureModel::bernoulli(sys, probs);
    const std::string w = where({{"p0", probs[0]}});
    EntropyOptions eo;
    eo.n_schedule = {1, 2, 3, 4, 5, 6, 7, 8};
    eo.x_samples = 16;
    eo.mass.samples = 20000;
    eo.seed = mix_seed(seed, 1);
    KatokOptions ko;
    ko.seed = mix_seed(seed, 2);
    PsOptions po;
    po.n_schedule = {4, 5, 6, 7, 8, 9, 10};
    for (double eps : {0.3, 0.45}) {
      const EntropyEstimate bk = brin_katok(mu, eps, EntropyBound::upper, eo);
      const EntropyEstimate bs = bs_entropy(mu, Potential::constant(1.0), eps, EntropyBound::upper, eo);
      bs_one.truth(bk.value == bs.value && bk.lower == bs.lower && bk.upper == bs.upper &&
                       bk.ci_lo == bs.ci_lo && bk.ci_hi == bs.ci_hi,
                   w);
      bk_order.margin(bk.upper - bk.lower, 0.0, w);
      const EntropyEstimate k2 = katok_entropy(mu, 2 * eps, 0.5, {2, 3, 4, 5, 6}, ko);
      k_bk.margin(bk.upper + 0.05 - k2.value, 0.0, where({{"p0", probs[0]}, {"eps", eps}}));
      const EntropyEstimate k1 = katok_entropy(mu, eps, 0.5, {2, 3, 4, 5, 6}, ko);
      const EntropyEstimate ps = ps_entropy(mu, eps, 0.1 + std::fabs(probs[0] - 0.5), po);
      k_ps.margin(ps.value + 0.1 - k1.value, 0.0, where({{"p0", probs[0]}, {"eps", eps}}));
    }
  }
  out.push_back(k_bk.done());
  out.push_back(k_ps.done());
  out.push_back(bk_order.done());
  out.push_back(bs_one.done());

  Check kmono("entropy", "katok r_n monotone in eps, delta and n on exact instances");
  {
    SystemParams sp;
    sp.k = 3;
    sp.window = 10;
    sp.symbol_metric = SymbolMetric::abs_diff;
    sp.eps_min = 0.05;
    const SystemModel sys(sp);
    Rng rng(seed, 0xA7);
    const PointSet all = sys.enumerate_points(3);
    for (int inst = 0; inst < 10; ++inst) {
      PointSet pts = random_subset(all, 10, rng);
      std::vector<double> wts;
      for (std::size_t i = 0; i < pts.size(); ++i) wts.push_back(0.1 + rng.uniform());
      const MeasureModel mu = MeasureModel::empirical(sys, pts, wts);
      KatokOptions ko;
      auto r = [&](int n, double e, double d) { return katok_rn(mu, n, e, d, ko); };
      const std::string w = where({{"instance", inst}});
      for (int n = 1; n <= 3; ++n)
        for (double e : {0.2, 0.4, 0.7})
          for (double d : {0.2, 0.5, 0.8}) {
            const KatokResult base = r(n, e, d);
            if (!base.exact) continue;
            kmono.margin(base.count - r(n, e + 0.15, d).count, 0.0, w);
            kmono.margin(base.count - r(n, e, d + 0.1).count, 0.0, w);
            kmono.margin(r(n + 1, e, d).count - base.count, 0.0, w);
          }
    }
  }
  out.push_back(kmono.done());

  Check psm("entropy", "PS separated counts nondecreasing in eta");
  {
    SystemParams sp;
    sp.k = 2;
    sp.window = 14;
    sp.eps_min = 0.1;
    const SystemModel sys(sp);
    const MeasureModel mu = MeasureModel::product_uniform(sys);
    PsOptions po;
    po.n_schedule = {4, 6, 8};
    const PsScan scan = ps_entropy_scan(mu, 0.3, {0.05, 0.1, 0.2, 0.5}, po);
    for (std::size_t i = 1; i < scan.per_eta.size(); ++i)
      for (std::size_t j = 0; j < po.n_schedule.size(); ++j) {
        const double a = scan.per_eta[i - 1].second.per_scale[j].second;
        const double b = scan.per_eta[i].second.per_scale[j].second;
        psm.margin(b - a, 1e-12, where({{"eta", scan.per_eta[i].first}}));
      }
  }
  out.push_back(psm.done());

  Check bracket("entropy", "ball-mass intervals inside the product bracket");
  {
    SystemParams sp;
    sp.kind = ShiftKind::grid;
    sp.k = 16;
    sp.window = 12;
    sp.symbol_metric = SymbolMetric::abs_diff;
    sp.eps_min = 1.0 / 16;
    const SystemModel sys(sp);
    const MeasureModel mu = MeasureModel::product_uniform(sys);
    Rng rng(seed, 0xB1);
    MassOptions mo;
    mo.method = MassMethod::importance;
    mo.samples = 20000;
    for (int i = 0; i < 4; ++i) {
      const PointWindow x = mu.sample(rng);
      for (int n = 1; n <= 3; ++n) {
        const MassBracket b = ball_mass_bracket(mu, x, n, 1.0 / 16);
        const MassEstimate m = estimate_ball_mass(mu, x, n, 1.0 / 16, mo, mix_seed(seed, 10 * i + n));
        bracket.margin(std::min(std::log(m.ci_lo) - std::log(b.lower), std::log(b.upper) - std::log(m.ci_hi)),
                       0.0, where({{"x", i}, {"n", n}}));
      }
    }
  }
  out.push_back(bracket.done());
  return out;
}

std::vector<Assertion> verify_suite(const std::string& suite, std::uint64_t seed) {
  std::vector<Assertion> out;
  auto add = [&](std::vector<Assertion> v) { out.insert(out.end(), v.begin(), v.end()); };
  const bool all = suite == "all" || suite == "finite-scale";
  if (!all && suite != "counting" && suite != "pressure" && suite != "caratheodory" && suite != "entropy")
    throw ConfigError("suite", "unknown suite '" + suite + "'");
  if (all || suite == "counting") add(verify_counting(seed));
  if (all || suite == "pressure") add(verify_pressure(seed));
  if (all || suite == "caratheodory") add(verify_caratheodory(seed));
  if (all || suite == "entropy") add(verify_entropy(seed));
  return out;
}

}  // namespace mmdim::report
