#include "mmdim/caratheodory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "mmdim/error.hpp"
#include "mmdim/parallel.hpp"

namespace mmdim {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string to_string(Structure s) {
  switch (s) {
    case Structure::cover_m: return "bowen";
    case Structure::cover_fixed: return "fixed-length";
    case Structure::packing: return "packing";
    case Structure::bs: return "bs";
    case Structure::packing_bs: return "packing-bs";
    case Structure::weighted: return "weighted";
  }
  return "unknown";
}

Structure parse_structure(const std::string& name) {
  if (name == "bowen" || name == "cover") return Structure::cover_m;
  if (name == "fixed-length") return Structure::cover_fixed;
  if (name == "packing") return Structure::packing;
  if (name == "bs") return Structure::bs;
  if (name == "packing-bs") return Structure::packing_bs;
  if (name == "weighted") return Structure::weighted;
  throw ConfigError("structure", "unknown structure '" + name + "'");
}

void OuterMeasureProblem::validate(Structure s) const {
  if (z.empty()) throw PreconditionError("Z must be nonempty");
  if (N < 1 || n_max < N) throw PreconditionError("orders must satisfy 1 <= N <= n_max");
  if (!(eps > 0)) throw PreconditionError("radius must be positive");
  if (s == Structure::bs || s == Structure::packing_bs || s == Structure::weighted)
    if (!(phi.inf() > 0)) throw PreconditionError("BS structures need phi > 0");
}

BallSup ball_sup(const SystemModel& sys, const Potential& phi, const PointWindow& center, int n,
                 double eps, bool closed, const PointSet& universe) {
  BallSup s;
  if (phi.is_constant()) {
    s.value = n * phi.table()[0];
    return s;
  }
  // Coordinate i can differ inside the ball only if gap * w^dist stays below
  // the radius, dist being its offset past the last step.
  const double gap = sys.min_symbol_gap();
  const double w = sys.params().weight_base;
  bool pinned = true;
  for (int i = 0; i < n + phi.range() - 1 && pinned; ++i) {
    const double c = gap * std::pow(w, std::max(0, i - (n - 1)));
    pinned = closed ? c > eps : c >= eps;
  }
  if (pinned) {
    s.value = birkhoff_sum(sys, phi, center, n);
    return s;
  }
  const BallSpec ball{center, n, eps, closed};
  double best = birkhoff_sum(sys, phi, center, n);
  for (const auto& u : universe)
    if (ball_contains(sys, ball, u)) best = std::max(best, birkhoff_sum(sys, phi, u, n));
  s.value = best + n * phi.modulus(sys, eps);
  s.exact = false;
  return s;
}

namespace {

enum class Weighting { bowen, bs };

struct Candidate {
  std::size_t center;
  int order;
  double log_weight;
  Bits members;  // over the universe Z ++ extras
};

struct Built {
  PointSet universe;
  std::vector<Candidate> cands;
  bool sup_exact = true;
};

Built build(const OuterMeasureProblem& p, bool closed, Weighting wt, bool fixed) {
  Built b;
  b.universe = p.z;
  b.universe.insert(b.universe.end(), p.extras.begin(), p.extras.end());
  const double le = std::log(1.0 / p.eps);
  const int hi = fixed ? p.N : p.n_max;
  for (int n = p.N; n <= hi; ++n) {
    for (std::size_t c = 0; c < p.z.size(); ++c) {
      const BallSpec ball{p.z[c], n, p.eps, closed};
      Candidate cand{c, n, 0.0, Bits(b.universe.size())};
      for (std::size_t u = 0; u < b.universe.size(); ++u)
        if (u == c || ball_contains(p.sys, ball, b.universe[u])) cand.members.set(u);
      const BallSup s = ball_sup(p.sys, p.phi, p.z[c], n, p.eps, closed, b.universe);
      b.sup_exact = b.sup_exact && s.exact;
      cand.log_weight = wt == Weighting::bowen ? -n * p.lambda + le * s.value : -p.lambda * s.value;
      b.cands.push_back(std::move(cand));
    }
  }
  return b;
}

std::vector<double> scaled_weights(const std::vector<Candidate>& cands, double& top) {
  top = -kInf;
  for (const auto& c : cands) top = std::max(top, c.log_weight);
  std::vector<double> w;
  for (const auto& c : cands) w.push_back(std::max(std::exp(c.log_weight - top), 1e-300));
  return w;
}

void finish(ValueResult& r, double scaled, double top) {
  r.log_value = scaled > 0 ? std::log(scaled) + top : -kInf;
  r.value = std::exp(r.log_value);
}

ValueResult cover_impl(const OuterMeasureProblem& p, Weighting wt, bool fixed) {
  const Built b = build(p, false, wt, fixed);
  const std::size_t m = p.z.size();
  double top;
  const std::vector<double> w = scaled_weights(b.cands, top);
  ValueResult r;
  r.sup_exact = b.sup_exact;
  SubsetResult s;
  if (m <= p.exact_cap && m <= 64) {
    std::vector<std::uint64_t> sets;
    for (const auto& c : b.cands) {
      std::uint64_t bits = 0;
      for (std::size_t e = 0; e < m; ++e)
        if (c.members.test(e)) bits |= std::uint64_t{1} << e;
      sets.push_back(bits);
    }
    s = min_weight_cover_exact(m, sets, w);
  } else {
    std::vector<Bits> sets;
    for (const auto& c : b.cands) {
      Bits bits = c.members;
      bits.resize(m);
      sets.push_back(std::move(bits));
    }
    s = min_weight_cover_greedy(m, sets, w);
  }
  r.exact = s.exact;
  r.chosen = s.chosen;
  finish(r, s.value, top);
  return r;
}

ValueResult packing_impl(const OuterMeasureProblem& p, Weighting wt) {
  const Built b = build(p, true, wt, false);
  const std::size_t m = b.cands.size();
  double top;
  const std::vector<double> w = scaled_weights(b.cands, top);
  ValueResult r;
  r.sup_exact = b.sup_exact;
  double total = 0.0;
  if (m <= p.packing_exact_cap && m <= 64) {
    std::vector<std::uint64_t> adj(m, 0);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t c = 0; c < m; ++c)
        if (a != c && !b.cands[a].members.intersects(b.cands[c].members))
          adj[a] |= std::uint64_t{1} << c;
    const SubsetResult s = max_weight_clique_exact(adj, w);
    r.chosen = s.chosen;
    total = s.value;
    r.exact = true;
  } else {
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t c) { return w[a] > w[c]; });
    Bits used(b.universe.size());
    for (std::size_t i : order) {
      if (used.intersects(b.cands[i].members)) continue;
      used |= b.cands[i].members;
      r.chosen.push_back(i);
      total += w[i];
    }
    std::sort(r.chosen.begin(), r.chosen.end());
    r.exact = false;
  }
  finish(r, total, top);
  return r;
}

}  // namespace

ValueResult cover_value(const OuterMeasureProblem& p) {
  p.validate(Structure::cover_m);
  return cover_impl(p, Weighting::bowen, false);
}

ValueResult fixed_length_value(const OuterMeasureProblem& p) {
  p.validate(Structure::cover_fixed);
  return cover_impl(p, Weighting::bowen, true);
}

ValueResult packing_value(const OuterMeasureProblem& p) {
  p.validate(Structure::packing);
  return packing_impl(p, Weighting::bowen);
}

ValueResult bs_value(const OuterMeasureProblem& p) {
  p.validate(Structure::bs);
  return cover_impl(p, Weighting::bs, false);
}

ValueResult packing_bs_value(const OuterMeasureProblem& p) {
  p.validate(Structure::packing_bs);
  return packing_impl(p, Weighting::bs);
}

ValueResult weighted_value(const OuterMeasureProblem& p) {
  p.validate(Structure::weighted);
  const Built b = build(p, false, Weighting::bs, false);
  const std::size_t m = p.z.size();
  double top;
  const std::vector<double> w = scaled_weights(b.cands, top);
  std::vector<Bits> sets;
  for (const auto& c : b.cands) {
    Bits bits = c.members;
    bits.resize(m);
    sets.push_back(std::move(bits));
  }
  const LpResult lp = fractional_cover_lp(m, sets, w);
  ValueResult r;
  r.sup_exact = b.sup_exact;
  r.exact = lp.optimal;
  for (std::size_t i = 0; i < lp.x.size(); ++i)
    if (lp.x[i] > 1e-12) r.chosen.push_back(i);
  finish(r, lp.value, top);
  return r;
}

ValueResult structure_value(const OuterMeasureProblem& p, Structure s) {
  switch (s) {
    case Structure::cover_m: return cover_value(p);
    case Structure::cover_fixed: return fixed_length_value(p);
    case Structure::packing: return packing_value(p);
    case Structure::bs: return bs_value(p);
    case Structure::packing_bs: return packing_bs_value(p);
    case Structure::weighted: return weighted_value(p);
  }
  throw PreconditionError("unknown structure");
}

// ---- refined packing ----

namespace {

OuterMeasureProblem block_problem(const OuterMeasureProblem& p, const std::vector<std::size_t>& block) {
  OuterMeasureProblem q = p;
  q.z.clear();
  q.extras.clear();
  std::vector<char> in(p.z.size(), 0);
  for (std::size_t i : block) {
    in[i] = 1;
    q.z.push_back(p.z[i]);
  }
  for (std::size_t i = 0; i < p.z.size(); ++i)
    if (!in[i]) q.extras.push_back(p.z[i]);
  q.extras.insert(q.extras.end(), p.extras.begin(), p.extras.end());
  return q;
}

}  // namespace

ValueResult refined_packing_value(const OuterMeasureProblem& p, std::size_t max_blocks,
                                  bool bs_weights) {
  p.validate(bs_weights ? Structure::packing_bs : Structure::packing);
  if (max_blocks < 1) throw PreconditionError("partition cap must be at least 1");
  const std::size_t m = p.z.size();
  auto pack = [&](const std::vector<std::size_t>& block) {
    const OuterMeasureProblem q = block_problem(p, block);
    return bs_weights ? packing_bs_value(q) : packing_value(q);
  };
  std::vector<std::size_t> all(m);
  std::iota(all.begin(), all.end(), 0);
  ValueResult best = pack(all);

  if (m <= 8) {
    std::map<unsigned, ValueResult> memo;
    auto block_value = [&](unsigned mask) -> const ValueResult& {
      auto it = memo.find(mask);
      if (it != memo.end()) return it->second;
      std::vector<std::size_t> block;
      for (std::size_t i = 0; i < m; ++i)
        if (mask >> i & 1u) block.push_back(i);
      return memo.emplace(mask, pack(block)).first->second;
    };
    // Restricted growth strings enumerate each set partition once.
    std::vector<std::size_t> rgs(m, 0), maxv(m, 0);
    for (;;) {
      const std::size_t blocks = (m ? maxv[m - 1] : 0) + 1;
      if (blocks <= max_blocks) {
        std::vector<unsigned> masks(blocks, 0);
        for (std::size_t i = 0; i < m; ++i) masks[rgs[i]] |= 1u << i;
        double sum = 0.0;
        bool exact = true, sup_exact = true;
        for (unsigned mk : masks) {
          const ValueResult& v = block_value(mk);
          sum += v.value;
          exact = exact && v.exact;
          sup_exact = sup_exact && v.sup_exact;
        }
        if (sum < best.value) {
          best.value = sum;
          best.log_value = std::log(sum);
          best.exact = exact;
          best.sup_exact = sup_exact;
          best.chosen.clear();
        }
      }
      std::size_t i = m - 1;
      while (i >= 1 && rgs[i] > maxv[i - 1]) --i;
      if (i < 1) break;
      ++rgs[i];
      maxv[i] = std::max(maxv[i - 1], rgs[i]);
      for (std::size_t j = i + 1; j < m; ++j) {
        rgs[j] = 0;
        maxv[j] = maxv[i];
      }
    }
    return best;
  }

  // Agglomerative: start from singletons, merge the pair that lowers the sum
  // most (or raises it least while over the block cap).
  best.exact = false;
  if (m > 64) return best;
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<double> vals;
  for (std::size_t i = 0; i < m; ++i) {
    blocks.push_back({i});
    vals.push_back(pack(blocks.back()).value);
  }
  for (;;) {
    double best_delta = kInf;
    std::size_t ba = 0, bb = 0;
    double merged_val = 0;
    for (std::size_t a = 0; a < blocks.size(); ++a)
      for (std::size_t c = a + 1; c < blocks.size(); ++c) {
        std::vector<std::size_t> u = blocks[a];
        u.insert(u.end(), blocks[c].begin(), blocks[c].end());
        const double v = pack(u).value;
        const double delta = v - vals[a] - vals[c];
        if (delta < best_delta) {
          best_delta = delta;
          ba = a;
          bb = c;
          merged_val = v;
        }
      }
    if (blocks.size() <= 1 || (best_delta >= 0 && blocks.size() <= max_blocks)) break;
    blocks[ba].insert(blocks[ba].end(), blocks[bb].begin(), blocks[bb].end());
    vals[ba] = merged_val;
    blocks.erase(blocks.begin() + static_cast<long>(bb));
    vals.erase(vals.begin() + static_cast<long>(bb));
  }
  const double sum = std::accumulate(vals.begin(), vals.end(), 0.0);
  if (blocks.size() <= max_blocks && sum < best.value) {
    best.value = sum;
    best.log_value = std::log(sum);
    best.chosen.clear();
  }
  return best;
}

// ---- critical exponent ----

CriticalValue critical_lambda(const std::function<double(double)>& valuation, double tol,
                              double threshold) {
  if (!(tol > 0)) throw ConfigError("tol", "tolerance must be positive");
  CriticalValue cv;
  cv.threshold = threshold;
  double lo = -1.0, hi = 1.0;
  constexpr double kLimit = 1e6;
  while (!(valuation(lo) >= threshold)) {
    lo *= 2;
    if (lo < -kLimit) {
      cv.degenerate = true;
      cv.lo = cv.hi = cv.lambda = lo;
      return cv;
    }
  }
  while (!(valuation(hi) < threshold)) {
    hi *= 2;
    if (hi > kLimit) {
      cv.degenerate = true;
      cv.lo = cv.hi = cv.lambda = hi;
      return cv;
    }
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (valuation(mid) >= threshold)
      lo = mid;
    else
      hi = mid;
    ++cv.iterations;
  }
  cv.lo = lo;
  cv.hi = hi;
  cv.lambda = 0.5 * (lo + hi);
  return cv;
}

DimensionEstimate subset_mdim(const SystemFamily& family,
                              const std::function<PointSet(const SystemModel&, double)>& z_of,
                              const Potential& phi, Structure s,
                              const std::vector<double>& eps_schedule,
                              const SubsetMdimOptions& opt) {
  if (eps_schedule.size() < 3) throw ConfigError("eps", "subset estimate needs at least three scales");
  std::vector<double> lam(eps_schedule.size());
  std::vector<char> exact(eps_schedule.size(), 1);
  parallel_for(eps_schedule.size(), [&](std::size_t i) {
    OuterMeasureProblem p{family.at(eps_schedule[i]), {}, {}, phi};
    p.z = z_of(p.sys, eps_schedule[i]);
    p.N = opt.N;
    p.n_max = opt.n_max;
    p.eps = eps_schedule[i];
    p.exact_cap = opt.exact_cap;
    bool ex = true;
    const CriticalValue cv = critical_lambda(
        [&](double l) {
          OuterMeasureProblem q = p;
          q.lambda = l;
          const ValueResult v = structure_value(q, s);
          ex = ex && v.exact && v.sup_exact;
          return v.value;
        },
        opt.tol);
    lam[i] = cv.lambda;
    exact[i] = ex && !cv.degenerate;
  });
  DimensionEstimate d = fit_dimension(eps_schedule, lam, {});
  d.exact = std::all_of(exact.begin(), exact.end(), [](char c) { return c != 0; });
  return d;
}

}  // namespace mmdim
