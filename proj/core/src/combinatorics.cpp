#include "mmdim/combinatorics.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <tuple>

#include "mmdim/error.hpp"

namespace mmdim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline int lowest(std::uint64_t m) { return std::countr_zero(m); }

struct CliqueSearch {
  std::vector<std::uint64_t> adj;  // in sorted order
  std::vector<double> w;           // sorted by weight, descending
  double best = -1.0;
  std::uint64_t best_set = 0;

  // Greedy colouring bound: split P into independent classes and add the
  // heaviest weight of each class.
  double colour_bound(std::uint64_t p) const {
    double bound = 0.0;
    while (p) {
      std::uint64_t cls = p, taken = 0;
      double top = 0.0;
      while (cls) {
        const int v = lowest(cls);
        cls &= ~(std::uint64_t{1} << v);
        taken |= std::uint64_t{1} << v;
        top = std::max(top, w[v]);
        cls &= ~adj[v];
      }
      bound += top;
      p &= ~taken;
    }
    return bound;
  }

  void expand(std::uint64_t r, std::uint64_t p, double weight) {
    if (!p) {
      if (weight > best) {
        best = weight;
        best_set = r;
      }
      return;
    }
    while (p) {
      if (weight + colour_bound(p) <= best) return;
      const int v = lowest(p);
      const std::uint64_t bit = std::uint64_t{1} << v;
      expand(r | bit, p & adj[v], weight + w[v]);
      p &= ~bit;
    }
  }
};

}  // namespace

SubsetResult max_weight_clique_exact(const std::vector<std::uint64_t>& adj,
                                     const std::vector<double>& weight) {
  const std::size_t n = adj.size();
  if (n > 64) throw CapExceeded("exact clique search limited to 64 vertices");
  SubsetResult res;
  res.exact = true;
  if (n == 0) return res;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return weight[a] > weight[b]; });
  std::vector<int> pos(n);
  for (std::size_t i = 0; i < n; ++i) pos[order[i]] = static_cast<int>(i);
  CliqueSearch s;
  s.adj.assign(n, 0);
  s.w.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.w[i] = weight[order[i]];
    std::uint64_t m = adj[order[i]];
    while (m) {
      const int u = lowest(m);
      m &= m - 1;
      if (static_cast<std::size_t>(u) != order[i]) s.adj[i] |= std::uint64_t{1} << pos[u];
    }
  }
  const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
  s.expand(0, all, 0.0);
  std::uint64_t m = s.best_set;
  while (m) {
    const int v = lowest(m);
    m &= m - 1;
    res.chosen.push_back(order[v]);
  }
  std::sort(res.chosen.begin(), res.chosen.end());
  res.value = std::max(s.best, 0.0);
  return res;
}

SubsetResult greedy_clique(const std::vector<Bits>& adj, const std::vector<double>& weight,
                           const std::vector<std::size_t>& order) {
  SubsetResult res;
  const std::size_t n = adj.size();
  Bits candidates(n);
  candidates.set();
  for (std::size_t v : order) {
    if (!candidates.test(v)) continue;
    res.chosen.push_back(v);
    res.value += weight[v];
    candidates &= adj[v];
  }
  std::sort(res.chosen.begin(), res.chosen.end());
  return res;
}

namespace {

struct CoverSearch {
  std::vector<std::uint64_t> sets;
  std::vector<double> w;
  std::vector<std::vector<std::size_t>> by_element;  // sets covering e, cheapest first
  std::vector<double> min_w;
  double best = kInf;
  std::vector<std::size_t> best_sets, current;

  double lower_bound(std::uint64_t unc) const {
    double lb = 0.0;
    while (unc) {
      const int e = lowest(unc);
      unc &= unc - 1;
      lb = std::max(lb, min_w[e]);
    }
    return lb;
  }

  void search(std::uint64_t unc, double cost) {
    if (!unc) {
      if (cost < best) {
        best = cost;
        best_sets = current;
      }
      return;
    }
    if (cost + lower_bound(unc) >= best) return;
    // Branch on the uncovered element with the fewest useful sets.
    int pick = -1;
    std::size_t fewest = std::numeric_limits<std::size_t>::max();
    std::uint64_t m = unc;
    while (m) {
      const int e = lowest(m);
      m &= m - 1;
      if (by_element[e].size() < fewest) {
        fewest = by_element[e].size();
        pick = e;
      }
    }
    for (std::size_t s : by_element[pick]) {
      current.push_back(s);
      search(unc & ~sets[s], cost + w[s]);
      current.pop_back();
    }
  }
};

}  // namespace

SubsetResult min_weight_cover_exact(std::size_t elements, const std::vector<std::uint64_t>& sets,
                                    const std::vector<double>& weight) {
  if (elements > 64) throw CapExceeded("exact cover search limited to 64 elements");
  SubsetResult res;
  res.exact = true;
  if (elements == 0) return res;
  CoverSearch s;
  s.sets = sets;
  s.w = weight;
  s.by_element.assign(elements, {});
  s.min_w.assign(elements, kInf);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    std::uint64_t m = sets[i];
    while (m) {
      const int e = lowest(m);
      m &= m - 1;
      if (static_cast<std::size_t>(e) >= elements) continue;
      s.by_element[e].push_back(i);
      s.min_w[e] = std::min(s.min_w[e], weight[i]);
    }
  }
  for (auto& v : s.by_element) {
    if (v.empty()) {
      res.value = kInf;
      return res;
    }
    std::stable_sort(v.begin(), v.end(), [&](std::size_t a, std::size_t b) {
      const double ra = weight[a] / std::popcount(sets[a]);
      const double rb = weight[b] / std::popcount(sets[b]);
      return ra < rb;
    });
  }
  // Seed the bound with the greedy cover.
  std::vector<Bits> dyn;
  dyn.reserve(sets.size());
  for (auto m : sets) {
    Bits b(elements);
    for (std::size_t e = 0; e < elements; ++e)
      if ((m >> e) & 1) b.set(e);
    dyn.push_back(b);
  }
  SubsetResult g = min_weight_cover_greedy(elements, dyn, weight);
  s.best = g.value * (1.0 + 1e-12) + 1e-300;
  s.best_sets = g.chosen;
  const std::uint64_t all = elements == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << elements) - 1);
  s.search(all, 0.0);
  res.chosen = s.best_sets;
  std::sort(res.chosen.begin(), res.chosen.end());
  res.value = 0.0;
  for (std::size_t i : res.chosen) res.value += weight[i];
  return res;
}

SubsetResult min_weight_cover_greedy(std::size_t elements, const std::vector<Bits>& sets,
                                     const std::vector<double>& weight) {
  SubsetResult res;
  Bits unc(elements);
  unc.set();
  // Lazy greedy: stored keys are lower bounds of current cost-per-element.
  using Key = std::tuple<double, std::size_t>;
  std::priority_queue<Key, std::vector<Key>, std::greater<Key>> pq;
  auto ratio = [&](std::size_t i) {
    const std::size_t gain = (sets[i] & unc).count();
    return gain == 0 ? kInf : weight[i] / static_cast<double>(gain);
  };
  for (std::size_t i = 0; i < sets.size(); ++i) {
    const double r = ratio(i);
    if (r < kInf || (std::isinf(weight[i]) && sets[i].any())) pq.emplace(r, i);
  }
  while (unc.any()) {
    if (pq.empty()) {
      res.value = kInf;
      return res;
    }
    auto [r_old, i] = pq.top();
    pq.pop();
    const double r = ratio(i);
    const std::size_t gain = (sets[i] & unc).count();
    if (gain == 0) continue;
    if (!pq.empty() && Key{r, i} > pq.top()) {
      pq.emplace(r, i);
      continue;
    }
    res.chosen.push_back(i);
    res.value += weight[i];
    unc -= sets[i];
  }
  std::sort(res.chosen.begin(), res.chosen.end());
  return res;
}

LpResult fractional_cover_lp(std::size_t elements, const std::vector<Bits>& sets,
                             const std::vector<double>& weight) {
  LpResult out;
  out.x.assign(sets.size(), 0.0);
  if (elements == 0) {
    out.optimal = true;
    return out;
  }
  // Sets with infinite cost can never carry weight; drop them from the dual.
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < sets.size(); ++i)
    if (std::isfinite(weight[i]) && sets[i].any()) rows.push_back(i);
  for (std::size_t e = 0; e < elements; ++e) {
    bool covered = false;
    for (std::size_t i : rows) covered = covered || sets[i].test(e);
    if (!covered) {
      out.value = kInf;
      return out;
    }
  }
  const std::size_t m = rows.size(), n = elements, cols = n + m;
  // Row r: sum_e (A[r][e] / w_r) y_e + s_r = 1. Zero-cost sets force y_e = 0
  // on their elements; they are handled by a large row scale.
  std::vector<std::vector<double>> t(m, std::vector<double>(cols + 1, 0.0));
  std::vector<double> row_scale(m);
  for (std::size_t r = 0; r < m; ++r) {
    const double w = weight[rows[r]];
    row_scale[r] = w > 0 ? 1.0 / w : 1e300;
    for (std::size_t e = 0; e < n; ++e)
      if (sets[rows[r]].test(e)) t[r][e] = row_scale[r];
    t[r][n + r] = 1.0;
    t[r][cols] = w > 0 ? 1.0 : 0.0;
  }
  std::vector<double> obj(cols + 1, 0.0);  // reduced costs, z - sum y = 0
  for (std::size_t e = 0; e < n; ++e) obj[e] = -1.0;
  std::vector<std::size_t> basis(m);
  for (std::size_t r = 0; r < m; ++r) basis[r] = n + r;
  const double tol = 1e-11;
  for (int iter = 0; iter < 100000; ++iter) {
    std::size_t enter = cols;
    for (std::size_t j = 0; j < cols; ++j)
      if (obj[j] < -tol) {
        enter = j;
        break;
      }
    if (enter == cols) break;
    std::size_t leave = m;
    double best_ratio = kInf;
    for (std::size_t r = 0; r < m; ++r) {
      if (t[r][enter] > tol) {
        const double ratio = t[r][cols] / t[r][enter];
        if (ratio < best_ratio - 1e-15 ||
            (std::fabs(ratio - best_ratio) <= 1e-15 && basis[r] < basis[leave])) {
          best_ratio = ratio;
          leave = r;
        }
      }
    }
    if (leave == m) {
      out.value = kInf;
      return out;
    }
    const double piv = t[leave][enter];
    for (auto& v : t[leave]) v /= piv;
    for (std::size_t r = 0; r < m; ++r) {
      if (r == leave || t[r][enter] == 0.0) continue;
      const double f = t[r][enter];
      for (std::size_t j = 0; j <= cols; ++j) t[r][j] -= f * t[leave][j];
    }
    const double f = obj[enter];
    for (std::size_t j = 0; j <= cols; ++j) obj[j] -= f * t[leave][j];
    basis[leave] = enter;
  }
  out.value = obj[cols];
  // Primal c_r is the reduced cost of slack r, rescaled to the original row.
  for (std::size_t r = 0; r < m; ++r) out.x[rows[r]] = std::max(0.0, obj[n + r]) * row_scale[r];
  out.optimal = true;
  return out;
}

}  // namespace mmdim
