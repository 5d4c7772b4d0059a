#include "mmdim/bowen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mmdim/error.hpp"

namespace mmdim {

double bowen_distance(const SystemModel& sys, const PointWindow& x, const PointWindow& y, int n) {
  if (n < 1) throw PreconditionError("bowen order must be at least 1");
  if (n > sys.window()) throw WindowExhausted("bowen order exceeds the window");
  sys.check_point(x);
  sys.check_point(y);
  const int len = sys.length();
  const int origin = sys.origin();
  double best = 0.0;
  for (int j = 0; j < n; ++j) {
    double d = 0.0;
    const int center = origin + j;
    for (int p = j; p < len; ++p) {
      const int a = x.symbols[p], b = y.symbols[p];
      if (a == b) continue;
      d += sys.weight(p - center) * sys.symbol_distance(a, b);
    }
    best = std::max(best, d);
  }
  return best;
}

bool in_open_ball(const SystemModel& sys, double dn, int n, double r) {
  return dn + sys.tail_bound(n) < r;
}

bool in_closed_ball(const SystemModel& sys, double dn, int n, double r) {
  return dn + sys.tail_bound(n) <= r;
}

bool ball_contains(const SystemModel& sys, const BallSpec& ball, const PointWindow& y) {
  const double d = bowen_distance(sys, ball.center, y, ball.order);
  return ball.closed ? in_closed_ball(sys, d, ball.order, ball.radius)
                     : in_open_ball(sys, d, ball.order, ball.radius);
}

void SetFamily::validate() const {
  if (!weights.empty() && weights.size() != balls.size())
    throw PreconditionError("family weights must match the number of balls");
  for (double w : weights)
    if (!(w > 0)) throw PreconditionError("family weights must be positive");
  for (const auto& b : balls) {
    if (b.order < 1) throw PreconditionError("ball order must be at least 1");
    if (!(b.radius > 0)) throw PreconditionError("ball radius must be positive");
  }
}

// ---- BowenTable ----

BowenTable::BowenTable(const SystemModel& sys, const PointSet& pts, int n)
    : sys_(&sys), pts_(&pts), n_(n), slack_(sys.tail_bound(n)) {
  const std::size_t m = pts.size();
  if (m <= 2048) {
    cache_.assign(m * m, 0.0);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b) {
        const double d = bowen_distance(sys, pts[a], pts[b], n);
        cache_[a * m + b] = d;
        cache_[b * m + a] = d;
      }
  } else if (n > sys.window()) {
    throw WindowExhausted("bowen order exceeds the window");
  }
}

double BowenTable::distance(std::size_t a, std::size_t b) const {
  if (!cache_.empty()) return cache_[a * pts_->size() + b];
  if (a == b) return 0.0;
  return bowen_distance(*sys_, (*pts_)[a], (*pts_)[b], n_);
}

bool BowenTable::within_open(std::size_t a, std::size_t b, double r) const {
  return distance(a, b) + slack_ < r;
}

bool BowenTable::within_closed(std::size_t a, std::size_t b, double r) const {
  return distance(a, b) + slack_ <= r;
}

// ---- separated / spanning ----

std::vector<std::size_t> lexicographic_order(const PointSet& z) {
  std::vector<std::size_t> order(z.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return z[a].symbols < z[b].symbols; });
  return order;
}

namespace {

std::vector<double> unit_or(const std::vector<double>* w, std::size_t n) {
  if (w) {
    if (w->size() != n) throw PreconditionError("weights must match the point set");
    for (double v : *w)
      if (!(v > 0)) throw PreconditionError("weights must be positive");
    return *w;
  }
  return std::vector<double>(n, 1.0);
}

}  // namespace

SeparatedResult max_separated(const SystemModel& sys, const PointSet& z, int n, double eps,
                              SearchMode mode, std::size_t exact_cap,
                              const std::vector<double>* weights) {
  SeparatedResult res;
  const std::size_t m = z.size();
  const std::vector<double> w = unit_or(weights, m);
  if (m == 0) {
    res.exact = true;
    return res;
  }
  if (mode == SearchMode::exact) {
    if (m > exact_cap || m > 64)
      throw CapExceeded("exact separated search over " + std::to_string(m) +
                        " points exceeds the cap " + std::to_string(exact_cap));
    BowenTable t(sys, z, n);
    std::vector<std::uint64_t> adj(m, 0);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b)
        if (a != b && t.separated(a, b, eps)) adj[a] |= std::uint64_t{1} << b;
    SubsetResult r = max_weight_clique_exact(adj, w);
    res.indices = r.chosen;
    res.exact = true;
  } else {
    BowenTable t(sys, z, n);
    for (std::size_t v : lexicographic_order(z)) {
      bool ok = true;
      for (std::size_t u : res.indices)
        if (!t.separated(u, v, eps)) {
          ok = false;
          break;
        }
      if (ok) res.indices.push_back(v);
    }
    std::sort(res.indices.begin(), res.indices.end());
  }
  for (std::size_t i : res.indices) res.weight += w[i];
  return res;
}

SpanningResult min_spanning(const SystemModel& sys, const PointSet& z, int n, double eps,
                            SearchMode mode, std::size_t exact_cap,
                            const std::vector<double>* weights) {
  SpanningResult res;
  const std::size_t m = z.size();
  const std::vector<double> w = unit_or(weights, m);
  if (m == 0) {
    res.exact = true;
    return res;
  }
  BowenTable t(sys, z, n);
  if (mode == SearchMode::exact) {
    if (m > exact_cap || m > 64)
      throw CapExceeded("exact spanning search over " + std::to_string(m) +
                        " points exceeds the cap " + std::to_string(exact_cap));
    std::vector<std::uint64_t> sets(m, 0);
    for (std::size_t c = 0; c < m; ++c)
      for (std::size_t y = 0; y < m; ++y)
        if (c == y || t.within_open(c, y, eps)) sets[c] |= std::uint64_t{1} << y;
    SubsetResult r = min_weight_cover_exact(m, sets, w);
    res.centers = r.chosen;
    res.weight = r.value;
    res.exact = true;
    return res;
  }
  std::vector<Bits> sets(m, Bits(m));
  for (std::size_t c = 0; c < m; ++c) {
    sets[c].set(c);
    for (std::size_t y = c + 1; y < m; ++y)
      if (t.within_open(c, y, eps)) {
        sets[c].set(y);
        sets[y].set(c);
      }
  }
  SubsetResult r = min_weight_cover_greedy(m, sets, w);
  res.centers = r.chosen;
  res.weight = r.value;
  return res;
}

bool is_separated_set(const SystemModel& sys, const PointSet& z, const std::vector<std::size_t>& idx,
                      int n, double eps) {
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b)
      if (in_open_ball(sys, bowen_distance(sys, z[idx[a]], z[idx[b]], n), n, eps)) return false;
  return true;
}

bool is_spanning_set(const SystemModel& sys, const PointSet& z, const std::vector<std::size_t>& centers,
                     int n, double eps) {
  for (std::size_t y = 0; y < z.size(); ++y) {
    bool hit = false;
    for (std::size_t c : centers) {
      if (c == y || in_open_ball(sys, bowen_distance(sys, z[c], z[y], n), n, eps)) {
        hit = true;
        break;
      }
    }
    if (!hit) return false;
  }
  return true;
}

// ---- 5r ----

namespace {

Bits members(const SystemModel& sys, const BallSpec& ball, const PointSet& universe) {
  Bits b(universe.size());
  for (std::size_t u = 0; u < universe.size(); ++u)
    if (ball_contains(sys, ball, universe[u])) b.set(u);
  return b;
}

}  // namespace

DisjointifyResult five_r_disjointify(const SystemModel& sys, const SetFamily& family,
                                     const PointSet& universe) {
  family.validate();
  DisjointifyResult out;
  if (family.balls.empty()) return out;
  const int order = family.balls.front().order;
  for (const auto& b : family.balls) {
    if (!b.closed) throw PreconditionError("disjointification expects closed balls");
    if (b.order != order) throw PreconditionError("disjointification expects a common order");
  }
  std::vector<std::size_t> idx(family.balls.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return family.balls[a].radius > family.balls[b].radius;
  });
  std::vector<Bits> kept_members;
  for (std::size_t i : idx) {
    Bits mb = members(sys, family.balls[i], universe);
    bool disjoint = true;
    for (const auto& k : kept_members)
      if (k.intersects(mb)) {
        disjoint = false;
        break;
      }
    if (!disjoint) continue;
    kept_members.push_back(std::move(mb));
    out.kept_index.push_back(i);
    out.kept.balls.push_back(family.balls[i]);
    if (!family.weights.empty()) out.kept.weights.push_back(family.weights[i]);
  }
  return out;
}

FiveRCheck check_five_r(const SystemModel& sys, const SetFamily& family, const SetFamily& kept,
                        const PointSet& universe, double factor) {
  FiveRCheck res;
  std::vector<Bits> km;
  for (const auto& b : kept.balls) km.push_back(members(sys, b, universe));
  for (std::size_t a = 0; a < km.size(); ++a)
    for (std::size_t b = a + 1; b < km.size(); ++b)
      if (km[a].intersects(km[b])) res.disjoint = false;
  Bits uni(universe.size());
  for (const auto& b : family.balls) uni |= members(sys, b, universe);
  Bits inflated(universe.size());
  for (const auto& b : kept.balls) {
    BallSpec big = b;
    big.radius *= factor;
    inflated |= members(sys, big, universe);
  }
  res.covered = uni.is_subset_of(inflated);
  return res;
}

CountResult count_separated_spanning(const SystemModel& sys, const PointSet& z, int n, double eps,
                                     std::size_t exact_cap) {
  CountResult c;
  if (z.empty()) {
    c.s_exact = 0;
    c.r_exact = 0;
    return c;
  }
  c.s_lower = max_separated(sys, z, n, eps, SearchMode::greedy).indices.size();
  c.r_upper = min_spanning(sys, z, n, eps, SearchMode::greedy).centers.size();
  if (z.size() <= exact_cap && z.size() <= 64) {
    c.s_exact = max_separated(sys, z, n, eps, SearchMode::exact, exact_cap).indices.size();
    c.r_exact = min_spanning(sys, z, n, eps, SearchMode::exact, exact_cap).centers.size();
  }
  return c;
}

}  // namespace mmdim
