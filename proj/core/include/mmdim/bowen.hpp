#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mmdim/combinatorics.hpp"
#include "mmdim/systems.hpp"

namespace mmdim {

// d_n(x,y) = max_{j<n} d(f^j x, f^j y) on the truncated metric.
double bowen_distance(const SystemModel& sys, const PointWindow& x, const PointWindow& y, int n);

// Radius comparisons with the truncation tail added to the computed distance:
// a point is inside an open ball only if d_n + tail < r, inside a closed ball
// only if d_n + tail <= r. Two points are (n,eps)-separated iff they are not
// inside each other's open eps-ball.
bool in_open_ball(const SystemModel& sys, double dn, int n, double r);
bool in_closed_ball(const SystemModel& sys, double dn, int n, double r);

struct BallSpec {
  PointWindow center;
  int order = 1;
  double radius = 1.0;
  bool closed = false;
};

bool ball_contains(const SystemModel& sys, const BallSpec& ball, const PointWindow& y);

struct SetFamily {
  std::vector<BallSpec> balls;
  std::vector<double> weights;  // empty or one positive weight per ball

  void validate() const;
};

// Pairwise d_n over a point set, cached when the set is small.
class BowenTable {
 public:
  BowenTable(const SystemModel& sys, const PointSet& pts, int n);

  std::size_t size() const { return pts_->size(); }
  int order() const { return n_; }
  double distance(std::size_t a, std::size_t b) const;
  bool within_open(std::size_t a, std::size_t b, double r) const;
  bool within_closed(std::size_t a, std::size_t b, double r) const;
  bool separated(std::size_t a, std::size_t b, double eps) const { return !within_open(a, b, eps); }

 private:
  const SystemModel* sys_;
  const PointSet* pts_;
  int n_;
  double slack_;
  std::vector<double> cache_;  // row-major, empty when uncached
};

enum class SearchMode { exact, greedy };

struct SeparatedResult {
  std::vector<std::size_t> indices;  // into Z, ascending
  double weight = 0.0;               // sum of weights (cardinality if unweighted)
  bool exact = false;
};

inline constexpr std::size_t kDefaultExactCap = 24;

// Indices of Z sorted lexicographically by symbols.
std::vector<std::size_t> lexicographic_order(const PointSet& z);

// Pairwise (n,eps)-separated subset of Z. Exact mode maximises cardinality
// (or total weight when weights are given) by clique search; greedy mode scans
// Z lexicographically and returns a maximal set.
SeparatedResult max_separated(const SystemModel& sys, const PointSet& z, int n, double eps,
                              SearchMode mode, std::size_t exact_cap = kDefaultExactCap,
                              const std::vector<double>* weights = nullptr);

struct SpanningResult {
  std::vector<std::size_t> centers;  // into Z, ascending
  double weight = 0.0;
  bool exact = false;
};

// Centers drawn from Z whose open (n,eps)-balls cover Z. Exact mode solves the
// (weighted) set cover; greedy mode takes the largest coverage first.
SpanningResult min_spanning(const SystemModel& sys, const PointSet& z, int n, double eps,
                            SearchMode mode, std::size_t exact_cap = kDefaultExactCap,
                            const std::vector<double>* weights = nullptr);

bool is_separated_set(const SystemModel& sys, const PointSet& z, const std::vector<std::size_t>& idx,
                      int n, double eps);
bool is_spanning_set(const SystemModel& sys, const PointSet& z, const std::vector<std::size_t>& centers,
                     int n, double eps);

struct DisjointifyResult {
  SetFamily kept;
  std::vector<std::size_t> kept_index;  // positions in the input family
};

// Greedy by descending radius (stable), keeping a ball iff it shares no point
// of `universe` with any kept ball. Closed balls at a common order.
DisjointifyResult five_r_disjointify(const SystemModel& sys, const SetFamily& family,
                                     const PointSet& universe);

struct FiveRCheck {
  bool disjoint = true;
  bool covered = true;
};
// Checks pairwise disjointness of `kept` and that every universe point in the
// union of `family` lies in some kept ball inflated to `factor` times its radius.
FiveRCheck check_five_r(const SystemModel& sys, const SetFamily& family, const SetFamily& kept,
                        const PointSet& universe, double factor = 5.0);

struct CountResult {
  std::size_t s_lower = 0;
  std::optional<std::size_t> s_exact;
  std::size_t r_upper = 0;
  std::optional<std::size_t> r_exact;
};

CountResult count_separated_spanning(const SystemModel& sys, const PointSet& z, int n, double eps,
                                     std::size_t exact_cap = kDefaultExactCap);

}  // namespace mmdim
