#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace mmdim {

enum class ShiftKind { full, grid };
enum class Sidedness { one_sided, two_sided };
enum class SymbolMetric { discrete, abs_diff };

std::string to_string(ShiftKind);
std::string to_string(Sidedness);
std::string to_string(SymbolMetric);

struct SystemParams {
  ShiftKind kind = ShiftKind::full;
  int k = 2;
  Sidedness sidedness = Sidedness::one_sided;
  int window = 16;
  SymbolMetric symbol_metric = SymbolMetric::discrete;
  double weight_base = 0.5;
  // Smallest radius the model will be queried at; drives the window check.
  double eps_min = 0.1;
  std::size_t enumeration_cap = 2'000'000;
};

// A point at finite resolution. One-sided windows hold coordinates 0..W-1,
// two-sided windows hold -W..W with `origin` = W.
struct PointWindow {
  std::vector<std::uint16_t> symbols;
  int origin = 0;

  bool operator==(const PointWindow& o) const {
    return origin == o.origin && symbols == o.symbols;
  }
  bool operator<(const PointWindow& o) const { return symbols < o.symbols; }
};

using PointSet = std::vector<PointWindow>;

// Shift on k symbols with metric d(x,y) = sum_i w^|i| delta(x_i, y_i),
// truncated to the retained window. Immutable after construction.
class SystemModel {
 public:
  explicit SystemModel(const SystemParams& p);

  const SystemParams& params() const { return p_; }
  int k() const { return p_.k; }
  int window() const { return p_.window; }
  bool two_sided() const { return p_.sidedness == Sidedness::two_sided; }
  int length() const { return length_; }
  int origin() const { return origin_; }
  // Number of genuine coordinates at index >= 0.
  int right_extent() const { return length_ - origin_; }

  double symbol_distance(int a, int b) const {
    if (a == b) return 0.0;
    if (p_.symbol_metric == SymbolMetric::discrete) return 1.0;
    return (a > b ? a - b : b - a) * inv_k_;
  }
  double max_symbol_distance() const;
  // Smallest positive symbol distance.
  double min_symbol_gap() const;
  double weight(int i) const;

  // Truncated metric between two windows of this system.
  double metric(const PointWindow& x, const PointWindow& y) const;
  // d(f^j x, f^j y) computed in place, equal to metric of shifted windows.
  double shifted_metric(const PointWindow& x, const PointWindow& y, int j) const;

  // Upper bound on the contribution of coordinates outside the window to
  // d(f^j x, f^j y) for any j < order.
  double tail_bound(int order) const;

  PointWindow apply_map(const PointWindow& x) const;

  // Symbol at coordinate i (relative to the origin).
  int coord(const PointWindow& x, int i) const { return x.symbols[origin_ + i]; }

  // Word placed at coordinates 0..len-1, zeros elsewhere.
  PointWindow make_point(const std::vector<int>& word) const;
  // All k^depth words of length depth, lexicographic with coordinate 0 most
  // significant. Throws CapExceeded past the enumeration cap.
  PointSet enumerate_points(int depth) const;

  void check_point(const PointWindow& x) const;

 private:
  SystemParams p_;
  int length_;
  int origin_;
  double inv_k_;
  std::vector<double> wpow_;  // w^t for t in [0, length]
};

// Real-valued function of finitely many coordinates. The table is indexed by
// the word on coordinates 0..range-1 with coordinate 0 most significant.
class Potential {
 public:
  enum class Kind { constant, coordinate, finite_range };

  static Potential constant(double c);
  static Potential coordinate(std::vector<double> per_symbol);
  static Potential finite_range(int k, int range, std::vector<double> table);
  // a*phi + b*psi, expanded to the larger range.
  static Potential affine(double a, const Potential& phi, double b, const Potential& psi);

  Kind kind() const { return kind_; }
  int range() const { return range_; }
  int k() const { return k_; }
  const std::vector<double>& table() const { return table_; }
  bool is_constant() const { return range_ == 0; }

  double sup() const;
  double inf() const;
  double norm() const;

  // phi(f^j x).
  double eval(const SystemModel& sys, const PointWindow& x, int j = 0) const;
  // sup{|phi(x)-phi(y)| : d(x,y) <= eps}, exact by enumerating word pairs.
  double modulus(const SystemModel& sys, double eps) const;

 private:
  Kind kind_ = Kind::constant;
  int k_ = 0;
  int range_ = 0;
  std::vector<double> table_{0.0};
};

// S_n phi(x) = sum_{i<n} phi(f^i x). Throws WindowExhausted when a
// non-constant potential would read past the retained window.
double birkhoff_sum(const SystemModel& sys, const Potential& phi, const PointWindow& x, int n);

// Largest n for which birkhoff_sum is defined on this system.
int max_birkhoff_order(const SystemModel& sys, const Potential& phi);

}  // namespace mmdim
