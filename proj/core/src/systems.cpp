#include "mmdim/systems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmdim/error.hpp"

namespace mmdim {

std::string to_string(ShiftKind k) { return k == ShiftKind::full ? "full-shift" : "grid-shift"; }
std::string to_string(Sidedness s) {
  return s == Sidedness::one_sided ? "one-sided" : "two-sided";
}
std::string to_string(SymbolMetric m) {
  return m == SymbolMetric::discrete ? "discrete" : "abs-diff";
}

SystemModel::SystemModel(const SystemParams& p) : p_(p) {
  if (p.k < 1 || p.k > 65535) throw ConfigError("k", "alphabet size must be in [1, 65535]");
  if (p.window < 1) throw ConfigError("window", "window must be positive");
  if (!(p.weight_base > 0.0 && p.weight_base < 1.0))
    throw ConfigError("weight_base", "weight base must lie in (0,1)");
  if (!(p.eps_min > 0.0)) throw ConfigError("eps_min", "smallest radius must be positive");
  origin_ = two_sided() ? p.window : 0;
  length_ = two_sided() ? 2 * p.window + 1 : p.window;
  inv_k_ = 1.0 / p.k;
  wpow_.resize(static_cast<std::size_t>(length_) + 2);
  wpow_[0] = 1.0;
  for (std::size_t t = 1; t < wpow_.size(); ++t) wpow_[t] = wpow_[t - 1] * p.weight_base;

  const double w = p.weight_base;
  double tail = std::pow(w, right_extent()) / (1.0 - w);
  if (two_sided()) tail += std::pow(w, origin_ + 1) / (1.0 - w);
  if (!(tail < p.eps_min / 10.0))
    throw ConfigError("window", "window too small: tail " + std::to_string(tail) +
                                    " is not below eps_min/10");
}

double SystemModel::max_symbol_distance() const {
  if (p_.k <= 1) return 0.0;
  return p_.symbol_metric == SymbolMetric::discrete ? 1.0 : (p_.k - 1) * inv_k_;
}

double SystemModel::min_symbol_gap() const {
  if (p_.k <= 1) return std::numeric_limits<double>::infinity();
  return p_.symbol_metric == SymbolMetric::discrete ? 1.0 : inv_k_;
}

double SystemModel::weight(int i) const {
  const int a = i < 0 ? -i : i;
  if (a < static_cast<int>(wpow_.size())) return wpow_[a];
  return std::pow(p_.weight_base, a);
}

void SystemModel::check_point(const PointWindow& x) const {
  if (static_cast<int>(x.symbols.size()) != length_ || x.origin != origin_)
    throw ConfigError("system", "point window does not match the system shape");
}

double SystemModel::metric(const PointWindow& x, const PointWindow& y) const {
  return shifted_metric(x, y, 0);
}

double SystemModel::shifted_metric(const PointWindow& x, const PointWindow& y, int j) const {
  check_point(x);
  check_point(y);
  double d = 0.0;
  const int center = origin_ + j;
  for (int p = j; p < length_; ++p) {
    const int a = x.symbols[p], b = y.symbols[p];
    if (a == b) continue;
    const int off = p >= center ? p - center : center - p;
    d += wpow_[off] * symbol_distance(a, b);
  }
  return d;
}

double SystemModel::tail_bound(int order) const {
  const int j = std::max(order, 1) - 1;
  const double w = p_.weight_base;
  double t = std::pow(w, right_extent() - j) / (1.0 - w);
  if (two_sided()) t += std::pow(w, origin_ + 1) / (1.0 - w);
  return max_symbol_distance() * t;
}

PointWindow SystemModel::apply_map(const PointWindow& x) const {
  check_point(x);
  PointWindow y = x;
  std::rotate(y.symbols.begin(), y.symbols.begin() + 1, y.symbols.end());
  y.symbols.back() = 0;
  return y;
}

PointWindow SystemModel::make_point(const std::vector<int>& word) const {
  if (static_cast<int>(word.size()) > right_extent())
    throw WindowExhausted("word longer than the retained window");
  PointWindow x;
  x.origin = origin_;
  x.symbols.assign(length_, 0);
  for (std::size_t t = 0; t < word.size(); ++t) {
    if (word[t] < 0 || word[t] >= p_.k) throw ConfigError("word", "symbol out of range");
    x.symbols[origin_ + t] = static_cast<std::uint16_t>(word[t]);
  }
  return x;
}

PointSet SystemModel::enumerate_points(int depth) const {
  if (depth < 0) throw PreconditionError("depth must be nonnegative");
  if (depth > right_extent()) throw WindowExhausted("depth exceeds the retained window");
  double count = std::pow(static_cast<double>(p_.k), depth);
  if (count > static_cast<double>(p_.enumeration_cap))
    throw CapExceeded("k^depth = " + std::to_string(count) + " exceeds the enumeration cap " +
                      std::to_string(p_.enumeration_cap) + "; sample points instead");
  const std::size_t n = static_cast<std::size_t>(count);
  PointSet out;
  out.reserve(n);
  std::vector<int> word(depth, 0);
  for (std::size_t idx = 0; idx < n; ++idx) {
    out.push_back(make_point(word));
    for (int t = depth - 1; t >= 0; --t) {
      if (++word[t] < p_.k) break;
      word[t] = 0;
    }
  }
  return out;
}

// ---- Potential ----

Potential Potential::constant(double c) {
  Potential p;
  p.kind_ = Kind::constant;
  p.table_ = {c};
  return p;
}

Potential Potential::coordinate(std::vector<double> per_symbol) {
  if (per_symbol.empty()) throw ConfigError("potential", "empty symbol table");
  Potential p;
  p.kind_ = Kind::coordinate;
  p.k_ = static_cast<int>(per_symbol.size());
  p.range_ = 1;
  p.table_ = std::move(per_symbol);
  return p;
}

Potential Potential::finite_range(int k, int range, std::vector<double> table) {
  if (range < 0 || k < 1) throw ConfigError("potential", "bad range or alphabet");
  double size = std::pow(static_cast<double>(k), range);
  if (size > 1e7 || static_cast<double>(table.size()) != size)
    throw ConfigError("potential", "table size must equal k^range");
  if (range == 0) return constant(table[0]);
  Potential p;
  p.kind_ = range == 1 ? Kind::coordinate : Kind::finite_range;
  p.k_ = k;
  p.range_ = range;
  p.table_ = std::move(table);
  return p;
}

namespace {

// Value of `p` on the word of length `range` encoded by idx (alphabet k).
double value_on_word(const Potential& p, int k, int range, std::size_t idx) {
  if (p.is_constant()) return p.table()[0];
  // p reads the first p.range() symbols, which are the most significant digits.
  std::size_t drop = 1;
  for (int t = p.range(); t < range; ++t) drop *= static_cast<std::size_t>(k);
  return p.table()[idx / drop];
}

}  // namespace

Potential Potential::affine(double a, const Potential& phi, double b, const Potential& psi) {
  if (phi.is_constant() && psi.is_constant())
    return constant(a * phi.table_[0] + b * psi.table_[0]);
  const int k = phi.is_constant() ? psi.k_ : phi.k_;
  if (!phi.is_constant() && !psi.is_constant() && phi.k_ != psi.k_)
    throw ConfigError("potential", "potentials over different alphabets");
  const int range = std::max(phi.range_, psi.range_);
  std::size_t size = 1;
  for (int t = 0; t < range; ++t) size *= static_cast<std::size_t>(k);
  std::vector<double> table(size);
  for (std::size_t idx = 0; idx < size; ++idx)
    table[idx] = a * value_on_word(phi, k, range, idx) + b * value_on_word(psi, k, range, idx);
  return finite_range(k, range, std::move(table));
}

double Potential::sup() const { return *std::max_element(table_.begin(), table_.end()); }
double Potential::inf() const { return *std::min_element(table_.begin(), table_.end()); }
double Potential::norm() const { return std::max(std::fabs(sup()), std::fabs(inf())); }

double Potential::eval(const SystemModel& sys, const PointWindow& x, int j) const {
  if (is_constant()) return table_[0];
  if (k_ != sys.k()) throw ConfigError("potential", "potential alphabet differs from the system");
  const int last = j + range_ - 1;
  if (last >= sys.right_extent() || j < 0)
    throw WindowExhausted("potential reads coordinate " + std::to_string(last) +
                          " beyond the retained window");
  std::size_t idx = 0;
  for (int t = 0; t < range_; ++t) idx = idx * k_ + sys.coord(x, j + t);
  return table_[idx];
}

double Potential::modulus(const SystemModel& sys, double eps) const {
  if (is_constant()) return 0.0;
  if (k_ != sys.k()) throw ConfigError("potential", "potential alphabet differs from the system");
  const std::size_t n = table_.size();
  if (n > 4096) throw CapExceeded("modulus enumeration limited to 4096 words");
  std::vector<int> u(range_), v(range_);
  double gamma = 0.0;
  auto decode = [&](std::size_t idx, std::vector<int>& w) {
    for (int t = range_ - 1; t >= 0; --t) {
      w[t] = static_cast<int>(idx % k_);
      idx /= k_;
    }
  };
  for (std::size_t a = 0; a < n; ++a) {
    decode(a, u);
    for (std::size_t b = a + 1; b < n; ++b) {
      decode(b, v);
      double d = 0.0;
      for (int t = 0; t < range_; ++t) d += sys.weight(t) * sys.symbol_distance(u[t], v[t]);
      if (d <= eps) gamma = std::max(gamma, std::fabs(table_[a] - table_[b]));
    }
  }
  return gamma;
}

int max_birkhoff_order(const SystemModel& sys, const Potential& phi) {
  if (phi.is_constant()) return std::numeric_limits<int>::max();
  return sys.right_extent() - phi.range() + 1;
}

double birkhoff_sum(const SystemModel& sys, const Potential& phi, const PointWindow& x, int n) {
  if (n < 0) throw PreconditionError("birkhoff order must be nonnegative");
  if (phi.is_constant()) return n * phi.table()[0];
  if (n > max_birkhoff_order(sys, phi))
    throw WindowExhausted("birkhoff sum of order " + std::to_string(n) +
                          " reads past the retained window");
  double s = 0.0;
  for (int j = 0; j < n; ++j) s += phi.eval(sys, x, j);
  return s;
}

}  // namespace mmdim
