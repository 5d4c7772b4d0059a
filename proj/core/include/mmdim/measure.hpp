#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mmdim/pressure.hpp"
#include "mmdim/rng.hpp"
#include "mmdim/systems.hpp"

namespace mmdim {

enum class MeasureKind { product_uniform, bernoulli, empirical };
std::string to_string(MeasureKind);

// Product measures draw every window coordinate independently from `probs`.
// Empirical measures are finite weighted point sets (weights normalised).
class MeasureModel {
 public:
  static MeasureModel product_uniform(const SystemModel& sys);
  static MeasureModel bernoulli(const SystemModel& sys, std::vector<double> p);
  static MeasureModel empirical(const SystemModel& sys, PointSet pts, std::vector<double> weights);
  static MeasureModel point_mass(const SystemModel& sys, const PointWindow& x);

  MeasureKind kind() const { return kind_; }
  bool is_product() const { return kind_ != MeasureKind::empirical; }
  const SystemModel& system() const { return sys_; }
  const std::vector<double>& probs() const { return probs_; }
  const PointSet& points() const { return pts_; }
  const std::vector<double>& weights() const { return weights_; }

  PointWindow sample(Rng& rng) const;
  // Integral of a potential of range <= 1 (any potential for empirical measures).
  double integral(const Potential& f) const;

 private:
  MeasureModel(const SystemModel& sys) : sys_(sys) {}
  MeasureKind kind_ = MeasureKind::product_uniform;
  SystemModel sys_;
  std::vector<double> probs_;
  std::vector<double> cum_;
  PointSet pts_;
  std::vector<double> weights_;
  std::vector<double> wcum_;
};

struct MassBracket {
  double lower = 0.0;
  double upper = 1.0;
  int r = 0;
};

// ((eps/6)^{n+2r}, (4 eps)^n) with r = ceil(log2(4/eps)) + 1, for the uniform
// product measure on the grid alphabet. Requires eps < 1/4, weight base 1/2,
// absolute-difference symbols and 1/eps <= k <= 6/eps, which keeps both
// bounds valid on the grid: one grid cell has mass 1/k >= eps/6 and the cells
// within eps of a symbol have mass <= 4 eps.
MassBracket ball_mass_bracket(const MeasureModel& mu, const PointWindow& x, int n, double eps);

enum class MassMethod { automatic, frequency, importance, exact };
std::string to_string(MassMethod);

struct MassOptions {
  MassMethod method = MassMethod::automatic;
  std::size_t samples = 100000;
  int bootstrap = 200;
  double confidence = 0.99;
  std::size_t exact_node_cap = 200000;
};

struct MassEstimate {
  double value = 0.0;
  double ci_lo = 0.0, ci_hi = 1.0;
  std::size_t samples = 0;
  std::size_t hits = 0;
  bool zero_hits = false;
  MassMethod method = MassMethod::frequency;
};

// Exact mu(B_n(x,eps)) for product measures by pruned enumeration of the
// window coordinates. Throws CapExceeded past node_cap.
double exact_ball_mass(const MeasureModel& mu, const PointWindow& x, int n, double eps,
                       std::size_t node_cap);

// frequency: i.i.d. draws from mu with a Wilson interval.
// importance: sequential importance sampling over the window coordinates,
//   nearest to the orbit segment first, each drawn from an even mixture of
//   the prior restricted to symbols that keep every d_j below the radius and
//   the same restriction tilted by (1 - delta/b)^2 towards the center;
//   batch-means bootstrap interval.
// exact: exact summation (empirical) or pruned enumeration (product).
// automatic: exact when it fits the node cap, importance otherwise.
MassEstimate estimate_ball_mass(const MeasureModel& mu, const PointWindow& x, int n, double eps,
                                const MassOptions& opt, std::uint64_t seed);

struct BallMassRecord {
  PointWindow center;
  int n = 0;
  MassEstimate mass;
};

struct EntropyEstimate {
  std::string quantity;
  std::vector<std::pair<double, double>> per_scale;  // (n, value) pairs
  double value = 0.0;
  double lower = 0.0, upper = 0.0;
  double extrapolated = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
  bool exact = true;
  std::string flags;
  std::vector<BallMassRecord> balls;  // Brin-Katok and BS only
};

struct EntropyOptions {
  std::vector<int> n_schedule{1, 2, 3, 4, 5, 6};
  std::size_t x_samples = 16;
  MassOptions mass;
  int bootstrap = 200;
  std::uint64_t seed = 1;
};

enum class EntropyBound { lower, upper };

// Local entropy -log mu(B_n(x,eps)) / S_n phi(x). Per sampled x, increments
// between consecutive n are taken over the upper half of the schedule; their
// min is the lower value and their max the upper value. Averages over x
// approximate the integral; `extrapolated` is the mean slope of -log mu
// against S_n phi. The interval is a bootstrap over x of the requested bound.
EntropyEstimate bs_entropy(const MeasureModel& mu, const Potential& phi, double eps,
                           EntropyBound bound, const EntropyOptions& opt);
EntropyEstimate brin_katok(const MeasureModel& mu, double eps, EntropyBound bound,
                           const EntropyOptions& opt);

struct KatokOptions {
  std::size_t pool = 512;
  std::size_t eval_samples = 4096;
  std::size_t boundary_enum_cap = 2048;
  std::size_t exact_cap = 16;
  std::uint64_t seed = 1;
};

struct KatokResult {
  double count = 0.0;
  bool exact = false;
  bool factorized = false;
  double covered_mass = 0.0;
};

// Smallest number of Bowen balls with mu-mass of the union > 1 - delta,
// by greedy mass cover. When symbols at distance < eps coincide, balls split
// into a cylinder on [0,n) times a set of boundary words; the boundary greedy
// is run once and merged across cylinders by mass.
KatokResult katok_rn(const MeasureModel& mu, int n, double eps, double delta,
                     const KatokOptions& opt);

EntropyEstimate katok_entropy(const MeasureModel& mu, double eps, double delta,
                              const std::vector<int>& n_schedule, const KatokOptions& opt);

// Coordinate-0 indicator functions of the first `size` symbols.
std::vector<Potential> default_dictionary(const SystemModel& sys, std::size_t size);

bool generic_point_test(const SystemModel& sys, const PointWindow& x, const MeasureModel& mu, int n,
                        double tol, const std::vector<Potential>& dictionary);

struct PsOptions {
  std::vector<int> n_schedule{2, 3, 4, 5, 6};
  std::size_t dictionary_size = 16;
  std::size_t exact_cap = kDefaultExactCap;
};

// Separated-set growth among the length-n words whose empirical measure is
// within eta of mu on every dictionary function.
EntropyEstimate ps_entropy(const MeasureModel& mu, double eps, double eta, const PsOptions& opt);

struct PsScan {
  std::vector<std::pair<double, EntropyEstimate>> per_eta;  // ascending eta
  double inf_eta = 0.0;     // smallest eta with nonempty sets at every n
  double inf_value = 0.0;
  bool found = false;
};
PsScan ps_entropy_scan(const MeasureModel& mu, double eps, std::vector<double> etas,
                       const PsOptions& opt);

struct GmuOptions {
  std::vector<int> n_schedule{2, 3, 4};
  double tol = 0.3;        // eta for the generic test
  double delta = 0.5;      // Katok mass deficit
  int subset_depth = 3;    // Z for the subset estimate: generic words of this length
  int subset_N = 1;
  int subset_n_max = 3;
  EntropyOptions bk;
  KatokOptions katok;
  PsOptions ps;
};

struct GmuEstimate {
  DimensionEstimate ps, katok, bk_lower, bk_upper, bowen_subset;
  std::vector<std::size_t> generic_counts;  // |Z| per scale
};

GmuEstimate gmu_mdim_estimate(const SystemFamily& family,
                              const std::function<MeasureModel(const SystemModel&)>& measure_of,
                              const std::vector<double>& eps_schedule, const GmuOptions& opt);

}  // namespace mmdim
