#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mmdim/bowen.hpp"
#include "mmdim/systems.hpp"

namespace mmdim {

enum class WitnessKind {
  separated_exact,
  separated_greedy,
  spanning_exact,
  spanning_greedy,
  analytic_oracle
};
std::string to_string(WitnessKind);

struct PressureRecord {
  int n = 0;
  double eps = 0.0;
  double log_sum = 0.0;
  WitnessKind witness = WitnessKind::separated_greedy;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root mean square of the fit residuals
};

// Least squares y = slope*x + intercept. Throws on fewer than two points or
// when all x coincide.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

double log_sum_exp(const std::vector<double>& terms);

struct DimensionEstimate {
  std::vector<double> eps_schedule;   // strictly decreasing
  std::vector<double> inner_schedule; // n (or T) values used at every scale
  std::vector<double> per_eps;        // P-hat(eps), aligned with eps_schedule
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  double max_ratio = 0.0;  // max over eps of per_eps / log(1/eps), diagnostic
  bool exact = true;
};

// Regression of per-scale values against log(1/eps).
DimensionEstimate fit_dimension(const std::vector<double>& eps, const std::vector<double>& values,
                                const std::vector<double>& inner);

// The system used at radius eps. With grid_per_scale the alphabet is
// ceil(1/eps) at each scale.
struct SystemFamily {
  SystemParams base;
  bool grid_per_scale = false;
  SystemModel at(double eps) const;
};

int grid_size_for(double eps);

// log sum_{x in F} (1/eps)^{S_n phi(x)}; -inf for empty F.
double pressure_sum(const SystemModel& sys, const PointSet& f, const Potential& phi, int n,
                    double eps);

enum class PressureSource { brute, oracle, hybrid };

struct PressureOptions {
  PressureSource source = PressureSource::brute;
  std::size_t exact_cap = kDefaultExactCap;
  // hybrid: brute force while k^n <= brute_limit, the oracle beyond.
  std::size_t brute_limit = 4096;
};

// One witness record at order n over Z = all words of length n.
PressureRecord pressure_record(const SystemModel& sys, const Potential& phi, int n, double eps,
                               const PressureOptions& opt);

struct PressureEstimate {
  double slope = 0.0;       // least squares of log_sum against n
  double max_ratio = 0.0;   // max over n of log_sum / n
  LinearFit fit;
  std::vector<PressureRecord> records;
  bool exact = true;
};

PressureEstimate pressure_estimate(const SystemModel& sys, const Potential& phi, double eps,
                                   const std::vector<int>& n_schedule, const PressureOptions& opt);

// Per-step pressure brackets for product shifts and potentials of range <= 1:
// n*lower_rate <= log #sep(n) <= n*upper_rate + upper_offset over the whole
// model. When `exact_on_words` holds, the universe of length-n words has
// log #sep(n) = n*lower_rate exactly.
struct OracleBracket {
  double lower_rate = 0.0;
  double upper_rate = 0.0;
  double upper_offset = 0.0;
  int boundary_coords = 0;  // R in the offset R*log k
  bool exact_on_words = false;
  double midpoint() const { return 0.5 * (lower_rate + upper_rate); }
};

OracleBracket analytic_oracle(const SystemModel& sys, const Potential& phi, double eps);

DimensionEstimate mdim_estimate(const SystemFamily& family, const Potential& phi,
                                const std::vector<double>& eps_schedule,
                                const std::vector<int>& n_schedule, const PressureOptions& opt);

// ---- induced pressure ----

enum class LevelVariant { level, tail };

struct TimeLevelPartition {
  double T = 0.0;
  LevelVariant variant = LevelVariant::level;
  std::vector<int> levels;                             // S_T, ascending
  std::map<int, std::vector<std::size_t>> members;     // X_n (or Y_n) as indices into Z
};

// Level variant: z goes to the n >= 1 with S_n psi(z) <= T < S_{n+1} psi(z);
// points with S_1 psi(z) > T have no level. Tail variant: Y_n for n in
// [1, tail_max] collects the points with S_n psi(z) > T.
TimeLevelPartition time_level_partition(const SystemModel& sys, const PointSet& z,
                                        const Potential& psi, double T, LevelVariant variant,
                                        int tail_max = 0);

enum class InducedWitness { separated, spanning };

struct InducedPressure {
  double log_value = 0.0;
  std::vector<std::pair<int, double>> per_level;  // (n, log of the level sum)
  bool exact = true;
};

InducedPressure induced_pressure(const SystemModel& sys, const PointSet& z, const Potential& phi,
                                 const Potential& psi, double T, double eps,
                                 InducedWitness witness, std::size_t exact_cap = kDefaultExactCap);

// Universe for level T: all words of length floor(T / min psi).
int induced_depth(const Potential& psi, double T);

struct InducedRecord {
  double T = 0.0;
  double eps = 0.0;
  double log_p = 0.0;  // separated witnesses
  double log_q = 0.0;  // spanning witnesses
  bool exact = true;
};

InducedRecord induced_record(const SystemModel& sys, const Potential& phi, const Potential& psi,
                             double T, double eps, const PressureOptions& opt);

DimensionEstimate induced_mdim_estimate(const SystemFamily& family, const Potential& phi,
                                        const Potential& psi,
                                        const std::vector<double>& eps_schedule,
                                        const std::vector<double>& T_schedule,
                                        const PressureOptions& opt);

// ---- Bowen equation ----

struct RootResult {
  double beta = 0.0;
  double value = 0.0;  // mdim_fn(beta)
  double lo = 0.0, hi = 0.0;
  int iterations = 0;
  bool widened = false;
  bool converged = false;
  std::string diagnostics;
};

// Bisection for mdim_fn(beta) = 0 on [min(0,D/m)-tol, max(0,D/m)+tol] with
// D = mdim_fn(0), m = min psi. Widens once to twice the bracket if the
// endpoints do not straddle zero.
RootResult solve_bowen_root(const std::function<double(double)>& mdim_fn, const Potential& phi,
                            const Potential& psi, double tol, int max_iter = 60);

}  // namespace mmdim
