#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "mmdim/bowen.hpp"
#include "mmdim/pressure.hpp"
#include "mmdim/systems.hpp"

namespace mmdim {

enum class Structure { cover_m, cover_fixed, packing, bs, packing_bs, weighted };
std::string to_string(Structure);
Structure parse_structure(const std::string& name);

// A finite Caratheodory problem. Candidate balls are B_n(z, eps) for z in Z and
// N <= n <= n_max (closed balls for the packing structures). Coverage is
// required on Z; disjointness of closed balls is decided on Z plus `extras`.
struct OuterMeasureProblem {
  SystemModel sys;
  PointSet z;
  PointSet extras;
  Potential phi = Potential::constant(0.0);
  double lambda = 0.0;
  int N = 1;
  int n_max = 1;
  double eps = 0.5;
  std::size_t exact_cap = kDefaultExactCap;  // elements for exact covers
  std::size_t packing_exact_cap = 40;        // candidate balls for exact packings

  void validate(Structure s) const;
};

struct ValueResult {
  double value = 0.0;
  double log_value = 0.0;
  bool exact = true;       // optimisation solved exactly
  bool sup_exact = true;   // every ball supremum of S_n phi evaluated exactly
  std::vector<std::size_t> chosen;  // candidate indices in the optimum
};

// Upper value of S_n phi over B_n(center, eps) (or the closed ball). Exact
// when phi is constant or every coordinate phi reads is pinned by the ball;
// otherwise the max over universe members plus n * modulus(eps).
struct BallSup {
  double value = 0.0;
  bool exact = true;
};
BallSup ball_sup(const SystemModel& sys, const Potential& phi, const PointWindow& center, int n,
                 double eps, bool closed, const PointSet& universe);

ValueResult cover_value(const OuterMeasureProblem& p);
// Covers with every order equal to p.N.
ValueResult fixed_length_value(const OuterMeasureProblem& p);
ValueResult packing_value(const OuterMeasureProblem& p);
ValueResult bs_value(const OuterMeasureProblem& p);
ValueResult packing_bs_value(const OuterMeasureProblem& p);
// Fractional cover with target chi_Z and BS weights.
ValueResult weighted_value(const OuterMeasureProblem& p);

ValueResult structure_value(const OuterMeasureProblem& p, Structure s);

// Minimum over partitions of Z into at most K blocks of the sum of per-block
// packing values. Exhaustive for |Z| <= 8, agglomerative merging otherwise.
ValueResult refined_packing_value(const OuterMeasureProblem& p, std::size_t max_blocks,
                                  bool bs_weights = false);

struct CriticalValue {
  double lambda = 0.0;
  double lo = 0.0, hi = 0.0;
  double threshold = 1.0;
  bool degenerate = false;
  int iterations = 0;
};

// Crossing of `threshold` by a nonincreasing valuation. The bracket grows
// geometrically from [-1, 1]; bisection stops at width <= tol.
CriticalValue critical_lambda(const std::function<double(double)>& valuation, double tol,
                              double threshold = 1.0);

struct SubsetMdimOptions {
  int N = 1;
  int n_max = 3;
  double tol = 1e-6;
  std::size_t exact_cap = kDefaultExactCap;
};

// Critical lambda per scale, then regression against log(1/eps).
DimensionEstimate subset_mdim(const SystemFamily& family,
                              const std::function<PointSet(const SystemModel&, double)>& z_of,
                              const Potential& phi, Structure s,
                              const std::vector<double>& eps_schedule,
                              const SubsetMdimOptions& opt);

}  // namespace mmdim
