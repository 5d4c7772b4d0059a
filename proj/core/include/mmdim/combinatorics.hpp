#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <boost/dynamic_bitset.hpp>

namespace mmdim {

using Bits = boost::dynamic_bitset<std::uint64_t>;

struct SubsetResult {
  std::vector<std::size_t> chosen;  // ascending indices
  double value = 0.0;
  bool exact = false;
};

// Maximum-weight clique on at most 64 vertices. adj[v] has bit u set iff u~v.
// Weights must be positive.
SubsetResult max_weight_clique_exact(const std::vector<std::uint64_t>& adj,
                                     const std::vector<double>& weight);

// Greedy clique: scan vertices in `order`, keep a vertex iff adjacent to all
// kept vertices. The result is maximal.
SubsetResult greedy_clique(const std::vector<Bits>& adj, const std::vector<double>& weight,
                           const std::vector<std::size_t>& order);

// Minimum-weight set cover of `elements` elements. Exact branch and bound,
// elements <= 64. Returns value = +inf if some element is uncovered by all sets.
SubsetResult min_weight_cover_exact(std::size_t elements, const std::vector<std::uint64_t>& sets,
                                    const std::vector<double>& weight);

// Greedy cover by smallest cost per newly covered element; ties to the lower
// index. Sets are bitsets over the elements.
SubsetResult min_weight_cover_greedy(std::size_t elements, const std::vector<Bits>& sets,
                                     const std::vector<double>& weight);

struct LpResult {
  double value = 0.0;
  std::vector<double> x;  // primal weights c_i
  bool optimal = false;
};

// min sum_i w_i c_i  s.t.  sum_i A[e][i] c_i >= 1 for every element e, c >= 0,
// where A[e][i] = 1 iff set i covers element e. Solved through its dual
// max sum_e y_e s.t. A^T y <= w, y >= 0 with Bland's rule.
LpResult fractional_cover_lp(std::size_t elements, const std::vector<Bits>& sets,
                             const std::vector<double>& weight);

}  // namespace mmdim
