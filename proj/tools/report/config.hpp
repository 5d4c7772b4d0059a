#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mmdim/caratheodory.hpp"
#include "mmdim/measure.hpp"
#include "mmdim/pressure.hpp"
#include "mmdim/systems.hpp"

namespace mmdim::report {

// Parsed experiment configuration. Sections:
//   [run]        seed (required)
//   [system]     kind, k, sidedness, window, metric, weight_base, grid_per_scale, eps_min
//   [potential:NAME]  kind = constant|coordinate, value / values
//   [schedule]   eps, n, T, delta, eta (comma separated, decimal or 2^-k)
//   [caps]       exact, enumeration, brute_limit
//   [pressure]   source = brute|oracle|hybrid
//   [root]       phi, psi, tol
//   [subset]     structure, depth, N, n_max, tol, generic
//   [measure]    kind = product-uniform|bernoulli, probabilities
//   [entropy]    quantity, bound, x_samples, mass_samples, mass_method, potential, ...
//   [verify]     suite
struct ExperimentConfig {
  std::uint64_t seed = 0;

  SystemParams system;
  bool grid_per_scale = false;
  bool eps_min_given = false;

  std::map<std::string, Potential> potentials;

  std::vector<double> eps;
  std::vector<int> n;
  std::vector<double> T;
  std::vector<double> delta;
  std::vector<double> eta;

  std::size_t exact_cap = kDefaultExactCap;
  std::size_t brute_limit = 4096;
  PressureSource source = PressureSource::hybrid;

  std::string root_phi = "phi";
  std::string root_psi = "psi";
  double root_tol = 1e-3;

  Structure structure = Structure::cover_m;
  int subset_depth = 3;
  int subset_N = 1;
  int subset_n_max = 3;
  double subset_tol = 1e-6;
  bool subset_generic = false;

  MeasureKind measure = MeasureKind::product_uniform;
  std::vector<double> probabilities;

  std::string quantity = "bk";
  EntropyBound bound = EntropyBound::lower;
  std::string entropy_potential = "phi";
  std::size_t x_samples = 16;
  std::size_t mass_samples = 100000;
  MassMethod mass_method = MassMethod::automatic;
  std::size_t katok_pool = 512;
  std::size_t katok_eval = 4096;
  std::size_t dictionary_size = 16;
  int bootstrap = 200;

  std::string suite = "all";

  // Canonical rendering of the parsed values, the input of the config hash.
  std::string canonical() const;
  SystemFamily family() const;
  const Potential& potential(const std::string& name, const std::string& key) const;
  MeasureModel measure_on(const SystemModel& sys) const;
};

// Numbers are decimal or 2^e (for example 2^-3).
double parse_number(const std::string& key, const std::string& text);

ExperimentConfig parse_config(std::istream& in, const std::string& origin = "<stream>");
ExperimentConfig load_config(const std::string& path);

std::uint64_t fnv1a64(const std::string& bytes);
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace mmdim::report
