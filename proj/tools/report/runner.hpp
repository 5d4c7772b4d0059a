#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "report/config.hpp"

namespace mmdim::report {

struct Record {
  std::string quantity;
  std::map<std::string, double> keys;  // n, eps, T, lambda, beta, delta, eta
  double value = 0.0;
  bool exact = true;
  std::optional<std::pair<double, double>> ci;
  std::map<std::string, std::string> tags;
};

struct SummaryRow {
  std::string quantity;
  double value = 0.0;
  bool exact = true;
  std::string note;
};

struct RunResult {
  std::string command;
  std::vector<Record> records;
  std::vector<SummaryRow> summary;
  bool failed = false;  // a verification assertion failed or the solver did not converge
};

// Command-line overrides of config values.
struct CommandOptions {
  std::optional<std::string> phi, psi;
  std::optional<double> tol;
  std::optional<std::string> structure;
  std::optional<std::string> quantity;
  std::optional<std::string> suite;
};

inline const char* const kCommands[] = {"estimate-mdim", "induced-mdim", "solve-root",
                                        "subset-dim",    "entropy",      "verify"};

RunResult run(const std::string& command, const ExperimentConfig& cfg, const CommandOptions& opt);

// One JSON object per line, keys sorted.
std::string record_json(const Record& r, const std::string& command, const std::string& hash,
                        const std::string& timestamp);
std::string summary_csv(const RunResult& r);

// UTC ISO-8601; SOURCE_DATE_EPOCH wins when set.
std::string timestamp_now();

}  // namespace mmdim::report
