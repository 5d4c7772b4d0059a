#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mmdim/error.hpp"
#include "report/config.hpp"
#include "report/runner.hpp"

using namespace mmdim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitFailed = 2;
constexpr int kExitError = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-scale metric mean dimension estimators"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  std::optional<long long> seed;
  report::CommandOptions opts;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config (INI)")->required();
    sub->add_option("--out", out_path, "JSON lines output; the CSV summary goes to PATH.summary.csv");
    sub->add_option("--seed", seed, "override the config seed");
  };

  auto* est = app.add_subcommand("estimate-mdim", "pressure slopes and mean dimension fit");
  add_common(est);
  est->add_option("--phi", opts.phi, "potential name");

  auto* ind = app.add_subcommand("induced-mdim", "induced pressure over time levels");
  add_common(ind);
  ind->add_option("--phi", opts.phi, "potential name");
  ind->add_option("--psi", opts.psi, "positive potential name");

  auto* root = app.add_subcommand("solve-root", "root of beta -> mdim(phi - beta psi)");
  add_common(root);
  root->add_option("--phi", opts.phi, "potential name");
  root->add_option("--psi", opts.psi, "positive potential name");
  root->add_option("--tol", opts.tol, "tolerance");

  auto* sub = app.add_subcommand("subset-dim", "critical exponents on a finite subset");
  add_common(sub);
  sub->add_option("--structure", opts.structure, "bowen|fixed-length|packing|bs|packing-bs|weighted");
  sub->add_option("--phi", opts.phi, "potential name");

  auto* ent = app.add_subcommand("entropy", "local measure entropies");
  add_common(ent);
  ent->add_option("--quantity", opts.quantity, "bk|bs|katok|ps");

  auto* ver = app.add_subcommand("verify", "finite-scale property suites");
  add_common(ver);
  ver->add_option("--suite", opts.suite, "counting|pressure|caratheodory|entropy|finite-scale|all");

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    report::ExperimentConfig cfg = report::load_config(config_path);
    if (seed) {
      if (*seed < 0) throw ConfigError("seed", "seed must be nonnegative");
      cfg.seed = static_cast<std::uint64_t>(*seed);
    }
    const std::string hash = report::config_hash(cfg);
    const report::RunResult res = report::run(command, cfg, opts);
    const std::string ts = report::timestamp_now();

    std::ofstream file;
    std::ostream* rec_out = &std::cout;
    if (!out_path.empty()) {
      file.open(out_path);
      if (!file) throw ConfigError("out", "cannot write '" + out_path + "'");
      rec_out = &file;
    }
    for (const auto& r : res.records) *rec_out << report::record_json(r, command, hash, ts) << "\n";
    if (out_path.empty()) {
      std::cerr << report::summary_csv(res);
    } else {
      std::ofstream csv(out_path + ".summary.csv");
      csv << report::summary_csv(res);
      std::cout << report::summary_csv(res);
    }
    return res.failed ? kExitFailed : kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
