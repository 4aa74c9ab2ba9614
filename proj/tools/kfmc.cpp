#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "kfmc/commands.hpp"

namespace {

struct GlobalOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
};

kfmc::ExperimentConfig load(const GlobalOptions& g) {
  kfmc::ExperimentConfig cfg = g.config_path.empty() ? kfmc::ExperimentConfig{} : kfmc::load_config(g.config_path);
  if (!g.out_dir.empty()) cfg.output_dir = g.out_dir;
  if (g.seed) kfmc::override_seed(cfg, *g.seed);
  if (g.threads) cfg.threads = *g.threads;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo construction of a local kinetic functional for the uniform electron gas"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config_path, "experiment config file");
  app.add_option("--out", g.out_dir, "output directory (overrides [output] dir)");
  app.add_option("--seed", g.seed, "base seed (overrides [chain] seed)");
  app.add_option("--threads", g.threads, "worker threads for independent chains")->check(CLI::PositiveNumber);

  auto* scan = app.add_subcommand("scan-gamma", "scan and refine gamma at each (N, rho)");
  auto* est = app.add_subcommand("estimate", "I(rho) at gamma* for each (N, rho)");
  auto* fit = app.add_subcommand("fit", "fit I = A + B ln(rho) to a density scan");
  std::string scan_path;
  fit->add_option("--scan", scan_path, "density scan CSV (default <out>/density_scan.csv)");
  auto* kin = app.add_subcommand("kinetic", "evaluate K[rho] on a density field");
  std::string field_path, fit_path;
  kin->add_option("--field", field_path, "density field file")->required();
  kin->add_option("--fit", fit_path, "fit JSON (default <out>/fit.json)");
  auto* oracle = app.add_subcommand("oracle-check", "N=2 quadrature and N=3 reference checks");

  CLI11_PARSE(app, argc, argv);

  try {
    const kfmc::ExperimentConfig cfg = load(g);
    if (*scan) {
      kfmc::cmd_scan_gamma(cfg, std::cout);
    } else if (*est) {
      kfmc::cmd_estimate(cfg, std::cout);
    } else if (*fit) {
      const std::string path =
          scan_path.empty() ? (std::filesystem::path(cfg.output_dir) / "density_scan.csv").string() : scan_path;
      kfmc::cmd_fit(path, cfg.output_dir, std::cout);
    } else if (*kin) {
      const std::string path =
          fit_path.empty() ? (std::filesystem::path(cfg.output_dir) / "fit.json").string() : fit_path;
      kfmc::cmd_kinetic(field_path, path, cfg.output_dir, std::cout);
    } else if (*oracle) {
      const auto rep = kfmc::cmd_oracle(cfg, std::cout);
      if (!rep.all_pass()) return 3;
    }
  } catch (const kfmc::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
