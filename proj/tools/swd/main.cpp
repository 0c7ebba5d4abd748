#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>

#include "runner.hpp"
#include "swd/errors.hpp"
#include "swd/measures.hpp"
#include "swd/report_io.hpp"
#include "swd/smooth_w1.hpp"
#include "swd/two_sample_test.hpp"

namespace {

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& given) {
  if (given) return *given;
  const std::uint64_t seed = swd::random_master_seed();
  std::cerr << "seed: " << seed << "\n";
  return seed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-smoothed 1-Wasserstein distance: estimation, inference and rate experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "swd 0.1.0");

  // dist
  std::string a_path, b_path, method_name = "auto";
  double sigma = 1.0;
  int replicas = 1, repeats = 8;
  std::optional<std::uint64_t> seed_flag;
  auto* dist = app.add_subcommand("dist", "Estimate W1 between the Gaussian-smoothed empirical measures of two CSV files");
  dist->add_option("--a", a_path, "First point cloud (CSV)")->required();
  dist->add_option("--b", b_path, "Second point cloud (CSV)")->required();
  dist->add_option("--sigma", sigma, "Smoothing bandwidth")->required();
  dist->add_option("--method", method_name,
                   "auto, mc-exact, mc-flow, mc-sinkhorn, quadrature-1d or grid-flow")->capture_default_str();
  dist->add_option("--k", replicas, "Noisy copies per point for Monte-Carlo methods")->capture_default_str();
  dist->add_option("--repeats", repeats, "Independent noise draws averaged")->capture_default_str();
  dist->add_option("--seed", seed_flag, "Master seed (random and printed when omitted)");

  // test
  std::string x_path, y_path;
  double alpha = 0.05;
  int B = 500, workers = 1;
  auto* test = app.add_subcommand("test", "Bootstrap two-sample test of P = Q");
  test->add_option("--x", x_path, "Sample from P (CSV)")->required();
  test->add_option("--y", y_path, "Sample from Q (CSV)")->required();
  test->add_option("--sigma", sigma, "Smoothing bandwidth")->capture_default_str();
  test->add_option("--alpha", alpha, "Nominal level")->capture_default_str();
  test->add_option("--bootstrap", B, "Bootstrap replicates")->capture_default_str();
  test->add_option("--method", method_name, "Estimator")->capture_default_str();
  test->add_option("--seed", seed_flag, "Master seed (random and printed when omitted)");
  test->add_option("--workers", workers, "Worker threads")->capture_default_str();

  // config-driven commands
  std::string config_path, output_dir;
  std::optional<int> workers_flag;
  std::vector<std::pair<swd::Command, CLI::App*>> config_commands;
  for (auto [cmd, help] : {std::pair{swd::Command::mde, "Minimum smooth-Wasserstein estimation (fit or rate study)"},
                           std::pair{swd::Command::rates, "Convergence-rate experiments"},
                           std::pair{swd::Command::concentration, "Concentration tail study"},
                           std::pair{swd::Command::bootstrap, "Bootstrap distributions and the bootstrap-law study"},
                           std::pair{swd::Command::power, "Level and power of the two-sample test"}}) {
    auto* sub = app.add_subcommand(swd::to_string(cmd), help);
    sub->add_option("--config", config_path, "TOML config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed_flag, "Overrides the config seed");
    sub->add_option("--workers", workers_flag, "Overrides the config worker count");
    sub->add_option("--output-dir", output_dir, "Overrides the config output_dir");
    config_commands.emplace_back(cmd, sub);
  }

  std::string sidecar_path;
  auto* replay = app.add_subcommand("replay", "Rerun the command that produced a JSON sidecar");
  replay->add_option("sidecar", sidecar_path, "Sidecar JSON")->required()->check(CLI::ExistingFile);
  replay->add_option("--output-dir", output_dir, "Defaults to the sidecar's directory");
  replay->add_option("--workers", workers_flag, "Worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*dist) {
      swd::SmoothingConfig cfg;
      cfg.sigma = sigma;
      cfg.method = swd::parse_smoothing_method(method_name);
      cfg.replicas = replicas;
      cfg.repeats = repeats;
      cfg.validate();
      const auto a = swd::load_point_cloud(a_path);
      const auto b = swd::load_point_cloud(b_path, a.dim());
      cfg.noise_seed = swd::Seed{resolve_seed(seed_flag), "dist"}.derive("noise");
      const auto e = swd::swd_estimate(a, b, cfg);
      std::cout << swd::dist_json(e, a.size(), b.size(), a.dim(), sigma) << "\n";
      return 0;
    }
    if (*test) {
      swd::SmoothingConfig cfg;
      cfg.method = swd::parse_smoothing_method(method_name);
      const auto x = swd::load_point_cloud(x_path);
      const auto y = swd::load_point_cloud(y_path, x.dim());
      const swd::Seed seed{resolve_seed(seed_flag), "test"};
      const auto r = swd::swd_test(x, y, sigma, alpha, B, seed, cfg, workers);
      std::cout << swd::test_json(r) << "\n";
      return 0;
    }
    for (auto [cmd, sub] : config_commands) {
      if (!*sub) continue;
      const auto cfg = swd::load_run_config(config_path, cmd);
      swd::cli::RunOptions opts;
      opts.seed = resolve_seed(seed_flag ? seed_flag : cfg.seed);
      opts.workers = workers_flag.value_or(cfg.workers);
      opts.output_dir = output_dir.empty() ? cfg.output_dir : std::filesystem::path(output_dir);
      for (const auto& p : swd::cli::run(cfg, opts)) std::cout << p.string() << "\n";
      return 0;
    }
    if (*replay) {
      const auto prov = swd::read_provenance(sidecar_path);
      const auto cfg = swd::parse_run_config(prov.config_source, prov.command, prov.config_dir);
      swd::cli::RunOptions opts;
      opts.seed = prov.seed;
      opts.workers = workers_flag.value_or(cfg.workers);
      opts.output_dir = output_dir.empty() ? std::filesystem::path(sidecar_path).parent_path() : std::filesystem::path(output_dir);
      for (const auto& p : swd::cli::run(cfg, opts)) std::cout << p.string() << "\n";
      return 0;
    }
  } catch (const swd::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
