#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swd/experiments.hpp"
#include "swd/measures.hpp"
#include "swd/mswe.hpp"
#include "swd/smooth_w1.hpp"

namespace swd {

enum class Command { rates, concentration, mde, bootstrap, power };

std::string to_string(Command command);
Command parse_command(std::string_view name);

enum class RateExperiment { one_sample, sigma_prefactor, intrinsic_dim, vanishing_sigma };

std::string to_string(RateExperiment experiment);
RateExperiment parse_rate_experiment(std::string_view name);

struct RatesSettings {
  RateExperiment experiment = RateExperiment::one_sample;
  double sigma = 1.0;
  std::vector<std::size_t> n_grid;
  int reps = 20;
  std::size_t reference_size = 0;
  // sigma-prefactor
  std::size_t n = 0;
  std::vector<double> sigma_grid;
  // intrinsic-dim
  std::size_t intrinsic_dim = 0;
  std::size_t ambient_dim = 0;
  // vanishing-sigma
  SigmaSchedule schedule;
  double guard_alpha = 0.0;
};

struct ConcentrationSettings {
  std::size_t n = 0;
  double sigma = 1.0;
  double eta = 0.0;
  std::vector<double> t_grid;
  int trials = 500;
  std::size_t reference_size = 8192;
};

struct MdeSettings {
  ParametricFamily family;
  MsweOptions options;
  /// Point-cloud CSV for a single fit; empty when `rate` is set.
  std::filesystem::path data;
  std::optional<MsweRateOptions> rate;
};

enum class BootstrapMode { one_sample, two_sample, law };

struct BootstrapSettings {
  BootstrapMode mode = BootstrapMode::one_sample;
  double sigma = 1.0;
  int B = 500;
  std::vector<double> levels{0.9, 0.95};
  std::filesystem::path data;  // one-sample
  std::filesystem::path x, y;  // two-sample
  std::size_t n = 0;           // law
  int replications = 500;
  std::size_t reference_size = 30000;
};

struct PowerSettings {
  DistributionSpec alternative = DistributionSpec::standard_gaussian(1);
  std::size_t n = 0;
  std::size_t m = 0;
  double sigma = 1.0;
  double alpha = 0.05;
  int B = 200;
  int trials = 100;
};

/// Parsed and validated run description for one config-driven command.
/// Only the section matching `command` is populated.
struct RunConfig {
  Command command = Command::rates;
  std::string name;
  std::filesystem::path output_dir;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  SmoothingConfig estimator;
  std::optional<DistributionSpec> spec;

  std::optional<RatesSettings> rates;
  std::optional<ConcentrationSettings> concentration;
  std::optional<MdeSettings> mde;
  std::optional<BootstrapSettings> bootstrap;
  std::optional<PowerSettings> power;

  /// Original text and the directory relative paths resolve against.
  std::string source;
  std::filesystem::path base_dir;

  [[nodiscard]] std::filesystem::path resolve(const std::filesystem::path& p) const;
};

/// Errors are InputError messages of the form "<key>: <reason>".
RunConfig parse_run_config(std::string_view text, Command command, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path, Command command);

/// A [spec]-style table given as standalone TOML text.
DistributionSpec parse_spec(std::string_view text);

}  // namespace swd
