#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swd/bootstrap.hpp"
#include "swd/config.hpp"
#include "swd/experiments.hpp"
#include "swd/mswe.hpp"
#include "swd/smooth_w1.hpp"
#include "swd/two_sample_test.hpp"

namespace swd {

/// 17 significant digits, so every double round-trips.
std::string format_real(double value);

// CSV bodies: header row, comma separated, '\n' line endings.
std::string rate_csv(const RateReport& report);                     // axis_value,mean,sd,reps
std::string bootstrap_csv(std::span<const double> sorted_values);   // replicate,value
std::string concentration_csv(const ConcentrationReport& report);   // t,exceedance,reference
std::string power_csv(const LevelPowerResult& result);              // scenario,trials,rejections,rejection_rate,standard_error
std::string sandwich_csv(std::span<const SandwichRow> rows);        // n,sigma,w1_mean,swd_mean,bound,standard_error,holds
std::string trace_csv(const FitResult& fit);                        // evaluation,theta_0,...,objective

/// Everything needed to rerun a config-driven command.
struct Provenance {
  Command command = Command::rates;
  std::string name;
  std::uint64_t seed = 0;
  std::string config_source;
  std::filesystem::path config_dir;
};

// One-line JSON documents printed by the direct commands.
std::string dist_json(const SwdEstimate& estimate, std::size_t n, std::size_t m, std::size_t d, double sigma);
std::string test_json(const TestResult& result);
std::string fit_json(const FitResult& fit, const ParametricFamily& family, double sigma, std::size_t n,
                     std::uint64_t seed);

// Sidecars: pretty-printed JSON describing the CSV next to them.
std::string rate_sidecar(const RateReport& report, const Provenance& provenance, const RunConfig& config,
                         const std::string& csv_name, std::span<const SandwichRow> sandwich = {});
std::string bootstrap_sidecar(const BootstrapDistribution& dist, std::span<const double> levels,
                              const Provenance& provenance, const RunConfig& config, const std::string& csv_name);
std::string bootstrap_law_sidecar(const BootstrapLawReport& report, std::span<const double> levels,
                                  const Provenance& provenance, const RunConfig& config,
                                  const std::string& bootstrap_csv_name, const std::string& sampling_csv_name);
std::string concentration_sidecar(const ConcentrationReport& report, const Provenance& provenance,
                                  const RunConfig& config, const std::string& csv_name);
std::string power_sidecar(const LevelPowerResult& result, const Provenance& provenance, const RunConfig& config,
                          const std::string& csv_name);
std::string fit_sidecar(const FitResult& fit, const Provenance& provenance, const RunConfig& config,
                        std::size_t n, const std::string& csv_name);

/// Reads the provenance block back from any sidecar.
Provenance read_provenance(const std::filesystem::path& sidecar);

/// JSON rendering of a sampling law.
std::string spec_json(const DistributionSpec& spec);

/// Writes bytes verbatim, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace swd
