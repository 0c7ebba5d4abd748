#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "swd/bootstrap.hpp"
#include "swd/measures.hpp"
#include "swd/rng.hpp"
#include "swd/smooth_w1.hpp"

namespace swd {

struct SlopeFit {
  double slope = 0.0;
  double standard_error = 0.0;
};

/// OLS slope of log y on log x with its standard error.
SlopeFit fit_loglog_slope(std::span<const double> x, std::span<const double> y);

/// Per-grid-point summary of a repeated measurement.
struct RateReport {
  std::string experiment;
  std::string axis;             // "n" or "sigma"
  std::string summary = "mean"; // statistic in `means` and used for the slope
  std::vector<double> grid;
  std::vector<double> means;
  std::vector<double> sds;
  int reps = 0;
  /// Absent when some summary value is not positive (e.g. a point mass).
  std::optional<SlopeFit> slope;
  /// values[g][r]: raw measurement of repetition r at grid point g.
  std::vector<std::vector<double>> values;
  std::vector<std::pair<std::string, std::string>> metadata;
};

/// Mean and sample standard deviation per grid point, then the slope.
void summarize(RateReport& report);

struct OneSampleRateOptions {
  std::vector<std::size_t> n_grid;
  int reps = 20;
  /// 0 selects max(8192, 4·max n).
  std::size_t reference_size = 0;
  int workers = 1;
};

std::size_t default_reference_size(std::span<const std::size_t> n_grid);

/// Ŵ1σ(P_n, P_ref) over an n grid; each repetition draws fresh data and a
/// fresh reference sample standing in for P.
RateReport one_sample_rate_experiment(const DistributionSpec& spec, double sigma, const OneSampleRateOptions& options,
                                      const Seed& seed, const SmoothingConfig& config);

/// Ŵ1σ(P_n, P_ref) over a σ grid in (0, 1] at fixed n; data, reference and
/// noise are shared across σ within a repetition.
RateReport sigma_prefactor_experiment(const DistributionSpec& spec, std::size_t n, std::vector<double> sigma_grid,
                                      int reps, std::size_t reference_size, const Seed& seed,
                                      const SmoothingConfig& config, int workers = 1);

struct IntrinsicDimReport {
  RateReport classic;   // σ = 0
  RateReport smoothed;  // σ as given
};

/// Data on an s-dimensional affine subspace of R^d (standard Gaussian base).
IntrinsicDimReport intrinsic_dim_experiment(std::size_t s, std::size_t d, double sigma,
                                            const OneSampleRateOptions& options, const Seed& seed,
                                            const SmoothingConfig& config);

enum class ScheduleKind { constant, inverse_log, power };

std::string to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(std::string_view name);

/// σ_n = c (constant), c / log n (inverse-log) or c·n^(−p) (power).
struct SigmaSchedule {
  ScheduleKind kind = ScheduleKind::inverse_log;
  double c = 1.0;
  double p = 0.0;

  [[nodiscard]] double at(std::size_t n) const;
};

/// Largest admissible power exponent: (1 − b)/(8ab) with a = α − 1 and
/// b = d/(2α). Requires α > max(1, d/2).
double schedule_guard_threshold(std::size_t d, double alpha);

/// Throws InputError naming the threshold when a power schedule has
/// p ≥ threshold; other schedules always pass.
void check_schedule_guard(const SigmaSchedule& schedule, std::size_t d, double alpha);

struct SandwichRow {
  std::size_t n = 0;
  double sigma = 0.0;
  double w1_mean = 0.0;
  double swd_mean = 0.0;
  double bound = 0.0;           // swd_mean + 2σ√d
  double standard_error = 0.0;  // of the per-repetition difference
  bool holds = false;           // w1_mean ≤ bound + 3·standard_error
};

struct VanishingSigmaReport {
  RateReport rate;
  std::vector<SandwichRow> sandwich;
};

VanishingSigmaReport vanishing_sigma_experiment(const DistributionSpec& spec, const SigmaSchedule& schedule,
                                                double guard_alpha, const OneSampleRateOptions& options,
                                                const Seed& seed, const SmoothingConfig& config);

struct ConcentrationReport {
  std::size_t n = 0;
  double sigma = 0.0;
  double eta = 0.0;
  double diameter = 0.0;
  double mean_estimate = 0.0;  // Ê from the first pass
  std::vector<double> t_grid;
  std::vector<double> exceedance;  // second pass
  std::vector<double> reference_curve;
  int trials = 0;
};

/// Two-pass tail study of Ŵ1σ(P_n, P_ref) for a bounded law; the reference
/// sample is drawn once. The curve is exp(−2nt²/diam²).
ConcentrationReport concentration_experiment(const DistributionSpec& spec, std::size_t n, double sigma, double eta,
                                             std::vector<double> t_grid, int trials, std::size_t reference_size,
                                             const Seed& seed, const SmoothingConfig& config, int workers = 1);

struct BootstrapLawReport {
  BootstrapDistribution bootstrap;
  std::vector<double> sampling;  // sorted √n·Ŵ1σ(P_n, P_ref) over fresh samples
  double kolmogorov_distance = 0.0;
};

/// Compares the one-sample bootstrap law from one data set with the sampling
/// law of √n·Ŵ1σ(P_n, P_ref) over independent data sets.
BootstrapLawReport bootstrap_law_experiment(const DistributionSpec& spec, std::size_t n, double sigma, int B,
                                            int replications, std::size_t reference_size, const Seed& seed,
                                            const SmoothingConfig& config, int workers = 1);

/// sup_t |F(t) − G(t)| between two empirical CDFs given as sorted values.
double kolmogorov_distance(std::span<const double> sorted_a, std::span<const double> sorted_b);

}  // namespace swd
