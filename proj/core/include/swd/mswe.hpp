#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "swd/experiments.hpp"
#include "swd/lattice.hpp"
#include "swd/measures.hpp"
#include "swd/rng.hpp"
#include "swd/smooth_w1.hpp"

namespace swd {

enum class FamilyKind { gaussian_location, gaussian_location_scale };

std::string to_string(FamilyKind kind);
FamilyKind parse_family_kind(std::string_view name);

/// Q_θ = N(θ, I_d) (location, θ ∈ R^d) or N(μ, s² I_d) (location-scale,
/// θ = (μ, s)), with θ restricted to the box [lower, upper].
struct ParametricFamily {
  FamilyKind kind = FamilyKind::gaussian_location;
  std::size_t dim = 1;
  std::vector<double> lower;
  std::vector<double> upper;

  [[nodiscard]] std::size_t parameter_count() const;
  /// Throws InputError unless the box is finite with lower < upper (and
  /// s > 0 throughout for location-scale).
  void validate() const;
  [[nodiscard]] bool contains(std::span<const double> theta) const;
  /// Law of Q_θ.
  [[nodiscard]] DistributionSpec model(std::span<const double> theta) const;
  /// θ applied to a base sample of standard Gaussian draws.
  [[nodiscard]] PointCloud transform(const PointCloud& base, std::span<const double> theta) const;
};

enum class Optimizer { nelder_mead, coordinate_search };

std::string to_string(Optimizer optimizer);
Optimizer parse_optimizer(std::string_view name);

struct MsweOptions {
  /// Model sample size m; 0 selects 4n.
  std::size_t model_sample_size = 0;
  SmoothingConfig smoothing;
  Optimizer optimizer = Optimizer::nelder_mead;
  int starts = 3;
  double tolerance = 1e-5;
  int max_evaluations = 2000;
  /// Frozen base sample and start points derive from this seed.
  Seed seed{0, "mswe"};

  void validate() const;
};

/// θ ↦ Ŵ1σ(P_n, Q_θ^(m)) with Q_θ^(m) one frozen base sample transformed by
/// θ and frozen smoothing noise, so the map is deterministic. For data of
/// dimension ≤ 3 and σ > 0 the automatic and grid-flow methods evaluate on
/// one box covering the data and every model sample over the parameter box.
class MsweObjective {
 public:
  MsweObjective(const PointCloud& data, const ParametricFamily& family, const MsweOptions& options);
  ~MsweObjective();
  MsweObjective(MsweObjective&&) noexcept;
  MsweObjective& operator=(MsweObjective&&) noexcept;

  double operator()(std::span<const double> theta) const;

  [[nodiscard]] std::size_t model_sample_size() const { return base_.size(); }
  [[nodiscard]] const PointCloud& base() const { return base_; }
  [[nodiscard]] SmoothingMethod method() const { return method_; }

 private:
  PointCloud data_;
  ParametricFamily family_;
  SmoothingConfig smoothing_;
  PointCloud base_;
  SmoothingMethod method_;
  std::shared_ptr<const GridBox> box_;
  std::vector<double> data_masses_;
};

double mswe_objective(std::span<const double> theta, const PointCloud& data, const ParametricFamily& family,
                      const MsweOptions& options);

struct FitResult {
  std::vector<double> theta_hat;
  double objective = 0.0;
  int evaluations = 0;
  std::vector<std::pair<std::vector<double>, double>> trace;
  bool converged = false;
  std::size_t model_sample_size = 0;
};

/// Multi-start derivative-free minimisation over the parameter box; the
/// best start wins. Start points are uniform in the box from (seed, "starts").
FitResult fit_mswe(const PointCloud& data, const ParametricFamily& family, const MsweOptions& options);

struct MsweRateOptions {
  std::vector<double> theta_star;
  std::vector<std::size_t> n_grid;
  int reps = 20;
  int workers = 1;
};

/// Median over repetitions of ‖θ̂_n − θ*‖ along the n grid, with data drawn
/// from Q_θ*; the slope is fitted on the medians.
RateReport mswe_rate_experiment(const ParametricFamily& family, const MsweRateOptions& rate, const MsweOptions& options,
                                const Seed& seed);

}  // namespace swd
