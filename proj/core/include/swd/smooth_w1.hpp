#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "swd/lattice.hpp"
#include "swd/measures.hpp"
#include "swd/rng.hpp"

namespace swd {

/// How W1(P ∗ N_σ, Q ∗ N_σ) is approximated.
///  automatic      exact W1 at σ = 0; otherwise reduce to the common affine
///                 hull and use quadrature-1d (rank 1), grid-flow (rank 2-3)
///                 or Monte-Carlo smoothing (higher rank).
///  mc-exact       noisy copies + exact assignment (equal sizes, else mc-flow)
///  mc-flow        noisy copies + network simplex
///  mc-sinkhorn    noisy copies + entropic OT
///  quadrature-1d  ∫|F_P∗φσ − F_Q∗φσ| by adaptive Simpson (d = 1 only)
///  grid-flow      smoothed masses on a lattice + lattice min-cost flow
enum class SmoothingMethod { automatic, mc_exact, mc_flow, mc_sinkhorn, quadrature_1d, grid_flow };

std::string to_string(SmoothingMethod method);
SmoothingMethod parse_smoothing_method(std::string_view name);

struct SmoothingConfig {
  double sigma = 1.0;
  SmoothingMethod method = SmoothingMethod::automatic;
  /// Noisy copies per point for the Monte-Carlo methods.
  int replicas = 1;
  /// Smaller clouds get extra copies until they hold at least this many
  /// noisy points (0 disables).
  std::size_t min_smoothed_points = 0;
  /// Independent noise draws averaged by the Monte-Carlo methods.
  int repeats = 8;
  Seed noise_seed{0, "noise"};
  /// Absolute entropic regularisation; by default 0.01 × the median cost.
  std::optional<double> sinkhorn_epsilon;
  int sinkhorn_max_iters = 10000;
  double sinkhorn_tol = 1e-9;
  double quadrature_tol = 1e-8;
  GridOptions grid;

  /// Throws InputError for out-of-range fields.
  void validate() const;
};

struct SwdDiagnostics {
  std::size_t reduced_dim = 0;
  std::int64_t iterations = 0;
  double gap = 0.0;
  bool converged = true;
  /// Bound on the mass of the integrand ignored by quadrature-1d.
  double truncation_bound = 0.0;
  std::optional<GridDiagnostics> grid;
};

struct SwdEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  /// The method actually used (never automatic).
  SmoothingMethod method = SmoothingMethod::mc_exact;
  std::vector<double> per_repeat_values;
  SwdDiagnostics diagnostics;
};

/// Each point x_i replaced by x_i + σ z_{i,r}, r < replicas, in the order
/// (point, replica). A pure function of its arguments.
PointCloud smooth_cloud(const PointCloud& cloud, double sigma, int replicas, const Seed& seed);

/// Copies per point used for a cloud of the given size.
int replicas_for(const SmoothingConfig& config, std::size_t cloud_size);

/// Estimate of W1σ between the empirical measures of a and b.
SwdEstimate swd_estimate(const PointCloud& a, const PointCloud& b, const SmoothingConfig& config);

/// |W1^σ1 − W1^σ2| with both estimates sharing one noise seed, next to the
/// bound 2·sqrt(d·|σ1² − σ2²|).
struct StabilityGap {
  double gap = 0.0;
  double bound = 0.0;
  double standard_error = 0.0;
  SwdEstimate at_sigma1;
  SwdEstimate at_sigma2;
};
StabilityGap stability_gap(const PointCloud& a, const PointCloud& b, double sigma1, double sigma2,
                           const SmoothingConfig& config);

/// CDF of (uniform measure on a 1-D cloud) ∗ N(0, σ²).
class SmoothedCdf1d {
 public:
  SmoothedCdf1d(const PointCloud& cloud, double sigma);
  double operator()(double t) const;
  [[nodiscard]] double min_point() const { return sorted_.front(); }
  [[nodiscard]] double max_point() const { return sorted_.back(); }
  [[nodiscard]] double sigma() const { return sigma_; }

 private:
  std::vector<double> sorted_;
  double sigma_;
};

/// Piecewise cubic Hermite table of a smoothed CDF on [lo, hi] with the given
/// step; for large clouds evaluated many times. Error is O(step^4 / σ^4).
class TabulatedCdf1d {
 public:
  TabulatedCdf1d(const PointCloud& cloud, double sigma, double lo, double hi, double step);
  double operator()(double t) const;

 private:
  double lo_, step_;
  std::vector<double> value_, slope_;
};

using CdfFunction = std::function<double(double)>;

struct QuadratureResult {
  double value = 0.0;
  double truncation_bound = 0.0;
  std::int64_t evaluations = 0;
  bool converged = true;
};

/// ∫_lo^hi |F(t) − G(t)| dt, splitting at sign changes of F − G and refining
/// composite Simpson until the relative change is below tol. `scale` sets the
/// initial resolution (σ/4).
QuadratureResult l1_cdf_distance(const CdfFunction& f, const CdfFunction& g, double lo, double hi, double scale,
                                 double tol);

/// W1σ between two 1-D clouds by quadrature on [min − 8σ, max + 8σ].
QuadratureResult swd_quadrature_1d(const PointCloud& a, const PointCloud& b, double sigma, double tol = 1e-8);

}  // namespace swd
