#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swd/lattice.hpp"
#include "swd/measures.hpp"
#include "swd/rng.hpp"
#include "swd/smooth_w1.hpp"

namespace swd {

/// W1σ between sub-multisets of one fixed pool of points. Resolves the
/// estimator once for the whole pool (so every comparison shares a grid box
/// or projection), which keeps repeated resampling cheap and consistent.
class ResampleEstimator {
 public:
  ResampleEstimator(const PointCloud& pool, const SmoothingConfig& config);
  ~ResampleEstimator();
  ResampleEstimator(ResampleEstimator&&) noexcept;
  ResampleEstimator& operator=(ResampleEstimator&&) noexcept;

  /// Method used for every comparison (never automatic).
  [[nodiscard]] SmoothingMethod method() const { return method_; }
  [[nodiscard]] const PointCloud& pool() const { return pool_; }
  [[nodiscard]] double sigma() const { return config_.sigma; }

  /// Estimate between pool[a] and pool[b]. The Monte-Carlo methods draw
  /// noise from `noise`; the deterministic methods ignore it. Thread-safe.
  [[nodiscard]] SwdEstimate estimate(std::span<const std::size_t> a, std::span<const std::size_t> b,
                                     const Seed& noise) const;

 private:
  PointCloud pool_;          // original coordinates
  PointCloud reduced_pool_;  // coordinates in the common affine hull
  SmoothingConfig config_;
  SmoothingMethod method_;
  std::shared_ptr<const PooledGrid> grid_;
};

enum class BootstrapKind { one_sample, two_sample_pooled };

std::string to_string(BootstrapKind kind);

/// Sorted bootstrap replicates.
struct BootstrapDistribution {
  std::vector<double> values;
  int B = 0;
  BootstrapKind kind = BootstrapKind::one_sample;
  std::size_t n = 0;
  std::size_t m = 0;
  double sigma = 0.0;
  Seed seed;
  SmoothingMethod method = SmoothingMethod::automatic;
};

struct QuantileEstimate {
  double level = 0.0;
  double value = 0.0;
};

/// B replicates of √n·Ŵ1σ(P_n^B, P_n): P_n^B resamples n points of data with
/// replacement from substream (seed, "resample", b); the Monte-Carlo methods
/// smooth with substream (seed, "noise", b). `sigma` overrides config.sigma.
BootstrapDistribution one_sample_bootstrap(const PointCloud& data, double sigma, int B, const Seed& seed,
                                           const SmoothingConfig& config, int workers = 1);

/// B replicates of √(mn/N)·Ŵ1σ(P_m^B, Q_n^B): Z_1..Z_N are drawn with
/// replacement from the pooled cloud, the first m forming P_m^B and the rest
/// Q_n^B. The pool is put in a canonical order first, so the result does not
/// depend on which sample is called x when m = n.
BootstrapDistribution two_sample_pooled_bootstrap(const PointCloud& x, const PointCloud& y, double sigma, int B,
                                                  const Seed& seed, const SmoothingConfig& config, int workers = 1);

/// Same, for a pool already wrapped in an estimator: Z_1..Z_{m+n} index
/// into estimator.pool().
BootstrapDistribution two_sample_pooled_bootstrap(const ResampleEstimator& pooled, std::size_t m, std::size_t n,
                                                  int B, const Seed& seed, int workers = 1);

/// The ⌈level·B⌉-th order statistic.
QuantileEstimate quantile(const BootstrapDistribution& dist, double level);

/// Rows of a ∪ b sorted lexicographically. If `origin` is given it receives,
/// for each pooled row, its index in the concatenation [a; b].
PointCloud canonical_pool(const PointCloud& a, const PointCloud& b, std::vector<std::size_t>* origin = nullptr);

}  // namespace swd
