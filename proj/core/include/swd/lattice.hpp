#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "swd/measures.hpp"

namespace swd {

class NetworkSimplex;

/// Discretisation controls for the grid estimator. Lengths are in units of
/// the smoothing bandwidth sigma.
struct GridOptions {
  double spacing = 0.0;      // cell width / sigma; 0 picks 0.5 up to 2-D, 0.75 in 3-D
  double margin = 3.0;       // box extension beyond the data / sigma
  int stencil_radius = 2;    // lattice moves v with max|v_k| <= radius, gcd(v) = 1
  std::size_t max_cells = 200000;
};

/// Cell width / sigma actually used for the given dimension.
double grid_spacing(const GridOptions& options, std::size_t dim);

/// Axis-aligned box split into equal cubic cells.
struct GridBox {
  std::vector<double> lower;
  std::vector<std::size_t> cells;
  double width = 0.0;

  [[nodiscard]] std::size_t dim() const { return lower.size(); }
  [[nodiscard]] std::size_t cell_count() const;
};

/// Box covering [lo_k - margin·σ, hi_k + margin·σ] with cell width spacing·σ,
/// widened if needed to respect max_cells.
GridBox make_grid_box(std::span<const double> lo, std::span<const double> hi, double sigma,
                      const GridOptions& options);
GridBox make_grid_box(const PointCloud& a, const PointCloud& b, double sigma, const GridOptions& options);

/// Exact cell probabilities of (uniform measure on cloud) ∗ N(0, σ² I). Cells
/// on the boundary absorb the Gaussian tails, so the masses sum to one.
std::vector<double> smoothed_cell_masses(const PointCloud& cloud, double sigma, const GridBox& box);

/// Primitive lattice directions with max-norm <= radius (both signs).
std::vector<std::vector<int>> lattice_stencil(std::size_t dim, int radius);

/// Worst-case ratio between the lattice path metric and the Euclidean metric
/// for a 1-D or 2-D stencil (NaN for higher dimension, where it is not
/// computed in closed form).
double stencil_distortion(std::size_t dim, int radius);

/// W1 between two cell-mass vectors on a GridBox, with ground cost the
/// shortest-path metric of the stencil lattice (arc length h·‖v‖). Holds a
/// reusable solver, so one instance must not be shared across threads.
class LatticeTransport {
 public:
  LatticeTransport(GridBox box, int stencil_radius);
  ~LatticeTransport();
  LatticeTransport(LatticeTransport&&) noexcept;
  LatticeTransport& operator=(LatticeTransport&&) noexcept;

  [[nodiscard]] const GridBox& box() const { return box_; }
  [[nodiscard]] std::size_t arc_count() const;

  struct Result {
    double value = 0.0;
    std::int64_t pivots = 0;
  };
  Result w1(std::span<const double> masses_a, std::span<const double> masses_b);

 private:
  GridBox box_;
  std::unique_ptr<NetworkSimplex> solver_;
};

/// Smoothed cell masses for sub-multisets of one fixed pool of points, all on
/// a single box covering the pool. Per-point axis weights are computed once,
/// so resampling experiments pay only for the tensor-product accumulation.
class PooledGrid {
 public:
  PooledGrid(const PointCloud& pool, double sigma, const GridOptions& options);

  [[nodiscard]] const GridBox& box() const { return box_; }
  [[nodiscard]] std::size_t pool_size() const { return weights_.size(); }
  /// Masses of the uniform measure on pool[indices] (repeats allowed).
  [[nodiscard]] std::vector<double> masses(std::span<const std::size_t> indices) const;

  struct AxisWeights {
    std::size_t first = 0;
    std::vector<double> p;
  };

 private:
  GridBox box_;
  std::vector<std::vector<AxisWeights>> weights_;  // [point][axis]
};

struct GridDiagnostics {
  std::vector<std::size_t> shape;
  double cell_width = 0.0;
  std::size_t arcs = 0;
  std::int64_t pivots = 0;
  int stencil_radius = 0;
};

struct GridEstimate {
  double value = 0.0;
  GridDiagnostics diagnostics;
};

/// W1(a ∗ N_σ, b ∗ N_σ) for clouds of dimension <= 3 on a regular grid.
GridEstimate grid_smooth_w1(const PointCloud& a, const PointCloud& b, double sigma, const GridOptions& options);

/// Coordinates of a ∪ b in an orthonormal basis of their common affine hull.
/// W1 and W1σ are invariant under this map, which lets low-dimensional data
/// embedded in high ambient dimension use the low-dimensional estimators.
struct AffineReduction {
  std::size_t rank = 0;
  PointCloud a;
  PointCloud b;
};
AffineReduction reduce_to_common_subspace(const PointCloud& a, const PointCloud& b, double rel_tol = 1e-9);

/// Standard normal CDF and P(l < Z <= u) computed without cancellation.
double normal_cdf(double x);
double normal_interval(double l, double u);

}  // namespace swd
