#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "swd/measures.hpp"

namespace swd {

struct TransportEntry {
  std::size_t source;
  std::size_t target;
  double mass;
};

/// Sparse coupling between two discrete measures.
struct TransportPlan {
  std::vector<TransportEntry> entries;
  double cost = 0.0;  // Σ mass·‖x_i − y_j‖
};

enum class OtMethod { sorted_1d, assignment, mincost_flow, sinkhorn, bruteforce };

std::string to_string(OtMethod method);

struct OtSolution {
  double distance = 0.0;
  std::optional<TransportPlan> plan;
  OtMethod method = OtMethod::mincost_flow;
  std::int64_t iterations = 0;
  /// 0 for exact methods; marginal violation for Sinkhorn.
  double gap = 0.0;
  /// False only when an iterative method stopped at its iteration cap.
  bool converged = true;
};

/// Exact W1 on the line from the merged CDF difference.
OtSolution w1_sorted_1d(const DiscreteMeasure& a, const DiscreteMeasure& b);

/// Exact W1 between uniform measures on equal-size clouds via a dense
/// shortest-augmenting-path assignment solver.
OtSolution w1_assignment(const PointCloud& a, const PointCloud& b);

/// Exact W1 for general weights via network simplex on the complete
/// bipartite graph. Weights are carried as integers: exactly (lcm of the
/// sizes) for uniform inputs, otherwise at a resolution of 2^-50.
OtSolution w1_mincost_flow(const DiscreteMeasure& a, const DiscreteMeasure& b);

struct SinkhornOptions {
  double epsilon = 0.05;
  int max_iters = 10000;
  double tol = 1e-9;
};

/// Log-domain Sinkhorn. Reports ⟨π, C⟩ of the entropic plan, an upward-biased
/// approximation of W1; `gap` holds the final L1 marginal violation.
OtSolution w1_sinkhorn(const DiscreteMeasure& a, const DiscreteMeasure& b, const SinkhornOptions& options);

/// Minimum over all permutations; for testing, n <= 8.
OtSolution w1_bruteforce(const PointCloud& a, const PointCloud& b);

/// Dense Euclidean cost matrix, row-major n×m.
std::vector<double> euclidean_cost_matrix(const PointCloud& a, const PointCloud& b);

/// Integer representation of a pair of probability vectors with a common total.
struct IntegerMasses {
  std::vector<std::int64_t> first;
  std::vector<std::int64_t> second;
  std::int64_t total = 0;
};

IntegerMasses integer_masses(std::span<const double> first, bool first_uniform,
                             std::span<const double> second, bool second_uniform);

/// Largest-remainder rounding of non-negative weights (sum ≈ 1) to integers
/// summing exactly to `total`.
std::vector<std::int64_t> quantize_weights(std::span<const double> weights, std::int64_t total);

}  // namespace swd
