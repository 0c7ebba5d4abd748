#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace swd {

/// Primal network simplex for uncapacitated min-cost transshipment with
/// integer supplies and real arc costs. Block-search pivoting on a spanning
/// tree stored in thread/parent form with an artificial root.
///
/// Supplies must sum to zero; positive entries are sources.
class NetworkSimplex {
 public:
  enum class Status { optimal, infeasible, unbounded };

  explicit NetworkSimplex(std::size_t node_count);

  void reserve_arcs(std::size_t count);
  /// Returns the arc index.
  std::size_t add_arc(std::size_t source, std::size_t target, double cost);
  void set_supplies(std::span<const std::int64_t> supplies);

  Status run();

  [[nodiscard]] std::size_t node_count() const { return node_num_; }
  [[nodiscard]] std::size_t arc_count() const { return arc_num_; }
  [[nodiscard]] std::int64_t flow(std::size_t arc) const { return flow_[arc]; }
  [[nodiscard]] std::size_t arc_source(std::size_t arc) const { return static_cast<std::size_t>(source_[arc]); }
  [[nodiscard]] std::size_t arc_target(std::size_t arc) const { return static_cast<std::size_t>(target_[arc]); }
  [[nodiscard]] double arc_cost(std::size_t arc) const { return cost_[arc]; }
  /// Σ flow·cost over real arcs.
  [[nodiscard]] double total_cost() const;
  [[nodiscard]] std::int64_t pivots() const { return pivots_; }

  /// Largest reduced-cost violation over real arcs at termination; zero (up
  /// to rounding) certifies optimality of the returned flow.
  [[nodiscard]] double max_dual_violation() const;

 private:
  using Index = std::int32_t;

  void init();
  bool find_entering_arc();
  void find_join_node();
  bool find_leaving_arc();
  void change_flow();
  void update_tree_structure();
  void update_potential();

  std::size_t node_num_;
  std::size_t arc_num_ = 0;

  // Arc data; artificial arcs are appended after the real ones in init().
  std::vector<Index> source_;
  std::vector<Index> target_;
  std::vector<double> cost_;
  std::vector<std::int64_t> flow_;
  std::vector<std::int8_t> state_;
  std::vector<std::int64_t> supply_;

  // Spanning-tree data (node_num_ + 1 entries, the root is last).
  std::vector<double> pi_;
  std::vector<Index> parent_;
  std::vector<Index> pred_;
  std::vector<Index> thread_;
  std::vector<Index> rev_thread_;
  std::vector<Index> succ_num_;
  std::vector<Index> last_succ_;
  std::vector<std::int8_t> pred_dir_;
  std::vector<Index> dirty_revs_;

  Index root_ = 0;
  std::size_t search_arc_num_ = 0;
  std::size_t block_size_ = 0;
  std::size_t next_arc_ = 0;
  double epsilon_ = 0.0;

  Index in_arc_ = 0, join_ = 0, u_in_ = 0, v_in_ = 0, u_out_ = 0, v_out_ = 0;
  std::int64_t delta_ = 0;
  std::int64_t pivots_ = 0;
};

}  // namespace swd
