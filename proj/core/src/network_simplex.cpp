#include "swd/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace swd {

namespace {

constexpr std::int8_t kStateLower = 1;
constexpr std::int8_t kStateTree = 0;
constexpr std::int8_t kDirUp = 1;
constexpr std::int8_t kDirDown = -1;
constexpr std::int64_t kInfFlow = std::numeric_limits<std::int64_t>::max();

}  // namespace

NetworkSimplex::NetworkSimplex(std::size_t node_count) : node_num_(node_count) {
  if (node_count >= static_cast<std::size_t>(std::numeric_limits<Index>::max() / 2)) {
    throw std::length_error("network simplex: too many nodes");
  }
  supply_.assign(node_num_ + 1, 0);
}

void NetworkSimplex::reserve_arcs(std::size_t count) {
  source_.reserve(count + node_num_);
  target_.reserve(count + node_num_);
  cost_.reserve(count + node_num_);
}

std::size_t NetworkSimplex::add_arc(std::size_t source, std::size_t target, double cost) {
  if (source >= node_num_ || target >= node_num_) throw std::out_of_range("network simplex: bad arc endpoint");
  if (arc_num_ + node_num_ >= static_cast<std::size_t>(std::numeric_limits<Index>::max())) {
    throw std::length_error("network simplex: too many arcs");
  }
  source_.push_back(static_cast<Index>(source));
  target_.push_back(static_cast<Index>(target));
  cost_.push_back(cost);
  return arc_num_++;
}

void NetworkSimplex::set_supplies(std::span<const std::int64_t> supplies) {
  if (supplies.size() != node_num_) throw std::invalid_argument("network simplex: one supply per node");
  std::copy(supplies.begin(), supplies.end(), supply_.begin());
}

void NetworkSimplex::init() {
  const std::size_t all_arc_num = arc_num_ + node_num_;
  source_.resize(all_arc_num);
  target_.resize(all_arc_num);
  cost_.resize(all_arc_num);
  flow_.assign(all_arc_num, 0);
  state_.assign(all_arc_num, kStateLower);

  pi_.assign(node_num_ + 1, 0.0);
  parent_.assign(node_num_ + 1, 0);
  pred_.assign(node_num_ + 1, 0);
  thread_.assign(node_num_ + 1, 0);
  rev_thread_.assign(node_num_ + 1, 0);
  succ_num_.assign(node_num_ + 1, 0);
  last_succ_.assign(node_num_ + 1, 0);
  pred_dir_.assign(node_num_ + 1, kDirUp);

  double max_cost = 0.0;
  for (std::size_t e = 0; e < arc_num_; ++e) max_cost = std::max(max_cost, std::abs(cost_[e]));
  const double art_cost = (max_cost + 1.0) * static_cast<double>(node_num_ + 1);
  // Reduced costs are differences of potentials of magnitude up to art_cost.
  epsilon_ = std::max(1e-13 * (max_cost + 1.0), 64.0 * std::numeric_limits<double>::epsilon() * art_cost);

  root_ = static_cast<Index>(node_num_);
  parent_[root_] = -1;
  pred_[root_] = -1;
  thread_[root_] = 0;
  rev_thread_[0] = root_;
  succ_num_[root_] = static_cast<Index>(node_num_ + 1);
  last_succ_[root_] = root_ - 1;
  supply_[root_] = 0;
  pi_[root_] = 0.0;

  for (Index u = 0, e = static_cast<Index>(arc_num_); u != root_; ++u, ++e) {
    parent_[u] = root_;
    pred_[u] = e;
    thread_[u] = u + 1;
    rev_thread_[u + 1] = u;
    succ_num_[u] = 1;
    last_succ_[u] = u;
    state_[e] = kStateTree;
    if (supply_[u] >= 0) {
      pred_dir_[u] = kDirUp;
      pi_[u] = 0.0;
      source_[e] = u;
      target_[e] = root_;
      flow_[e] = supply_[u];
      cost_[e] = 0.0;
    } else {
      pred_dir_[u] = kDirDown;
      pi_[u] = art_cost;
      source_[e] = root_;
      target_[e] = u;
      flow_[e] = -supply_[u];
      cost_[e] = art_cost;
    }
  }

  search_arc_num_ = arc_num_;
  block_size_ = std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(static_cast<double>(arc_num_))));
  next_arc_ = 0;
  pivots_ = 0;
}

bool NetworkSimplex::find_entering_arc() {
  double min = -epsilon_;
  bool found = false;
  std::size_t cnt = block_size_;
  std::size_t e = next_arc_;
  for (; e < search_arc_num_; ++e) {
    const double c = state_[e] * (cost_[e] + pi_[source_[e]] - pi_[target_[e]]);
    if (c < min) {
      min = c;
      in_arc_ = static_cast<Index>(e);
      found = true;
    }
    if (--cnt == 0) {
      if (found) {
        next_arc_ = e;
        return true;
      }
      cnt = block_size_;
    }
  }
  for (e = 0; e < next_arc_; ++e) {
    const double c = state_[e] * (cost_[e] + pi_[source_[e]] - pi_[target_[e]]);
    if (c < min) {
      min = c;
      in_arc_ = static_cast<Index>(e);
      found = true;
    }
    if (--cnt == 0) {
      if (found) {
        next_arc_ = e;
        return true;
      }
      cnt = block_size_;
    }
  }
  if (!found) return false;
  next_arc_ = e;
  return true;
}

void NetworkSimplex::find_join_node() {
  Index u = source_[in_arc_];
  Index v = target_[in_arc_];
  while (u != v) {
    if (succ_num_[u] < succ_num_[v]) {
      u = parent_[u];
    } else {
      v = parent_[v];
    }
  }
  join_ = u;
}

bool NetworkSimplex::find_leaving_arc() {
  // The entering arc is always at its lower bound (uncapacitated arcs).
  const Index first = source_[in_arc_];
  const Index second = target_[in_arc_];
  delta_ = kInfFlow;
  int result = 0;
  for (Index u = first; u != join_; u = parent_[u]) {
    const std::int64_t d = pred_dir_[u] == kDirUp ? flow_[pred_[u]] : kInfFlow;
    if (d < delta_) {
      delta_ = d;
      u_out_ = u;
      result = 1;
    }
  }
  for (Index u = second; u != join_; u = parent_[u]) {
    const std::int64_t d = pred_dir_[u] == kDirDown ? flow_[pred_[u]] : kInfFlow;
    if (d <= delta_) {
      delta_ = d;
      u_out_ = u;
      result = 2;
    }
  }
  if (result == 1) {
    u_in_ = first;
    v_in_ = second;
  } else {
    u_in_ = second;
    v_in_ = first;
  }
  return result != 0;
}

void NetworkSimplex::change_flow() {
  if (delta_ > 0) {
    const std::int64_t val = delta_;
    flow_[in_arc_] += val;
    for (Index u = source_[in_arc_]; u != join_; u = parent_[u]) flow_[pred_[u]] -= pred_dir_[u] * val;
    for (Index u = target_[in_arc_]; u != join_; u = parent_[u]) flow_[pred_[u]] += pred_dir_[u] * val;
  }
  state_[in_arc_] = kStateTree;
  state_[pred_[u_out_]] = kStateLower;
}

void NetworkSimplex::update_tree_structure() {
  const Index old_rev_thread = rev_thread_[u_out_];
  const Index old_succ_num = succ_num_[u_out_];
  const Index old_last_succ = last_succ_[u_out_];
  v_out_ = parent_[u_out_];

  if (u_in_ == u_out_) {
    parent_[u_in_] = v_in_;
    pred_[u_in_] = in_arc_;
    pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? kDirUp : kDirDown;

    if (thread_[v_in_] != u_out_) {
      Index after = thread_[old_last_succ];
      thread_[old_rev_thread] = after;
      rev_thread_[after] = old_rev_thread;
      after = thread_[v_in_];
      thread_[v_in_] = u_out_;
      rev_thread_[u_out_] = v_in_;
      thread_[old_last_succ] = after;
      rev_thread_[after] = old_last_succ;
    }
  } else {
    const Index thread_continue = old_rev_thread == v_in_ ? thread_[old_last_succ] : thread_[v_in_];

    // Reverse the stem between u_in and u_out, re-threading each subtree.
    Index stem = u_in_;
    Index par_stem = v_in_;
    Index next_stem = 0;
    Index last = last_succ_[u_in_];
    Index before = 0;
    Index after = thread_[last];
    thread_[v_in_] = u_in_;
    dirty_revs_.clear();
    dirty_revs_.push_back(v_in_);
    while (stem != u_out_) {
      next_stem = parent_[stem];
      thread_[last] = next_stem;
      dirty_revs_.push_back(last);

      before = rev_thread_[stem];
      thread_[before] = after;
      rev_thread_[after] = before;

      parent_[stem] = par_stem;
      par_stem = stem;
      stem = next_stem;

      last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem] : last_succ_[stem];
      after = thread_[last];
    }
    parent_[u_out_] = par_stem;
    thread_[last] = thread_continue;
    rev_thread_[thread_continue] = last;
    last_succ_[u_out_] = last;

    if (old_rev_thread != v_in_) {
      thread_[old_rev_thread] = after;
      rev_thread_[after] = old_rev_thread;
    }

    for (Index u : dirty_revs_) rev_thread_[thread_[u]] = u;

    Index tmp_sc = 0;
    const Index tmp_ls = last_succ_[u_out_];
    for (Index u = u_out_, p = parent_[u]; u != u_in_; u = p, p = parent_[u]) {
      pred_[u] = pred_[p];
      pred_dir_[u] = static_cast<std::int8_t>(-pred_dir_[p]);
      tmp_sc += succ_num_[u] - succ_num_[p];
      succ_num_[u] = tmp_sc;
      last_succ_[p] = tmp_ls;
    }
    pred_[u_in_] = in_arc_;
    pred_dir_[u_in_] = u_in_ == source_[in_arc_] ? kDirUp : kDirDown;
    succ_num_[u_in_] = old_succ_num;
  }

  const Index up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
  const Index last_succ_out = last_succ_[u_out_];
  for (Index u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u]) last_succ_[u] = last_succ_out;

  if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
    for (Index u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u]) {
      last_succ_[u] = old_rev_thread;
    }
  } else if (last_succ_out != old_last_succ) {
    for (Index u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u]) {
      last_succ_[u] = last_succ_out;
    }
  }

  for (Index u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
  for (Index u = v_out_; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
}

void NetworkSimplex::update_potential() {
  const double sigma = pi_[v_in_] - pi_[u_in_] - pred_dir_[u_in_] * cost_[in_arc_];
  const Index end = thread_[last_succ_[u_in_]];
  for (Index u = u_in_; u != end; u = thread_[u]) pi_[u] += sigma;
}

NetworkSimplex::Status NetworkSimplex::run() {
  const std::int64_t total = std::accumulate(supply_.begin(), supply_.begin() + static_cast<std::ptrdiff_t>(node_num_),
                                             std::int64_t{0});
  if (total != 0) return Status::infeasible;
  if (node_num_ == 0) return Status::optimal;
  init();
  while (find_entering_arc()) {
    find_join_node();
    const bool change = find_leaving_arc();
    if (!change || delta_ == kInfFlow) return Status::unbounded;
    change_flow();
    update_tree_structure();
    update_potential();
    ++pivots_;
  }
  for (std::size_t e = arc_num_; e < arc_num_ + node_num_; ++e) {
    if (flow_[e] != 0) return Status::infeasible;
  }
  return Status::optimal;
}

double NetworkSimplex::total_cost() const {
  long double acc = 0.0L;
  for (std::size_t e = 0; e < arc_num_; ++e) {
    if (flow_[e] != 0) acc += static_cast<long double>(flow_[e]) * cost_[e];
  }
  return static_cast<double>(acc);
}

double NetworkSimplex::max_dual_violation() const {
  double worst = 0.0;
  for (std::size_t e = 0; e < arc_num_; ++e) {
    const double reduced = cost_[e] + pi_[source_[e]] - pi_[target_[e]];
    if (state_[e] == kStateLower) worst = std::max(worst, -reduced);
    else worst = std::max(worst, std::abs(reduced));
  }
  return worst;
}

}  // namespace swd
