#include "swd/exact_ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "swd/errors.hpp"
#include "swd/network_simplex.hpp"

namespace swd {

std::string to_string(OtMethod method) {
  switch (method) {
    case OtMethod::sorted_1d: return "sorted-1d";
    case OtMethod::assignment: return "assignment";
    case OtMethod::mincost_flow: return "mincost-flow";
    case OtMethod::sinkhorn: return "sinkhorn";
    case OtMethod::bruteforce: return "bruteforce";
  }
  return "unknown";
}

std::vector<double> euclidean_cost_matrix(const PointCloud& a, const PointCloud& b) {
  if (a.dim() != b.dim()) throw InputError("dimension mismatch between point clouds");
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::vector<double> cost(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = a.point(i);
    for (std::size_t j = 0; j < m; ++j) cost[i * m + j] = euclidean_distance(x, b.point(j));
  }
  return cost;
}

// ---------------------------------------------------------------------------

OtSolution w1_sorted_1d(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (a.dim() != 1 || b.dim() != 1) throw InputError("w1_sorted_1d requires one-dimensional measures");
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(a.size() + b.size());
  for (std::size_t i = 0; i < a.size(); ++i) atoms.emplace_back(a.support()(i, 0), a.weights()[i]);
  for (std::size_t j = 0; j < b.size(); ++j) atoms.emplace_back(b.support()(j, 0), -b.weights()[j]);
  std::sort(atoms.begin(), atoms.end(), [](const auto& l, const auto& r) { return l.first < r.first; });

  long double cdf_gap = 0.0L;
  long double total = 0.0L;
  for (std::size_t k = 0; k + 1 < atoms.size(); ++k) {
    cdf_gap += atoms[k].second;
    total += std::abs(cdf_gap) * (atoms[k + 1].first - atoms[k].first);
  }
  OtSolution out;
  out.distance = static_cast<double>(total);
  out.method = OtMethod::sorted_1d;
  return out;
}

// ---------------------------------------------------------------------------
// Dense assignment: column reduction followed by Dijkstra-type shortest
// augmenting paths on reduced costs (Jonker-Volgenant augmentation phase).

namespace {

std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t n) {
  constexpr std::ptrdiff_t kFree = -1;
  std::vector<std::ptrdiff_t> row_sol(n, kFree), col_sol(n, kFree);
  std::vector<double> v(n);

  for (std::size_t jj = n; jj-- > 0;) {
    std::size_t imin = 0;
    double min = cost[jj];
    for (std::size_t i = 1; i < n; ++i) {
      if (cost[i * n + jj] < min) {
        min = cost[i * n + jj];
        imin = i;
      }
    }
    v[jj] = min;
    if (row_sol[imin] == kFree) {
      row_sol[imin] = static_cast<std::ptrdiff_t>(jj);
      col_sol[jj] = static_cast<std::ptrdiff_t>(imin);
    }
  }

  std::vector<std::size_t> free_rows;
  for (std::size_t i = 0; i < n; ++i) {
    if (row_sol[i] == kFree) free_rows.push_back(i);
  }

  std::vector<double> dist(n);
  std::vector<std::size_t> pred(n), collist(n);
  for (std::size_t free_row : free_rows) {
    for (std::size_t j = 0; j < n; ++j) {
      dist[j] = cost[free_row * n + j] - v[j];
      pred[j] = free_row;
      collist[j] = j;
    }
    std::size_t low = 0;  // collist[0..low) scanned
    std::size_t up = 0;   // collist[low..up) at current minimum
    std::size_t last = 0;
    std::size_t end_of_path = 0;
    double min = 0.0;
    bool found = false;
    while (!found) {
      if (up == low) {
        last = low;
        min = dist[collist[up++]];
        for (std::size_t k = up; k < n; ++k) {
          const std::size_t j = collist[k];
          const double h = dist[j];
          if (h <= min) {
            if (h < min) {
              up = low;
              min = h;
            }
            collist[k] = collist[up];
            collist[up++] = j;
          }
        }
        for (std::size_t k = low; k < up; ++k) {
          if (col_sol[collist[k]] == kFree) {
            end_of_path = collist[k];
            found = true;
            break;
          }
        }
      }
      if (!found) {
        const std::size_t j1 = collist[low++];
        const auto i = static_cast<std::size_t>(col_sol[j1]);
        const double h = cost[i * n + j1] - v[j1] - min;
        for (std::size_t k = up; k < n; ++k) {
          const std::size_t j = collist[k];
          const double v2 = cost[i * n + j] - v[j] - h;
          if (v2 < dist[j]) {
            pred[j] = i;
            if (v2 == min) {
              if (col_sol[j] == kFree) {
                end_of_path = j;
                found = true;
                break;
              }
              collist[k] = collist[up];
              collist[up++] = j;
            }
            dist[j] = v2;
          }
        }
      }
    }
    // Columns finalised before the last minimum scan get their prices raised.
    for (std::size_t k = 0; k < last; ++k) {
      const std::size_t j = collist[k];
      v[j] += dist[j] - min;
    }
    std::size_t i = 0;
    do {
      i = pred[end_of_path];
      col_sol[end_of_path] = static_cast<std::ptrdiff_t>(i);
      const std::ptrdiff_t next = row_sol[i];
      row_sol[i] = static_cast<std::ptrdiff_t>(end_of_path);
      end_of_path = static_cast<std::size_t>(next);
    } while (i != free_row);
  }

  std::vector<std::size_t> result(n);
  for (std::size_t i = 0; i < n; ++i) result[i] = static_cast<std::size_t>(row_sol[i]);
  return result;
}

}  // namespace

OtSolution w1_assignment(const PointCloud& a, const PointCloud& b) {
  if (a.dim() != b.dim()) throw InputError("w1_assignment: dimension mismatch");
  if (a.size() != b.size()) throw InputError("w1_assignment: clouds must have equal size");
  const std::size_t n = a.size();
  const auto cost = euclidean_cost_matrix(a, b);
  const auto match = solve_assignment(cost, n);

  TransportPlan plan;
  plan.entries.reserve(n);
  long double total = 0.0L;
  const double mass = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    total += cost[i * n + match[i]];
    plan.entries.push_back({i, match[i], mass});
  }
  OtSolution out;
  out.distance = static_cast<double>(total / static_cast<long double>(n));
  plan.cost = out.distance;
  out.plan = std::move(plan);
  out.method = OtMethod::assignment;
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::int64_t> quantize_weights(std::span<const double> weights, std::int64_t total) {
  long double sum = 0.0L;
  for (double w : weights) sum += w;
  if (!(sum > 0.0L)) throw InputError("weights must have positive total mass");
  std::vector<std::int64_t> q(weights.size());
  std::vector<long double> frac(weights.size());
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const long double scaled = static_cast<long double>(weights[i]) / sum * static_cast<long double>(total);
    const long double fl = std::floor(scaled);
    q[i] = static_cast<std::int64_t>(fl);
    frac[i] = scaled - fl;
    assigned += q[i];
  }
  std::int64_t deficit = total - assigned;
  if (deficit != 0) {
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (deficit > 0) {
      std::stable_sort(order.begin(), order.end(), [&](auto l, auto r) { return frac[l] > frac[r]; });
      for (std::size_t k = 0; deficit > 0; k = (k + 1) % order.size(), --deficit) ++q[order[k]];
    } else {
      std::stable_sort(order.begin(), order.end(), [&](auto l, auto r) { return frac[l] < frac[r]; });
      for (std::size_t k = 0; deficit < 0; k = (k + 1) % order.size()) {
        if (q[order[k]] > 0) {
          --q[order[k]];
          ++deficit;
        }
      }
    }
  }
  return q;
}

IntegerMasses integer_masses(std::span<const double> first, bool first_uniform, std::span<const double> second,
                             bool second_uniform) {
  IntegerMasses out;
  const auto n = static_cast<std::int64_t>(first.size());
  const auto m = static_cast<std::int64_t>(second.size());
  if (first_uniform && second_uniform) {
    const std::int64_t total = std::lcm(n, m);
    if (total > 0 && total < (std::int64_t{1} << 50)) {
      out.total = total;
      out.first.assign(first.size(), total / n);
      out.second.assign(second.size(), total / m);
      return out;
    }
  }
  out.total = std::int64_t{1} << 50;
  out.first = quantize_weights(first, out.total);
  out.second = quantize_weights(second, out.total);
  return out;
}

OtSolution w1_mincost_flow(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (a.dim() != b.dim()) throw InputError("w1_mincost_flow: dimension mismatch");
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const IntegerMasses masses = integer_masses(a.weights(), a.is_uniform(), b.weights(), b.is_uniform());

  NetworkSimplex solver(n + m);
  solver.reserve_arcs(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = a.support().point(i);
    for (std::size_t j = 0; j < m; ++j) solver.add_arc(i, n + j, euclidean_distance(x, b.support().point(j)));
  }
  std::vector<std::int64_t> supply(n + m);
  for (std::size_t i = 0; i < n; ++i) supply[i] = masses.first[i];
  for (std::size_t j = 0; j < m; ++j) supply[n + j] = -masses.second[j];
  solver.set_supplies(supply);
  if (solver.run() != NetworkSimplex::Status::optimal) {
    throw std::runtime_error("w1_mincost_flow: network simplex did not reach an optimal basis");
  }

  const auto scale = static_cast<long double>(masses.total);
  TransportPlan plan;
  long double cost = 0.0L;
  for (std::size_t e = 0; e < solver.arc_count(); ++e) {
    const std::int64_t f = solver.flow(e);
    if (f == 0) continue;
    const double mass = static_cast<double>(static_cast<long double>(f) / scale);
    plan.entries.push_back({solver.arc_source(e), solver.arc_target(e) - n, mass});
    cost += static_cast<long double>(f) * solver.arc_cost(e);
  }
  OtSolution out;
  out.distance = static_cast<double>(cost / scale);
  plan.cost = out.distance;
  out.plan = std::move(plan);
  out.method = OtMethod::mincost_flow;
  out.iterations = solver.pivots();
  return out;
}

// ---------------------------------------------------------------------------

namespace {

double log_sum_exp(std::span<const double> values) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : values) mx = std::max(mx, v);
  if (!std::isfinite(mx)) return mx;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - mx);
  return mx + std::log(acc);
}

}  // namespace

OtSolution w1_sinkhorn(const DiscreteMeasure& a, const DiscreteMeasure& b, const SinkhornOptions& options) {
  if (a.dim() != b.dim()) throw InputError("w1_sinkhorn: dimension mismatch");
  if (!(options.epsilon > 0.0)) throw InputError("w1_sinkhorn: epsilon must be > 0");
  if (options.max_iters < 1) throw InputError("w1_sinkhorn: max_iters must be >= 1");
  if (!(options.tol > 0.0)) throw InputError("w1_sinkhorn: tol must be > 0");

  const std::size_t n = a.size();
  const std::size_t m = b.size();
  const double eps = options.epsilon;
  const auto cost = euclidean_cost_matrix(a.support(), b.support());
  std::vector<double> log_a(n), log_b(m);
  for (std::size_t i = 0; i < n; ++i) log_a[i] = std::log(a.weights()[i]);
  for (std::size_t j = 0; j < m; ++j) log_b[j] = std::log(b.weights()[j]);

  std::vector<double> f(n, 0.0), g(m, 0.0), scratch(std::max(n, m));
  double violation = std::numeric_limits<double>::infinity();
  int iter = 0;
  auto row_violation = [&] {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) scratch[j] = (f[i] + g[j] - cost[i * m + j]) / eps + log_b[j];
      const double row = std::exp(log_sum_exp({scratch.data(), m}) + log_a[i]);
      total += std::abs(row - a.weights()[i]);
    }
    return total;
  };

  while (iter < options.max_iters) {
    ++iter;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) scratch[j] = (g[j] - cost[i * m + j]) / eps + log_b[j];
      f[i] = std::isfinite(log_a[i]) ? -eps * log_sum_exp({scratch.data(), m}) : 0.0;
    }
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < n; ++i) scratch[i] = (f[i] - cost[i * m + j]) / eps + log_a[i];
      g[j] = std::isfinite(log_b[j]) ? -eps * log_sum_exp({scratch.data(), n}) : 0.0;
    }
    violation = row_violation();
    if (violation <= options.tol) break;
  }

  TransportPlan plan;
  long double total = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double mass = std::exp((f[i] + g[j] - cost[i * m + j]) / eps + log_a[i] + log_b[j]);
      if (mass > 0.0) {
        total += static_cast<long double>(mass) * cost[i * m + j];
        plan.entries.push_back({i, j, mass});
      }
    }
  }
  OtSolution out;
  out.distance = static_cast<double>(total);
  plan.cost = out.distance;
  out.plan = std::move(plan);
  out.method = OtMethod::sinkhorn;
  out.iterations = iter;
  out.gap = violation;
  out.converged = violation <= options.tol;
  return out;
}

// ---------------------------------------------------------------------------

OtSolution w1_bruteforce(const PointCloud& a, const PointCloud& b) {
  if (a.dim() != b.dim()) throw InputError("w1_bruteforce: dimension mismatch");
  if (a.size() != b.size()) throw InputError("w1_bruteforce: clouds must have equal size");
  if (a.size() > 8) throw InputError("w1_bruteforce: at most 8 points per cloud");
  const std::size_t n = a.size();
  const auto cost = euclidean_cost_matrix(a, b);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> best_perm = perm;
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += cost[i * n + perm[i]];
    if (total < best) {
      best = total;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  TransportPlan plan;
  const double mass = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) plan.entries.push_back({i, best_perm[i], mass});
  OtSolution out;
  out.distance = best / static_cast<double>(n);
  plan.cost = out.distance;
  out.plan = std::move(plan);
  out.method = OtMethod::bruteforce;
  return out;
}

}  // namespace swd
