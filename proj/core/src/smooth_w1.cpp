#include "swd/smooth_w1.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "swd/errors.hpp"
#include "swd/exact_ot.hpp"

namespace swd {

std::string to_string(SmoothingMethod method) {
  switch (method) {
    case SmoothingMethod::automatic: return "auto";
    case SmoothingMethod::mc_exact: return "mc-exact";
    case SmoothingMethod::mc_flow: return "mc-flow";
    case SmoothingMethod::mc_sinkhorn: return "mc-sinkhorn";
    case SmoothingMethod::quadrature_1d: return "quadrature-1d";
    case SmoothingMethod::grid_flow: return "grid-flow";
  }
  return "unknown";
}

SmoothingMethod parse_smoothing_method(std::string_view name) {
  for (auto m : {SmoothingMethod::automatic, SmoothingMethod::mc_exact, SmoothingMethod::mc_flow,
                 SmoothingMethod::mc_sinkhorn, SmoothingMethod::quadrature_1d, SmoothingMethod::grid_flow}) {
    if (to_string(m) == name) return m;
  }
  throw InputError("unknown method '" + std::string(name) +
                   "' (expected auto, mc-exact, mc-flow, mc-sinkhorn, quadrature-1d or grid-flow)");
}

void SmoothingConfig::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InputError("sigma must be ≥ 0");
  if (replicas < 1) throw InputError("replicas must be ≥ 1");
  if (repeats < 1) throw InputError("repeats must be ≥ 1");
  if (sinkhorn_epsilon && !(*sinkhorn_epsilon > 0.0)) throw InputError("sinkhorn epsilon must be > 0");
  if (sinkhorn_max_iters < 1) throw InputError("sinkhorn max_iters must be ≥ 1");
  if (!(quadrature_tol > 0.0)) throw InputError("quadrature tolerance must be > 0");
  if (!(grid.spacing >= 0.0)) throw InputError("grid spacing must be ≥ 0");
  if (!(grid.margin >= 0.0)) throw InputError("grid margin must be ≥ 0");
  if (grid.stencil_radius < 1) throw InputError("grid stencil radius must be ≥ 1");
  if (grid.max_cells < 1) throw InputError("grid max_cells must be ≥ 1");
}

PointCloud smooth_cloud(const PointCloud& cloud, double sigma, int replicas, const Seed& seed) {
  if (!(sigma >= 0.0)) throw InputError("sigma must be ≥ 0");
  if (replicas < 1) throw InputError("replicas must be ≥ 1");
  const std::size_t d = cloud.dim();
  const auto k = static_cast<std::size_t>(replicas);
  std::vector<double> coords(cloud.size() * k * d);
  RandomStream rng(seed);
  std::size_t out = 0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t c = 0; c < d; ++c) coords[out++] = cloud(i, c) + sigma * rng.normal();
    }
  }
  return PointCloud(d, std::move(coords));
}

int replicas_for(const SmoothingConfig& config, std::size_t cloud_size) {
  std::size_t k = static_cast<std::size_t>(config.replicas);
  if (config.min_smoothed_points > 0) {
    k = std::max(k, (config.min_smoothed_points + cloud_size - 1) / cloud_size);
  }
  return static_cast<int>(k);
}

namespace {

double median_cost(const PointCloud& a, const PointCloud& b) {
  auto cost = euclidean_cost_matrix(a, b);
  auto mid = cost.begin() + static_cast<std::ptrdiff_t>(cost.size() / 2);
  std::nth_element(cost.begin(), mid, cost.end());
  return *mid;
}

void finish_mean(SwdEstimate& est) {
  const auto& v = est.per_repeat_values;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  est.value = mean;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    est.standard_error = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  } else {
    est.standard_error = 0.0;
  }
}

SwdEstimate monte_carlo(const PointCloud& a, const PointCloud& b, const SmoothingConfig& cfg, SmoothingMethod method) {
  SwdEstimate est;
  est.diagnostics.reduced_dim = a.dim();
  // Without noise every repeat is the same computation.
  const int repeats = cfg.sigma == 0.0 ? 1 : cfg.repeats;
  const int ka = cfg.sigma == 0.0 ? 1 : replicas_for(cfg, a.size());
  const int kb = cfg.sigma == 0.0 ? 1 : replicas_for(cfg, b.size());
  if (method == SmoothingMethod::mc_exact && a.size() * static_cast<std::size_t>(ka) != b.size() * static_cast<std::size_t>(kb)) {
    method = SmoothingMethod::mc_flow;
  }
  est.method = method;
  for (int r = 0; r < repeats; ++r) {
    const Seed seed = cfg.noise_seed.derive("repeat", static_cast<std::uint64_t>(r));
    // Both clouds read the same noise stream, so identical inputs give 0.
    const PointCloud sa = smooth_cloud(a, cfg.sigma, ka, seed);
    const PointCloud sb = smooth_cloud(b, cfg.sigma, kb, seed);
    OtSolution sol;
    switch (method) {
      case SmoothingMethod::mc_exact:
        sol = w1_assignment(sa, sb);
        break;
      case SmoothingMethod::mc_flow:
        sol = w1_mincost_flow(empirical_measure(sa), empirical_measure(sb));
        break;
      default: {
        SinkhornOptions opt;
        opt.epsilon = cfg.sinkhorn_epsilon ? *cfg.sinkhorn_epsilon : std::max(1e-12, 0.01 * median_cost(sa, sb));
        opt.max_iters = cfg.sinkhorn_max_iters;
        opt.tol = cfg.sinkhorn_tol;
        sol = w1_sinkhorn(empirical_measure(sa), empirical_measure(sb), opt);
        break;
      }
    }
    est.per_repeat_values.push_back(sol.distance);
    est.diagnostics.iterations += sol.iterations;
    est.diagnostics.gap = std::max(est.diagnostics.gap, sol.gap);
    est.diagnostics.converged = est.diagnostics.converged && sol.converged;
  }
  finish_mean(est);
  return est;
}

SwdEstimate deterministic(double value, SmoothingMethod method, SwdDiagnostics diag) {
  SwdEstimate est;
  est.value = value;
  est.method = method;
  est.per_repeat_values = {value};
  est.diagnostics = std::move(diag);
  return est;
}

SwdEstimate quadrature(const PointCloud& a, const PointCloud& b, const SmoothingConfig& cfg, std::size_t reduced) {
  const auto q = swd_quadrature_1d(a, b, cfg.sigma, cfg.quadrature_tol);
  SwdDiagnostics diag;
  diag.reduced_dim = reduced;
  diag.iterations = q.evaluations;
  diag.converged = q.converged;
  diag.truncation_bound = q.truncation_bound;
  return deterministic(q.value, SmoothingMethod::quadrature_1d, diag);
}

SwdEstimate grid(const PointCloud& a, const PointCloud& b, const SmoothingConfig& cfg, std::size_t reduced) {
  auto g = grid_smooth_w1(a, b, cfg.sigma, cfg.grid);
  SwdDiagnostics diag;
  diag.reduced_dim = reduced;
  diag.iterations = g.diagnostics.pivots;
  diag.grid = std::move(g.diagnostics);
  return deterministic(g.value, SmoothingMethod::grid_flow, diag);
}

}  // namespace

SwdEstimate swd_estimate(const PointCloud& a, const PointCloud& b, const SmoothingConfig& config) {
  config.validate();
  if (a.dim() != b.dim()) {
    throw InputError("dimension mismatch between point clouds: " + std::to_string(a.dim()) + " vs " +
                     std::to_string(b.dim()));
  }
  switch (config.method) {
    case SmoothingMethod::mc_exact:
    case SmoothingMethod::mc_flow:
    case SmoothingMethod::mc_sinkhorn:
      return monte_carlo(a, b, config, config.method);
    case SmoothingMethod::quadrature_1d:
      if (a.dim() != 1) throw InputError("quadrature-1d requires one-dimensional data");
      if (config.sigma == 0.0) throw InputError("quadrature-1d requires sigma > 0");
      return quadrature(a, b, config, 1);
    case SmoothingMethod::grid_flow: {
      if (config.sigma == 0.0) throw InputError("grid-flow requires sigma > 0");
      if (a.dim() <= 3) return grid(a, b, config, a.dim());
      auto red = reduce_to_common_subspace(a, b);
      if (red.rank > 3) throw InputError("grid-flow requires data spanning at most 3 dimensions");
      return grid(red.a, red.b, config, red.a.dim());
    }
    case SmoothingMethod::automatic:
      break;
  }

  if (config.sigma == 0.0) return monte_carlo(a, b, config, SmoothingMethod::mc_exact);
  const bool reducible = a.dim() > 1;
  if (!reducible) return quadrature(a, b, config, 1);
  auto red = reduce_to_common_subspace(a, b);
  if (red.rank == 0) {
    // Every point coincides: both smoothed laws are the same Gaussian.
    SwdDiagnostics diag;
    diag.reduced_dim = 0;
    return deterministic(0.0, SmoothingMethod::quadrature_1d, diag);
  }
  if (red.rank <= 1) return quadrature(red.a, red.b, config, red.rank);
  if (red.rank <= 3) return red.rank == a.dim() ? grid(a, b, config, red.rank) : grid(red.a, red.b, config, red.rank);
  return monte_carlo(a, b, config, SmoothingMethod::mc_exact);
}

StabilityGap stability_gap(const PointCloud& a, const PointCloud& b, double sigma1, double sigma2,
                           const SmoothingConfig& config) {
  if (!(sigma1 >= 0.0) || !(sigma2 >= 0.0)) throw InputError("sigma must be ≥ 0");
  SmoothingConfig c1 = config;
  c1.sigma = sigma1;
  SmoothingConfig c2 = config;
  c2.sigma = sigma2;
  StabilityGap out;
  out.at_sigma1 = swd_estimate(a, b, c1);
  out.at_sigma2 = swd_estimate(a, b, c2);
  out.gap = std::abs(out.at_sigma1.value - out.at_sigma2.value);
  out.bound = 2.0 * std::sqrt(static_cast<double>(a.dim()) * std::abs(sigma1 * sigma1 - sigma2 * sigma2));
  out.standard_error = std::hypot(out.at_sigma1.standard_error, out.at_sigma2.standard_error);
  return out;
}

// ---------------------------------------------------------------------------

SmoothedCdf1d::SmoothedCdf1d(const PointCloud& cloud, double sigma) : sigma_(sigma) {
  if (cloud.dim() != 1) throw InputError("smoothed CDF requires one-dimensional data");
  if (!(sigma > 0.0)) throw InputError("smoothed CDF requires sigma > 0");
  sorted_.assign(cloud.coords().begin(), cloud.coords().end());
  std::sort(sorted_.begin(), sorted_.end());
}

double SmoothedCdf1d::operator()(double t) const {
  // Points more than 9σ away contribute 0 or 1 up to ~1e-19 each.
  constexpr double kReach = 9.0;
  const auto below = std::lower_bound(sorted_.begin(), sorted_.end(), t - kReach * sigma_);
  const auto above = std::upper_bound(below, sorted_.end(), t + kReach * sigma_);
  double acc = static_cast<double>(below - sorted_.begin());
  for (auto it = below; it != above; ++it) acc += normal_cdf((t - *it) / sigma_);
  return acc / static_cast<double>(sorted_.size());
}

TabulatedCdf1d::TabulatedCdf1d(const PointCloud& cloud, double sigma, double lo, double hi, double step)
    : lo_(lo), step_(step) {
  if (!(hi > lo) || !(step > 0.0)) throw InputError("tabulated CDF: bad range");
  const SmoothedCdf1d exact(cloud, sigma);
  std::vector<double> pts(cloud.coords().begin(), cloud.coords().end());
  std::sort(pts.begin(), pts.end());
  const auto count = static_cast<std::size_t>(std::ceil((hi - lo) / step)) + 1;
  value_.resize(count);
  slope_.resize(count);
  const double norm = 1.0 / (static_cast<double>(pts.size()) * sigma * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t j = 0; j < count; ++j) {
    const double t = lo + static_cast<double>(j) * step;
    value_[j] = exact(t);
    const auto first = std::lower_bound(pts.begin(), pts.end(), t - 9.0 * sigma);
    const auto last = std::upper_bound(first, pts.end(), t + 9.0 * sigma);
    double dens = 0.0;
    for (auto it = first; it != last; ++it) {
      const double z = (t - *it) / sigma;
      dens += std::exp(-0.5 * z * z);
    }
    slope_[j] = dens * norm;
  }
}

double TabulatedCdf1d::operator()(double t) const {
  const double pos = (t - lo_) / step_;
  if (pos <= 0.0) return value_.front();
  if (pos >= static_cast<double>(value_.size() - 1)) return value_.back();
  const auto j = static_cast<std::size_t>(pos);
  const double u = pos - static_cast<double>(j);
  const double u2 = u * u, u3 = u2 * u;
  const double h00 = 2 * u3 - 3 * u2 + 1, h10 = u3 - 2 * u2 + u, h01 = -2 * u3 + 3 * u2, h11 = u3 - u2;
  return h00 * value_[j] + h10 * step_ * slope_[j] + h01 * value_[j + 1] + h11 * step_ * slope_[j + 1];
}

QuadratureResult l1_cdf_distance(const CdfFunction& f, const CdfFunction& g, double lo, double hi, double scale,
                                 double tol) {
  QuadratureResult out;
  if (!(hi > lo)) return out;
  auto diff = [&](double t) {
    ++out.evaluations;
    return f(t) - g(t);
  };

  // Coarse scan for sign changes of F − G.
  const double h0 = scale / 4.0;
  const auto coarse = std::max<std::size_t>(16, static_cast<std::size_t>(std::ceil((hi - lo) / h0)));
  std::vector<double> t(coarse + 1), v(coarse + 1);
  for (std::size_t k = 0; k <= coarse; ++k) {
    t[k] = k == coarse ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(coarse);
    v[k] = diff(t[k]);
  }
  std::vector<double> breaks{lo};
  for (std::size_t k = 0; k < coarse; ++k) {
    if (k > 0 && v[k] == 0.0) {
      breaks.push_back(t[k]);
      continue;
    }
    if (!(v[k] * v[k + 1] < 0.0)) continue;
    double a = t[k], b = t[k + 1], fa = v[k];
    for (int it = 0; it < 200 && b - a > 1e-13 * std::max(scale, std::abs(a)); ++it) {
      const double mid = 0.5 * (a + b);
      const double fm = diff(mid);
      if (fm == 0.0) {
        a = b = mid;
        break;
      }
      if ((fm < 0.0) == (fa < 0.0)) {
        a = mid;
        fa = fm;
      } else {
        b = mid;
      }
    }
    breaks.push_back(0.5 * (a + b));
  }
  breaks.push_back(hi);

  struct Segment {
    double a, b;
    std::vector<double> values;  // at 2^level·base + 1 equispaced nodes
  };
  std::vector<Segment> segments;
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    const double a = breaks[s], b = breaks[s + 1];
    if (!(b > a)) continue;
    const auto panels = 2 * std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((b - a) / (2.0 * h0))));
    Segment seg{a, b, std::vector<double>(panels + 1)};
    for (std::size_t k = 0; k <= panels; ++k) {
      seg.values[k] = diff(a + (b - a) * static_cast<double>(k) / static_cast<double>(panels));
    }
    segments.push_back(std::move(seg));
  }

  auto simpson = [](const Segment& seg) {
    const std::size_t panels = seg.values.size() - 1;
    const double h = (seg.b - seg.a) / static_cast<double>(panels);
    double acc = seg.values.front() + seg.values.back();
    for (std::size_t k = 1; k < panels; ++k) acc += (k % 2 ? 4.0 : 2.0) * seg.values[k];
    return std::abs(acc * h / 3.0);
  };
  auto total = [&] {
    double acc = 0.0;
    for (const auto& seg : segments) acc += simpson(seg);
    return acc;
  };

  double current = total();
  out.converged = false;
  for (int level = 0; level < 14; ++level) {
    for (auto& seg : segments) {
      const std::size_t panels = seg.values.size() - 1;
      std::vector<double> refined(2 * panels + 1);
      for (std::size_t k = 0; k <= panels; ++k) refined[2 * k] = seg.values[k];
      for (std::size_t k = 0; k < panels; ++k) {
        refined[2 * k + 1] = diff(seg.a + (seg.b - seg.a) * (static_cast<double>(2 * k + 1) /
                                                             static_cast<double>(2 * panels)));
      }
      seg.values = std::move(refined);
    }
    const double next = total();
    const bool done = std::abs(next - current) <= tol * (1.0 + next);
    current = next;
    if (done) {
      out.converged = true;
      break;
    }
  }
  out.value = current;
  return out;
}

QuadratureResult swd_quadrature_1d(const PointCloud& a, const PointCloud& b, double sigma, double tol) {
  if (a.dim() != 1 || b.dim() != 1) throw InputError("quadrature-1d requires one-dimensional data");
  if (!(sigma > 0.0)) throw InputError("quadrature-1d requires sigma > 0");
  if (!(tol > 0.0)) throw InputError("quadrature tolerance must be > 0");
  const SmoothedCdf1d fa(a, sigma);
  const SmoothedCdf1d fb(b, sigma);
  const double lo = std::min(fa.min_point(), fb.min_point()) - 8.0 * sigma;
  const double hi = std::max(fa.max_point(), fb.max_point()) + 8.0 * sigma;
  auto out = l1_cdf_distance(std::cref(fa), std::cref(fb), lo, hi, sigma, tol);
  // Bound on ∫|F − G| outside [lo, hi].
  out.truncation_bound = 16.0 * sigma * normal_cdf(-8.0);
  return out;
}

}  // namespace swd
