#include "swd/mswe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "swd/errors.hpp"
#include "swd/parallel.hpp"

namespace swd {

std::string to_string(FamilyKind kind) {
  return kind == FamilyKind::gaussian_location ? "gaussian-location" : "gaussian-location-scale";
}

FamilyKind parse_family_kind(std::string_view name) {
  if (name == "gaussian-location") return FamilyKind::gaussian_location;
  if (name == "gaussian-location-scale") return FamilyKind::gaussian_location_scale;
  throw InputError("unknown family '" + std::string(name) +
                   "' (expected gaussian-location or gaussian-location-scale)");
}

std::string to_string(Optimizer optimizer) {
  return optimizer == Optimizer::nelder_mead ? "nelder-mead" : "coordinate-search";
}

Optimizer parse_optimizer(std::string_view name) {
  if (name == "nelder-mead") return Optimizer::nelder_mead;
  if (name == "coordinate-search") return Optimizer::coordinate_search;
  throw InputError("unknown optimizer '" + std::string(name) + "' (expected nelder-mead or coordinate-search)");
}

std::size_t ParametricFamily::parameter_count() const {
  return kind == FamilyKind::gaussian_location ? dim : dim + 1;
}

void ParametricFamily::validate() const {
  if (dim < 1) throw InputError("family dimension must be ≥ 1");
  const std::size_t p = parameter_count();
  if (lower.size() != p || upper.size() != p) {
    throw InputError("parameter box needs " + std::to_string(p) + " lower and upper bounds");
  }
  for (std::size_t k = 0; k < p; ++k) {
    if (!std::isfinite(lower[k]) || !std::isfinite(upper[k]) || !(lower[k] < upper[k])) {
      throw InputError("parameter box must be finite with lower < upper");
    }
  }
  if (kind == FamilyKind::gaussian_location_scale && !(lower[dim] > 0.0)) {
    throw InputError("scale lower bound must be > 0");
  }
}

bool ParametricFamily::contains(std::span<const double> theta) const {
  if (theta.size() != parameter_count()) return false;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    if (!(theta[k] >= lower[k] && theta[k] <= upper[k])) return false;
  }
  return true;
}

DistributionSpec ParametricFamily::model(std::span<const double> theta) const {
  std::vector<double> mean(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(dim));
  const double s = kind == FamilyKind::gaussian_location ? 1.0 : theta[dim];
  return DistributionSpec::gaussian(std::move(mean), std::vector<double>(dim, s * s));
}

PointCloud ParametricFamily::transform(const PointCloud& base, std::span<const double> theta) const {
  if (base.dim() != dim) throw InputError("base sample dimension mismatch");
  const double s = kind == FamilyKind::gaussian_location ? 1.0 : theta[dim];
  std::vector<double> coords(base.coords().begin(), base.coords().end());
  for (std::size_t i = 0; i < base.size(); ++i) {
    for (std::size_t k = 0; k < dim; ++k) coords[i * dim + k] = theta[k] + s * coords[i * dim + k];
  }
  return PointCloud(dim, std::move(coords));
}

void MsweOptions::validate() const {
  smoothing.validate();
  if (starts < 1) throw InputError("starts must be ≥ 1");
  if (!(tolerance > 0.0)) throw InputError("tolerance must be > 0");
  if (max_evaluations < 1) throw InputError("max_evaluations must be ≥ 1");
}

MsweObjective::MsweObjective(const PointCloud& data, const ParametricFamily& family, const MsweOptions& options)
    : data_(data),
      family_(family),
      smoothing_(options.smoothing),
      base_(PointCloud(1, {0.0})),
      method_(options.smoothing.method) {
  family_.validate();
  options.validate();
  if (data.dim() != family.dim) {
    throw InputError("data dimension " + std::to_string(data.dim()) + " does not match family dimension " +
                     std::to_string(family.dim));
  }
  const std::size_t m = options.model_sample_size != 0 ? options.model_sample_size : 4 * data.size();
  base_ = sample(DistributionSpec::standard_gaussian(family.dim), m, options.seed.derive("base"));

  const std::size_t d = family.dim;
  const double sigma = smoothing_.sigma;
  const bool grid_capable = sigma > 0.0 && d >= 2 && d <= 3;
  if (method_ == SmoothingMethod::grid_flow && !grid_capable) {
    throw InputError("grid-flow objective needs sigma > 0 and dimension 2 or 3");
  }
  if (grid_capable && (method_ == SmoothingMethod::automatic || method_ == SmoothingMethod::grid_flow)) {
    method_ = SmoothingMethod::grid_flow;
    // One box for every θ: data plus the extreme transforms of the base.
    std::vector<double> lo(d), hi(d);
    for (std::size_t k = 0; k < d; ++k) {
      double bmin = std::numeric_limits<double>::infinity(), bmax = -bmin;
      for (std::size_t i = 0; i < base_.size(); ++i) {
        bmin = std::min(bmin, base_(i, k));
        bmax = std::max(bmax, base_(i, k));
      }
      const double s_lo = family.kind == FamilyKind::gaussian_location ? 1.0 : family.lower[d];
      const double s_hi = family.kind == FamilyKind::gaussian_location ? 1.0 : family.upper[d];
      lo[k] = family.lower[k] + std::min(s_lo * bmin, s_hi * bmin);
      hi[k] = family.upper[k] + std::max(s_lo * bmax, s_hi * bmax);
      for (std::size_t i = 0; i < data.size(); ++i) {
        lo[k] = std::min(lo[k], data(i, k));
        hi[k] = std::max(hi[k], data(i, k));
      }
    }
    box_ = std::make_shared<const GridBox>(make_grid_box(lo, hi, sigma, smoothing_.grid));
    data_masses_ = smoothed_cell_masses(data_, sigma, *box_);
  } else if (method_ == SmoothingMethod::automatic) {
    method_ = sigma == 0.0 || d > 3 ? SmoothingMethod::mc_exact : SmoothingMethod::quadrature_1d;
  }
}

MsweObjective::~MsweObjective() = default;
MsweObjective::MsweObjective(MsweObjective&&) noexcept = default;
MsweObjective& MsweObjective::operator=(MsweObjective&&) noexcept = default;

double MsweObjective::operator()(std::span<const double> theta) const {
  if (!family_.contains(theta)) throw InputError("theta lies outside the parameter box");
  const PointCloud model = family_.transform(base_, theta);
  if (method_ == SmoothingMethod::grid_flow) {
    const auto masses = smoothed_cell_masses(model, smoothing_.sigma, *box_);
    LatticeTransport transport(*box_, smoothing_.grid.stencil_radius);
    return transport.w1(data_masses_, masses).value;
  }
  SmoothingConfig cfg = smoothing_;
  cfg.method = method_;
  return swd_estimate(data_, model, cfg).value;
}

double mswe_objective(std::span<const double> theta, const PointCloud& data, const ParametricFamily& family,
                      const MsweOptions& options) {
  return MsweObjective(data, family, options)(theta);
}

namespace {

struct Minimum {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  bool converged = false;
};

class Evaluator {
 public:
  Evaluator(const MsweObjective& f, const ParametricFamily& family, FitResult& fit)
      : f_(f), family_(family), fit_(fit) {}

  std::vector<double> project(std::vector<double> x) const {
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::clamp(x[k], family_.lower[k], family_.upper[k]);
    return x;
  }
  double operator()(const std::vector<double>& x) {
    const double v = f_(x);
    ++fit_.evaluations;
    fit_.trace.emplace_back(x, v);
    return v;
  }

 private:
  const MsweObjective& f_;
  const ParametricFamily& family_;
  FitResult& fit_;
};

Minimum nelder_mead(Evaluator& eval, const ParametricFamily& family, std::vector<double> x0, double tol,
                    int budget) {
  const std::size_t p = x0.size();
  std::vector<std::vector<double>> xs{x0};
  for (std::size_t k = 0; k < p; ++k) {
    auto x = x0;
    const double step = 0.1 * (family.upper[k] - family.lower[k]);
    x[k] = x0[k] + step <= family.upper[k] ? x0[k] + step : x0[k] - step;
    xs.push_back(eval.project(x));
  }
  std::vector<double> fs;
  int used = 0;
  for (const auto& x : xs) {
    fs.push_back(eval(x));
    ++used;
  }
  auto combine = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
    std::vector<double> out(p);
    for (std::size_t k = 0; k < p; ++k) out[k] = a[k] + t * (b[k] - a[k]);
    return eval.project(out);
  };

  Minimum best;
  for (;;) {
    std::vector<std::size_t> order(p + 1);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto l, auto r) { return fs[l] < fs[r]; });
    std::vector<std::vector<double>> sx;
    std::vector<double> sf;
    for (auto i : order) {
      sx.push_back(xs[i]);
      sf.push_back(fs[i]);
    }
    xs = std::move(sx);
    fs = std::move(sf);

    double diameter = 0.0;
    for (std::size_t i = 1; i <= p; ++i) diameter = std::max(diameter, euclidean_distance(xs[i], xs[0]));
    if (diameter < tol) {
      best.converged = true;
      break;
    }
    if (used >= budget) break;

    std::vector<double> centroid(p, 0.0);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t k = 0; k < p; ++k) centroid[k] += xs[i][k] / static_cast<double>(p);

    const auto xr = combine(centroid, xs[p], -1.0);
    const double fr = eval(xr);
    ++used;
    if (fr < fs[0]) {
      const auto xe = combine(centroid, xs[p], -2.0);
      const double fe = eval(xe);
      ++used;
      if (fe < fr) {
        xs[p] = xe;
        fs[p] = fe;
      } else {
        xs[p] = xr;
        fs[p] = fr;
      }
      continue;
    }
    if (fr < fs[p - 1]) {
      xs[p] = xr;
      fs[p] = fr;
      continue;
    }
    const bool outside = fr < fs[p];
    const auto xc = outside ? combine(centroid, xr, 0.5) : combine(centroid, xs[p], 0.5);
    const double fc = eval(xc);
    ++used;
    if (fc < std::min(fr, fs[p])) {
      xs[p] = xc;
      fs[p] = fc;
      continue;
    }
    for (std::size_t i = 1; i <= p; ++i) {
      xs[i] = combine(xs[0], xs[i], 0.5);
      fs[i] = eval(xs[i]);
      ++used;
    }
  }
  best.x = xs[0];
  best.value = fs[0];
  return best;
}

Minimum coordinate_search(Evaluator& eval, const ParametricFamily& family, std::vector<double> x0, double tol,
                          int budget) {
  const std::size_t p = x0.size();
  std::vector<double> step(p);
  for (std::size_t k = 0; k < p; ++k) step[k] = 0.25 * (family.upper[k] - family.lower[k]);
  Minimum best;
  best.x = x0;
  best.value = eval(x0);
  int used = 1;
  while (used < budget) {
    if (*std::max_element(step.begin(), step.end()) < tol) {
      best.converged = true;
      break;
    }
    bool improved = false;
    for (std::size_t k = 0; k < p && used < budget; ++k) {
      for (double dir : {1.0, -1.0}) {
        auto x = best.x;
        x[k] += dir * step[k];
        x = eval.project(x);
        if (x == best.x) continue;
        const double v = eval(x);
        ++used;
        if (v < best.value) {
          best.x = std::move(x);
          best.value = v;
          improved = true;
          break;
        }
      }
    }
    if (!improved) {
      for (auto& s : step) s *= 0.5;
    }
  }
  return best;
}

}  // namespace

FitResult fit_mswe(const PointCloud& data, const ParametricFamily& family, const MsweOptions& options) {
  const MsweObjective objective(data, family, options);
  FitResult fit;
  fit.model_sample_size = objective.model_sample_size();
  Evaluator eval(objective, family, fit);
  RandomStream rng(options.seed.derive("starts"));
  Minimum best;
  for (int s = 0; s < options.starts; ++s) {
    std::vector<double> x0(family.parameter_count());
    for (std::size_t k = 0; k < x0.size(); ++k) {
      x0[k] = family.lower[k] + rng.uniform() * (family.upper[k] - family.lower[k]);
    }
    const Minimum m = options.optimizer == Optimizer::nelder_mead
                          ? nelder_mead(eval, family, x0, options.tolerance, options.max_evaluations)
                          : coordinate_search(eval, family, x0, options.tolerance, options.max_evaluations);
    if (m.value < best.value) best = m;
  }
  fit.theta_hat = best.x;
  fit.objective = best.value;
  fit.converged = best.converged;
  return fit;
}

RateReport mswe_rate_experiment(const ParametricFamily& family, const MsweRateOptions& rate, const MsweOptions& options,
                                const Seed& seed) {
  family.validate();
  options.validate();
  if (!family.contains(rate.theta_star)) throw InputError("theta_star must lie inside the parameter box");
  if (rate.n_grid.size() < 3) throw InputError("n_grid needs ≥ 3 points");
  for (std::size_t i = 0; i < rate.n_grid.size(); ++i) {
    if (rate.n_grid[i] < 1) throw InputError("n_grid entries must be ≥ 1");
    if (i > 0 && rate.n_grid[i] <= rate.n_grid[i - 1]) throw InputError("n_grid must be strictly increasing");
  }
  if (rate.reps < 3) throw InputError("reps must be ≥ 3");

  const std::size_t G = rate.n_grid.size();
  const auto R = static_cast<std::size_t>(rate.reps);
  const DistributionSpec truth = family.model(rate.theta_star);
  RateReport report;
  report.experiment = "mde-rate";
  report.axis = "n";
  report.summary = "median";
  report.reps = rate.reps;
  for (auto n : rate.n_grid) report.grid.push_back(static_cast<double>(n));
  report.values.assign(G, std::vector<double>(R, 0.0));
  std::vector<int> converged(G * R, 0);

  parallel_for(G * R, rate.workers, [&](std::size_t job) {
    const std::size_t g = job / R, r = job % R;
    const Seed rs = seed.derive("n", rate.n_grid[g]).derive("rep", r);
    const PointCloud data = sample(truth, rate.n_grid[g], rs.derive("data"));
    MsweOptions opts = options;
    opts.seed = rs.derive("fit");
    opts.smoothing.noise_seed = rs.derive("noise");
    const FitResult fit = fit_mswe(data, family, opts);
    report.values[g][r] = euclidean_distance(fit.theta_hat, rate.theta_star);
    converged[job] = fit.converged;
  });
  summarize(report);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", options.smoothing.sigma);
  report.metadata = {{"family", to_string(family.kind)},
                     {"dim", std::to_string(family.dim)},
                     {"sigma", buf},
                     {"optimizer", to_string(options.optimizer)},
                     {"converged_fits", std::to_string(std::accumulate(converged.begin(), converged.end(), 0))},
                     {"seed", std::to_string(seed.master)}};
  return report;
}

}  // namespace swd
