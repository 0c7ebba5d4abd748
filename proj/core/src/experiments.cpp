#include "swd/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "swd/errors.hpp"
#include "swd/parallel.hpp"

namespace swd {

SlopeFit fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("slope fit: x and y differ in length");
  if (x.size() < 3) throw InputError("slope fit needs ≥ 3 points");
  const std::size_t k = x.size();
  std::vector<double> lx(k), ly(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw InputError("slope fit needs positive finite values");
    }
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(k);
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(k);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw InputError("slope fit needs at least two distinct x values");
  const double slope = sxy / sxx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = ly[i] - my - slope * (lx[i] - mx);
    ssr += r * r;
  }
  return {slope, std::sqrt(ssr / static_cast<double>(k - 2) / sxx)};
}

void summarize(RateReport& report) {
  report.means.assign(report.grid.size(), 0.0);
  report.sds.assign(report.grid.size(), 0.0);
  bool positive = true;
  for (std::size_t g = 0; g < report.grid.size(); ++g) {
    const auto& v = report.values[g];
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    report.means[g] = mean;
    report.sds[g] = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    positive = positive && mean > 0.0;
  }
  if (report.summary == "median") {
    for (std::size_t g = 0; g < report.grid.size(); ++g) {
      auto v = report.values[g];
      std::sort(v.begin(), v.end());
      const std::size_t h = v.size() / 2;
      report.means[g] = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
      positive = positive && report.means[g] > 0.0;
    }
  }
  report.slope.reset();
  if (positive && report.grid.size() >= 3) report.slope = fit_loglog_slope(report.grid, report.means);
}

std::size_t default_reference_size(std::span<const std::size_t> n_grid) {
  const std::size_t largest = n_grid.empty() ? 0 : *std::max_element(n_grid.begin(), n_grid.end());
  return std::max<std::size_t>(8192, 4 * largest);
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_rate_options(const OneSampleRateOptions& o) {
  if (o.n_grid.size() < 3) throw InputError("n_grid needs ≥ 3 points");
  for (std::size_t i = 0; i < o.n_grid.size(); ++i) {
    if (o.n_grid[i] < 1) throw InputError("n_grid entries must be ≥ 1");
    if (i > 0 && o.n_grid[i] <= o.n_grid[i - 1]) throw InputError("n_grid must be strictly increasing");
  }
  if (o.reps < 2) throw InputError("reps must be ≥ 2");
  const std::size_t largest = o.n_grid.back();
  if (o.reference_size != 0 && o.reference_size < 4 * largest) {
    throw InputError("reference_size must be ≥ 4·max(n_grid) = " + std::to_string(4 * largest));
  }
}

std::size_t reference_size_for(const OneSampleRateOptions& o) {
  return o.reference_size != 0 ? o.reference_size : default_reference_size(o.n_grid);
}

void record_methods(RateReport& report, const std::vector<SmoothingMethod>& used) {
  std::set<std::string> names;
  for (auto m : used) names.insert(to_string(m));
  std::string joined;
  for (const auto& n : names) joined += (joined.empty() ? "" : ",") + n;
  report.metadata.emplace_back("method_used", joined);
}

// Data and reference for repetition r at sample size n; a pure function of
// (seed, n, r), so reports for overlapping grids agree on shared points.
struct Draw {
  PointCloud data;
  PointCloud reference;
  Seed noise;
};

Draw draw(const DistributionSpec& spec, std::size_t n, std::size_t reference_size, const Seed& seed, std::size_t r) {
  const Seed rs = seed.derive("n", n).derive("rep", r);
  return {sample(spec, n, rs.derive("data")), sample(spec, reference_size, rs.derive("reference")), rs.derive("noise")};
}

}  // namespace

RateReport one_sample_rate_experiment(const DistributionSpec& spec, double sigma, const OneSampleRateOptions& options,
                                      const Seed& seed, const SmoothingConfig& config) {
  check_rate_options(options);
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InputError("sigma must be ≥ 0");
  config.validate();
  const std::size_t ref_size = reference_size_for(options);
  const std::size_t G = options.n_grid.size();
  const auto reps = static_cast<std::size_t>(options.reps);

  RateReport report;
  report.experiment = "one-sample-rate";
  report.axis = "n";
  report.reps = options.reps;
  for (auto n : options.n_grid) report.grid.push_back(static_cast<double>(n));
  report.values.assign(G, std::vector<double>(reps, 0.0));
  std::vector<SmoothingMethod> used(G * reps);

  parallel_for(G * reps, options.workers, [&](std::size_t job) {
    const std::size_t g = job / reps, r = job % reps;
    const Draw d = draw(spec, options.n_grid[g], ref_size, seed, r);
    SmoothingConfig cfg = config;
    cfg.sigma = sigma;
    cfg.noise_seed = d.noise;
    const auto est = swd_estimate(d.data, d.reference, cfg);
    report.values[g][r] = est.value;
    used[job] = est.method;
  });
  summarize(report);
  report.metadata = {{"family", spec.family_name()},
                     {"dim", std::to_string(spec.dim())},
                     {"sigma", format_double(sigma)},
                     {"reference_size", std::to_string(ref_size)},
                     {"seed", std::to_string(seed.master)}};
  record_methods(report, used);
  return report;
}

RateReport sigma_prefactor_experiment(const DistributionSpec& spec, std::size_t n, std::vector<double> sigma_grid,
                                      int reps, std::size_t reference_size, const Seed& seed,
                                      const SmoothingConfig& config, int workers) {
  if (sigma_grid.size() < 3) throw InputError("sigma_grid needs ≥ 3 points");
  std::sort(sigma_grid.begin(), sigma_grid.end());
  for (std::size_t i = 0; i < sigma_grid.size(); ++i) {
    if (!(sigma_grid[i] > 0.0 && sigma_grid[i] <= 1.0)) throw InputError("sigma_grid values must lie in (0, 1]");
    if (i > 0 && sigma_grid[i] == sigma_grid[i - 1]) throw InputError("sigma_grid values must be distinct");
  }
  if (n < 1) throw InputError("n must be ≥ 1");
  if (reps < 2) throw InputError("reps must be ≥ 2");
  const std::size_t ref_size = reference_size != 0 ? reference_size : std::max<std::size_t>(8192, 4 * n);
  if (ref_size < 4 * n) throw InputError("reference_size must be ≥ 4·n = " + std::to_string(4 * n));
  config.validate();

  const std::size_t G = sigma_grid.size();
  const auto R = static_cast<std::size_t>(reps);
  RateReport report;
  report.experiment = "sigma-prefactor";
  report.axis = "sigma";
  report.reps = reps;
  report.grid = sigma_grid;
  report.values.assign(G, std::vector<double>(R, 0.0));
  std::vector<SmoothingMethod> used(G * R);

  parallel_for(G * R, workers, [&](std::size_t job) {
    const std::size_t g = job / R, r = job % R;
    const Draw d = draw(spec, n, ref_size, seed, r);
    SmoothingConfig cfg = config;
    cfg.sigma = sigma_grid[g];
    cfg.noise_seed = d.noise;
    const auto est = swd_estimate(d.data, d.reference, cfg);
    report.values[g][r] = est.value;
    used[job] = est.method;
  });
  summarize(report);
  report.metadata = {{"family", spec.family_name()},
                     {"dim", std::to_string(spec.dim())},
                     {"n", std::to_string(n)},
                     {"reference_size", std::to_string(ref_size)},
                     {"seed", std::to_string(seed.master)}};
  record_methods(report, used);
  return report;
}

IntrinsicDimReport intrinsic_dim_experiment(std::size_t s, std::size_t d, double sigma,
                                            const OneSampleRateOptions& options, const Seed& seed,
                                            const SmoothingConfig& config) {
  if (s <= 2) throw InputError("intrinsic dimension s must be > 2");
  if (s > d) throw InputError("intrinsic dimension s must not exceed the ambient dimension d");
  RandomStream frame_rng(seed.derive("frame"));
  const auto spec = DistributionSpec::affine_embedded(s, d, DistributionSpec::standard_gaussian(s),
                                                      std::vector<double>(d, 0.0), frame_rng.next_u64());
  IntrinsicDimReport out;
  out.classic = one_sample_rate_experiment(spec, 0.0, options, seed, config);
  out.smoothed = one_sample_rate_experiment(spec, sigma, options, seed, config);
  for (auto* r : {&out.classic, &out.smoothed}) {
    r->experiment = "intrinsic-dim";
    r->metadata.emplace_back("intrinsic_dim", std::to_string(s));
  }
  return out;
}

std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::constant: return "const";
    case ScheduleKind::inverse_log: return "inverse-log";
    case ScheduleKind::power: return "power";
  }
  return "unknown";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
  for (auto k : {ScheduleKind::constant, ScheduleKind::inverse_log, ScheduleKind::power}) {
    if (to_string(k) == name) return k;
  }
  throw InputError("unknown schedule '" + std::string(name) + "' (expected const, inverse-log or power)");
}

double SigmaSchedule::at(std::size_t n) const {
  const auto x = static_cast<double>(n);
  switch (kind) {
    case ScheduleKind::constant: return c;
    case ScheduleKind::inverse_log: return c / std::log(x);
    case ScheduleKind::power: return c * std::pow(x, -p);
  }
  return c;
}

double schedule_guard_threshold(std::size_t d, double alpha) {
  const double half_d = 0.5 * static_cast<double>(d);
  if (!(alpha > 1.0) || !(alpha > half_d)) throw InputError("guard alpha must exceed max(1, d/2)");
  const double a = alpha - 1.0;
  const double b = static_cast<double>(d) / (2.0 * alpha);
  return (1.0 - b) / (8.0 * a * b);
}

void check_schedule_guard(const SigmaSchedule& schedule, std::size_t d, double alpha) {
  const double threshold = schedule_guard_threshold(d, alpha);
  if (schedule.kind == ScheduleKind::power && !(schedule.p < threshold)) {
    throw InputError("power schedule exponent p = " + format_double(schedule.p) + " violates the guard p < " +
                     format_double(threshold));
  }
}

VanishingSigmaReport vanishing_sigma_experiment(const DistributionSpec& spec, const SigmaSchedule& schedule,
                                                double guard_alpha, const OneSampleRateOptions& options,
                                                const Seed& seed, const SmoothingConfig& config) {
  check_rate_options(options);
  if (!(schedule.c > 0.0)) throw InputError("schedule constant c must be > 0");
  if (schedule.kind == ScheduleKind::power && !(schedule.p > 0.0)) throw InputError("power schedule needs p > 0");
  if (schedule.kind == ScheduleKind::inverse_log && options.n_grid.front() < 2) {
    throw InputError("inverse-log schedule needs n ≥ 2");
  }
  check_schedule_guard(schedule, spec.dim(), guard_alpha);
  for (auto n : options.n_grid) {
    const double s = schedule.at(n);
    if (!(s > 0.0 && s <= 1.0)) {
      throw InputError("schedule gives sigma_n = " + format_double(s) + " outside (0, 1] at n = " + std::to_string(n));
    }
  }
  config.validate();
  const std::size_t ref_size = reference_size_for(options);
  const std::size_t G = options.n_grid.size();
  const auto R = static_cast<std::size_t>(options.reps);

  VanishingSigmaReport out;
  RateReport& report = out.rate;
  report.experiment = "vanishing-sigma";
  report.axis = "n";
  report.reps = options.reps;
  for (auto n : options.n_grid) report.grid.push_back(static_cast<double>(n));
  report.values.assign(G, std::vector<double>(R, 0.0));
  std::vector<std::vector<double>> classic(G, std::vector<double>(R, 0.0));
  std::vector<SmoothingMethod> used(G * R);

  parallel_for(G * R, options.workers, [&](std::size_t job) {
    const std::size_t g = job / R, r = job % R;
    const Draw d = draw(spec, options.n_grid[g], ref_size, seed, r);
    SmoothingConfig cfg = config;
    cfg.noise_seed = d.noise;
    cfg.sigma = schedule.at(options.n_grid[g]);
    const auto est = swd_estimate(d.data, d.reference, cfg);
    report.values[g][r] = est.value;
    used[job] = est.method;
    cfg.sigma = 0.0;
    classic[g][r] = swd_estimate(d.data, d.reference, cfg).value;
  });
  summarize(report);

  const double root_d = std::sqrt(static_cast<double>(spec.dim()));
  for (std::size_t g = 0; g < G; ++g) {
    SandwichRow row;
    row.n = options.n_grid[g];
    row.sigma = schedule.at(row.n);
    row.swd_mean = report.means[g];
    row.w1_mean = std::accumulate(classic[g].begin(), classic[g].end(), 0.0) / static_cast<double>(R);
    row.bound = row.swd_mean + 2.0 * row.sigma * root_d;
    const double mean_diff = row.w1_mean - row.swd_mean;
    double ss = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      const double diff = classic[g][r] - report.values[g][r] - mean_diff;
      ss += diff * diff;
    }
    row.standard_error = std::sqrt(ss / static_cast<double>(R - 1) / static_cast<double>(R));
    row.holds = row.w1_mean <= row.bound + 3.0 * row.standard_error;
    out.sandwich.push_back(row);
  }
  report.metadata = {{"family", spec.family_name()},
                     {"dim", std::to_string(spec.dim())},
                     {"schedule", to_string(schedule.kind)},
                     {"schedule_c", format_double(schedule.c)},
                     {"schedule_p", format_double(schedule.p)},
                     {"guard_alpha", format_double(guard_alpha)},
                     {"guard_threshold", format_double(schedule_guard_threshold(spec.dim(), guard_alpha))},
                     {"reference_size", std::to_string(ref_size)},
                     {"seed", std::to_string(seed.master)}};
  record_methods(report, used);
  return out;
}

ConcentrationReport concentration_experiment(const DistributionSpec& spec, std::size_t n, double sigma, double eta,
                                             std::vector<double> t_grid, int trials, std::size_t reference_size,
                                             const Seed& seed, const SmoothingConfig& config, int workers) {
  const auto diameter = spec.support_diameter();
  if (!diameter) throw InputError("concentration experiment needs a bounded law (uniform-cube or point-mass)");
  if (trials < 100) throw InputError("trials must be ≥ 100");
  if (n < 1) throw InputError("n must be ≥ 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InputError("sigma must be ≥ 0");
  if (!(eta >= 0.0)) throw InputError("eta must be ≥ 0");
  if (t_grid.empty()) throw InputError("t_grid needs ≥ 1 point");
  for (double t : t_grid) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw InputError("t_grid values must be ≥ 0");
  }
  std::sort(t_grid.begin(), t_grid.end());
  config.validate();
  const std::size_t ref_size = reference_size != 0 ? reference_size : std::max<std::size_t>(8192, 4 * n);
  const PointCloud reference = sample(spec, ref_size, seed.derive("reference"));

  auto pass = [&](const std::string& name) {
    std::vector<double> values(static_cast<std::size_t>(trials));
    parallel_for(values.size(), workers, [&](std::size_t i) {
      const Seed ts = seed.derive(name, i);
      SmoothingConfig cfg = config;
      cfg.sigma = sigma;
      cfg.noise_seed = ts.derive("noise");
      values[i] = swd_estimate(sample(spec, n, ts.derive("data")), reference, cfg).value;
    });
    return values;
  };
  const auto first = pass("first");
  const auto second = pass("second");

  ConcentrationReport out;
  out.n = n;
  out.sigma = sigma;
  out.eta = eta;
  out.diameter = *diameter;
  out.trials = trials;
  out.mean_estimate = std::accumulate(first.begin(), first.end(), 0.0) / static_cast<double>(trials);
  out.t_grid = t_grid;
  for (double t : t_grid) {
    const double threshold = (1.0 + eta) * out.mean_estimate + t;
    const auto count = std::count_if(second.begin(), second.end(), [&](double v) { return v > threshold; });
    out.exceedance.push_back(static_cast<double>(count) / static_cast<double>(trials));
    const double curve = *diameter > 0.0
                             ? std::exp(-2.0 * static_cast<double>(n) * t * t / (*diameter * *diameter))
                             : (t > 0.0 ? 0.0 : 1.0);
    out.reference_curve.push_back(curve);
  }
  return out;
}

double kolmogorov_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InputError("kolmogorov distance needs non-empty samples");
  std::size_t i = 0, j = 0;
  double best = 0.0;
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  while (i < a.size() || j < b.size()) {
    double t;
    if (j == b.size() || (i < a.size() && a[i] <= b[j])) {
      t = a[i];
    } else {
      t = b[j];
    }
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

BootstrapLawReport bootstrap_law_experiment(const DistributionSpec& spec, std::size_t n, double sigma, int B,
                                            int replications, std::size_t reference_size, const Seed& seed,
                                            const SmoothingConfig& config, int workers) {
  if (n < 1) throw InputError("n must be ≥ 1");
  if (replications < 1) throw InputError("replications must be ≥ 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InputError("sigma must be ≥ 0");
  const std::size_t ref_size = reference_size != 0 ? reference_size : std::max<std::size_t>(30000, 4 * n);
  SmoothingConfig cfg = config;
  cfg.sigma = sigma;
  cfg.validate();

  BootstrapLawReport out;
  const PointCloud data = sample(spec, n, seed.derive("data"));
  out.bootstrap = one_sample_bootstrap(data, sigma, B, seed.derive("bootstrap"), cfg, workers);

  const PointCloud reference = sample(spec, ref_size, seed.derive("reference"));
  const double scale = std::sqrt(static_cast<double>(n));
  out.sampling.resize(static_cast<std::size_t>(replications));
  const bool quadrature = spec.dim() == 1 && sigma > 0.0 &&
                          (cfg.method == SmoothingMethod::automatic || cfg.method == SmoothingMethod::quadrature_1d);
  if (quadrature) {
    // A large reference is evaluated many times; tabulate its smoothed CDF.
    const auto coords = reference.coords();
    const auto [lo_it, hi_it] = std::minmax_element(coords.begin(), coords.end());
    const double lo = *lo_it - 10.0 * sigma, hi = *hi_it + 10.0 * sigma;
    const TabulatedCdf1d ref_cdf(reference, sigma, lo, hi, sigma / 32.0);
    parallel_for(out.sampling.size(), workers, [&](std::size_t r) {
      const PointCloud x = sample(spec, n, seed.derive("fresh", r));
      const SmoothedCdf1d x_cdf(x, sigma);
      const double a = std::min(lo, x_cdf.min_point() - 8.0 * sigma);
      const double b = std::max(hi, x_cdf.max_point() + 8.0 * sigma);
      out.sampling[r] = scale * l1_cdf_distance(std::cref(x_cdf), std::cref(ref_cdf), a, b, sigma, cfg.quadrature_tol).value;
    });
  } else {
    parallel_for(out.sampling.size(), workers, [&](std::size_t r) {
      SmoothingConfig c = cfg;
      c.noise_seed = seed.derive("fresh-noise", r);
      out.sampling[r] = scale * swd_estimate(sample(spec, n, seed.derive("fresh", r)), reference, c).value;
    });
  }
  std::sort(out.sampling.begin(), out.sampling.end());
  out.kolmogorov_distance = kolmogorov_distance(out.bootstrap.values, out.sampling);
  return out;
}

}  // namespace swd
