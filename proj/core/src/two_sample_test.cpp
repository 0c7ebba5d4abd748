#include "swd/two_sample_test.hpp"

#include <algorithm>
#include <cmath>

#include "swd/errors.hpp"
#include "swd/parallel.hpp"

namespace swd {

TestResult swd_test(const PointCloud& x, const PointCloud& y, double sigma, double alpha, int B, const Seed& seed,
                    const SmoothingConfig& config, int workers) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  if (x.dim() != y.dim()) {
    throw InputError("dimension mismatch between samples: " + std::to_string(x.dim()) + " vs " +
                     std::to_string(y.dim()));
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InputError("sigma must be ≥ 0");
  if (B < 1) throw InputError("bootstrap B must be ≥ 1");

  SmoothingConfig cfg = config;
  cfg.sigma = sigma;
  std::vector<std::size_t> origin;
  const ResampleEstimator pooled(canonical_pool(x, y, &origin), cfg);
  const std::size_t m = x.size();
  const std::size_t n = y.size();
  std::vector<std::size_t> ix, iy;
  for (std::size_t p = 0; p < origin.size(); ++p) (origin[p] < m ? ix : iy).push_back(p);
  // Keep the original sample order so Monte-Carlo noise lines up with input rows.
  std::sort(ix.begin(), ix.end(), [&](auto l, auto r) { return origin[l] < origin[r]; });
  std::sort(iy.begin(), iy.end(), [&](auto l, auto r) { return origin[l] < origin[r]; });

  const double scale = std::sqrt(static_cast<double>(m) * static_cast<double>(n) / static_cast<double>(m + n));
  TestResult out;
  out.statistic = scale * pooled.estimate(ix, iy, seed.derive("statistic")).value;
  out.bootstrap = two_sample_pooled_bootstrap(pooled, m, n, B, seed.derive("bootstrap"), workers);
  out.critical_value = quantile(out.bootstrap, 1.0 - alpha).value;
  const auto at_least = out.bootstrap.values.end() -
                        std::lower_bound(out.bootstrap.values.begin(), out.bootstrap.values.end(), out.statistic);
  out.p_value = (1.0 + static_cast<double>(at_least)) / (static_cast<double>(B) + 1.0);
  out.reject = out.statistic > out.critical_value;
  out.alpha = alpha;
  out.B = B;
  out.sigma = sigma;
  out.n = n;
  out.m = m;
  out.seed = seed.master;
  out.method = pooled.method();
  return out;
}

LevelPowerResult level_power_experiment(const DistributionSpec& null_spec, const DistributionSpec& alt_spec,
                                        std::size_t n, std::size_t m, double sigma, double alpha, int B, int trials,
                                        const Seed& seed, const SmoothingConfig& config, int workers) {
  if (trials < 1) throw InputError("trials must be ≥ 1");
  if (n < 1 || m < 1) throw InputError("sample sizes must be ≥ 1");
  if (null_spec.dim() != alt_spec.dim()) throw InputError("null and alternative dimensions differ");

  auto run = [&](const std::string& scenario, const DistributionSpec& y_spec) {
    std::vector<char> rejected(static_cast<std::size_t>(trials), 0);
    parallel_for(rejected.size(), workers, [&](std::size_t t) {
      const Seed trial = seed.derive(scenario, t);
      const auto x = sample(null_spec, m, trial.derive("x"));
      const auto y = sample(y_spec, n, trial.derive("y"));
      rejected[t] = swd_test(x, y, sigma, alpha, B, trial.derive("test"), config, 1).reject;
    });
    PowerReport r;
    r.scenario = scenario;
    r.trials = trials;
    for (char c : rejected) r.rejections += c;
    r.rejection_rate = static_cast<double>(r.rejections) / trials;
    r.standard_error = std::sqrt(r.rejection_rate * (1.0 - r.rejection_rate) / trials);
    return r;
  };
  return {run("null", null_spec), run("alternative", alt_spec)};
}

}  // namespace swd
