#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "criteria.hpp"
#include "swd/bootstrap.hpp"
#include "swd/errors.hpp"
#include "swd/exact_ot.hpp"
#include "swd/experiments.hpp"
#include "swd/mswe.hpp"
#include "swd/parallel.hpp"
#include "swd/smooth_w1.hpp"
#include "swd/two_sample_test.hpp"

using namespace swd;
namespace acc = swd::acceptance;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string id;
  std::string title;
  std::function<Outcome(int workers)> run;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Seed seed_for(const std::string& id) { return Seed{acc::kSeed, id}; }

std::vector<std::size_t> rate_grid() { return {acc::kRateGrid.begin(), acc::kRateGrid.end()}; }

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

std::string slope_text(const RateReport& r) {
  if (!r.slope) return "slope n/a";
  return fmt("slope %.4f ± %.4f", r.slope->slope, r.slope->standard_error);
}

bool slope_within(const RateReport& r, double lo, double hi) { return r.slope && within(r.slope->slope, lo, hi); }

DistributionSpec random_1d_law(RandomStream& rng) {
  if (rng.uniform() < 0.5) {
    const double var = 0.25 + 1.75 * rng.uniform();
    return DistributionSpec::gaussian({2.0 * rng.uniform() - 1.0}, {var});
  }
  return DistributionSpec::uniform_cube(0.5 + 2.5 * rng.uniform(), {2.0 * rng.uniform() - 1.0});
}

Outcome exact_ot_oracles(int) {
  using namespace acc::exact_ot;
  const auto t0 = std::chrono::steady_clock::now();
  RandomStream rng(seed_for("C1"));
  int ok_equal = 0, ok_weighted = 0;
  double worst = 0.0;
  for (int t = 0; t < kEqualInstances; ++t) {
    const std::size_t n = 1 + rng.below(kMaxPoints), d = 1 + rng.below(kMaxDim);
    const auto a = sample(DistributionSpec::standard_gaussian(d), n, seed_for("C1").derive("a", t));
    const auto b = sample(DistributionSpec::uniform_cube(2.0, std::vector<double>(d, 0.5)), n,
                          seed_for("C1").derive("b", t));
    const double truth = w1_bruteforce(a, b).distance;
    const double e1 = std::abs(w1_assignment(a, b).distance - truth);
    const double e2 = std::abs(w1_mincost_flow(empirical_measure(a), empirical_measure(b)).distance - truth);
    worst = std::max({worst, e1, e2});
    ok_equal += e1 <= kTolerance && e2 <= kTolerance;
  }
  for (int t = 0; t < kWeightedInstances; ++t) {
    auto weighted = [&](std::size_t n, const char* tag) {
      const auto pts = sample(DistributionSpec::gaussian({0.0}, {4.0}), n, seed_for("C1").derive(tag, t));
      std::vector<double> w(n);
      double total = 0.0;
      for (auto& v : w) total += (v = rng.uniform_open());
      for (auto& v : w) v /= total;
      return DiscreteMeasure(pts, w);
    };
    const auto a = weighted(1 + rng.below(12), "wa");
    const auto b = weighted(1 + rng.below(12), "wb");
    const double e = std::abs(w1_mincost_flow(a, b).distance - w1_sorted_1d(a, b).distance);
    worst = std::max(worst, e);
    ok_weighted += e <= kTolerance;
  }
  const double secs = seconds_since(t0);
  return {ok_equal == kEqualInstances && ok_weighted == kWeightedInstances && secs < kRuntimeLimit,
          fmt("equal-size %d/%d, weighted 1D %d/%d, max error %.2e (tol %.0e), %.2f s (limit %.0f s)", ok_equal,
              kEqualInstances, ok_weighted, kWeightedInstances, worst, kTolerance, secs, kRuntimeLimit)};
}

Outcome estimator_cross_validation(int workers) {
  using namespace acc::cross_validation;
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<int> agree(kScenarios, 0);
  parallel_for(kScenarios, workers, [&](std::size_t s) {
    const Seed seed = seed_for("C2").derive("scenario", s);
    RandomStream rng(seed.derive("setup"));
    const auto p = random_1d_law(rng), q = random_1d_law(rng);
    const std::size_t n = 20 + rng.below(kMaxPoints - 19), m = 20 + rng.below(kMaxPoints - 19);
    const double sigma = kSigmaLow + (kSigmaHigh - kSigmaLow) * rng.uniform();
    const auto a = sample(p, n, seed.derive("a"));
    const auto b = sample(q, m, seed.derive("b"));
    SmoothingConfig cfg;
    cfg.sigma = sigma;
    cfg.method = SmoothingMethod::mc_exact;
    cfg.repeats = kRepeats;
    cfg.noise_seed = seed.derive("noise");
    const auto mc = swd_estimate(a, b, cfg);
    const double oracle = swd_quadrature_1d(a, b, sigma).value;
    agree[s] = std::abs(mc.value - oracle) <= kStderrMultiple * mc.standard_error;
  });
  int count = 0;
  for (int v : agree) count += v;
  const double secs = seconds_since(t0);
  return {count >= kRequiredAgreements && secs < kRuntimeLimit,
          fmt("%d/%d scenarios within %.0f·stderr (need %d), %.1f s (limit %.0f s)", count, kScenarios,
              kStderrMultiple, kRequiredAgreements, secs, kRuntimeLimit)};
}

Outcome parametric_rate(int workers) {
  using namespace acc::parametric_rate;
  const auto t0 = std::chrono::steady_clock::now();
  OneSampleRateOptions o{rate_grid(), kReps, kReference, workers};
  const auto r = one_sample_rate_experiment(DistributionSpec::standard_gaussian(kDim), kSigma, o, seed_for("C3"),
                                            SmoothingConfig{});
  const double secs = seconds_since(t0);
  return {slope_within(r, kSlopeLow, kSlopeHigh) && secs < kRuntimeLimit,
          fmt("%s, required [%.2f, %.2f], %.1f s (limit %.0f s)", slope_text(r).c_str(), kSlopeLow, kSlopeHigh, secs,
              kRuntimeLimit)};
}

Outcome cod_baseline(int workers) {
  using namespace acc::cod_baseline;
  OneSampleRateOptions o{rate_grid(), kReps, kReference, workers};
  SmoothingConfig cfg;
  cfg.sigma = 0.0;
  const auto r = one_sample_rate_experiment(DistributionSpec::standard_gaussian(kDim), 0.0, o, seed_for("C4"), cfg);
  return {slope_within(r, kSlopeLow, kSlopeHigh),
          fmt("%s, required [%.2f, %.2f]", slope_text(r).c_str(), kSlopeLow, kSlopeHigh)};
}

Outcome intrinsic_dimension(int workers) {
  using namespace acc::intrinsic_dim;
  OneSampleRateOptions o{rate_grid(), kReps, kReference, workers};
  const auto r = intrinsic_dim_experiment(kIntrinsic, kAmbient, kSigma, o, seed_for("C5"), SmoothingConfig{});
  const bool ok = slope_within(r.classic, kClassicLow, kClassicHigh) && slope_within(r.smoothed, kSmoothLow, kSmoothHigh);
  return {ok, fmt("sigma=0 %s (required [%.2f, %.2f]); sigma=%.1f %s (required [%.2f, %.2f])",
                  slope_text(r.classic).c_str(), kClassicLow, kClassicHigh, kSigma, slope_text(r.smoothed).c_str(),
                  kSmoothLow, kSmoothHigh)};
}

Outcome sigma_prefactor(int workers) {
  using namespace acc::sigma_prefactor;
  SmoothingConfig cfg;
  cfg.method = SmoothingMethod::mc_exact;
  cfg.min_smoothed_points = kSmoothedPoints;
  cfg.repeats = 1;
  const auto r = sigma_prefactor_experiment(DistributionSpec::standard_gaussian(kDim), kN,
                                            {kSigmas.begin(), kSigmas.end()}, kReps, kReference, seed_for("C6"), cfg,
                                            workers);
  std::string means;
  for (double m : r.means) means += fmt("%s%.4f", means.empty() ? "" : " ", m);
  return {slope_within(r, kSlopeLow, kSlopeHigh),
          fmt("%s, required [%.1f, %.1f]; means by sigma: %s", slope_text(r).c_str(), kSlopeLow, kSlopeHigh,
              means.c_str())};
}

Outcome stability_bound(int workers) {
  using namespace acc::stability;
  std::vector<int> holds(kTrials, 0);
  std::vector<double> slack(kTrials, 0.0);
  parallel_for(kTrials, workers, [&](std::size_t t) {
    const Seed seed = seed_for("C7").derive("trial", t);
    RandomStream rng(seed.derive("setup"));
    const std::size_t d = 1 + rng.below(3);
    auto law = [&] {
      std::vector<double> mean(d), var(d);
      for (std::size_t k = 0; k < d; ++k) {
        mean[k] = 2.0 * rng.uniform() - 1.0;
        var[k] = 0.25 + rng.uniform();
      }
      return DistributionSpec::gaussian(mean, var);
    };
    const auto p = law(), q = law();
    const std::size_t n = kMinPoints + rng.below(kMaxPoints - kMinPoints + 1);
    const std::size_t m = kMinPoints + rng.below(kMaxPoints - kMinPoints + 1);
    const double s1 = kSigmaLow + (kSigmaHigh - kSigmaLow) * rng.uniform();
    const double s2 = kSigmaLow + (kSigmaHigh - kSigmaLow) * rng.uniform();
    SmoothingConfig cfg;
    cfg.noise_seed = seed.derive("noise");
    const auto g = stability_gap(sample(p, n, seed.derive("a")), sample(q, m, seed.derive("b")), s1, s2, cfg);
    slack[t] = g.bound + kStderrMultiple * g.standard_error - g.gap;
    holds[t] = slack[t] >= 0.0;
  });
  int count = 0;
  for (int v : holds) count += v;
  return {count >= kRequired, fmt("%d/%d trials with gap ≤ bound + %.0f·stderr (need %d), min slack %.4f", count,
                                  kTrials, kStderrMultiple, kRequired, *std::min_element(slack.begin(), slack.end()))};
}

Outcome two_sample_level_power(int workers) {
  using namespace acc::two_sample;
  const auto t0 = std::chrono::steady_clock::now();
  const auto null_spec = DistributionSpec::standard_gaussian(kDim);
  std::vector<double> shifted(kDim, 0.0);
  shifted[0] = kShift;
  const auto alt = DistributionSpec::gaussian(shifted, std::vector<double>(kDim, 1.0));
  const auto r = level_power_experiment(null_spec, alt, kN, kM, kSigma, kAlpha, kB, kTrials, seed_for("C8"),
                                        SmoothingConfig{}, workers);
  const double secs = seconds_since(t0);
  const double level = r.null_report.rejection_rate, power = r.alternative_report.rejection_rate;
  return {within(level, kLevelLow, kLevelHigh) && power >= kPowerMin && secs < kRuntimeLimit,
          fmt("level %.3f (required [%.2f, %.2f]), power %.3f (required ≥ %.2f), %.0f s (limit %.0f s)", level,
              kLevelLow, kLevelHigh, power, kPowerMin, secs, kRuntimeLimit)};
}

Outcome bootstrap_law_proximity(int workers) {
  using namespace acc::bootstrap_law;
  const auto r = bootstrap_law_experiment(DistributionSpec::standard_gaussian(1), kN, kSigma, kB, kReplications,
                                          kReference, seed_for("C9"), SmoothingConfig{}, workers);
  return {r.kolmogorov_distance <= kMaxKolmogorov,
          fmt("Kolmogorov distance %.4f (required ≤ %.2f)", r.kolmogorov_distance, kMaxKolmogorov)};
}

Outcome mde_rate(int workers) {
  using namespace acc::mde;
  ParametricFamily family{FamilyKind::gaussian_location, kDim, std::vector<double>(kDim, -kBox),
                          std::vector<double>(kDim, kBox)};
  const std::vector<double> star(kThetaStar.begin(), kThetaStar.end());
  MsweOptions opts;
  opts.smoothing.sigma = kSigma;

  // Identity: data are the frozen base itself moved to θ*, so θ* is an exact zero.
  MsweOptions id_opts = opts;
  id_opts.seed = seed_for("C10").derive("identity");
  id_opts.model_sample_size = kIdentityN;
  const auto probe = MsweObjective(PointCloud::from_rows({std::vector<double>(kDim, 0.0)}), family, id_opts);
  const auto data = family.transform(probe.base(), star);
  const auto fit = fit_mswe(data, family, id_opts);
  const double id_error = euclidean_distance(fit.theta_hat, star);

  MsweRateOptions rate{star, rate_grid(), kReps, workers};
  const auto r = mswe_rate_experiment(family, rate, opts, seed_for("C10"));
  return {slope_within(r, kSlopeLow, kSlopeHigh) && id_error <= kIdentityTolerance,
          fmt("median-error %s (required [%.2f, %.2f]); identity error %.2e (required ≤ %.0e)", slope_text(r).c_str(),
              kSlopeLow, kSlopeHigh, id_error, kIdentityTolerance)};
}

Outcome concentration_shape(int workers) {
  using namespace acc::concentration;
  const auto spec = DistributionSpec::uniform_cube(1.0, {0.5, 0.5});
  const double diam = *spec.support_diameter();
  const double t = diam * std::sqrt(std::log(1.0 / kCurveLevel) / (2.0 * static_cast<double>(kN)));
  const auto r = concentration_experiment(spec, kN, kSigma, 0.0, {t}, kTrials, kReference, seed_for("C11"),
                                          SmoothingConfig{}, workers);
  return {r.exceedance[0] <= kMaxExceedance,
          fmt("t = %.4f (curve %.3f): exceedance %.3f over %d trials (required ≤ %.2f), mean estimate %.4f", t,
              r.reference_curve[0], r.exceedance[0], r.trials, kMaxExceedance, r.mean_estimate)};
}

Outcome vanishing_sigma_guard(int workers) {
  using namespace acc::vanishing_sigma;
  const double threshold = schedule_guard_threshold(kGuardDim, kGuardAlpha);
  bool rejected = false, accepted = true;
  try {
    check_schedule_guard({ScheduleKind::power, 1.0, kRejectedP}, kGuardDim, kGuardAlpha);
  } catch (const InputError&) {
    rejected = true;
  }
  try {
    check_schedule_guard({ScheduleKind::power, 1.0, kAcceptedP}, kGuardDim, kGuardAlpha);
  } catch (const InputError&) {
    accepted = false;
  }
  const bool arithmetic = std::abs(threshold - kGuardThreshold) < 1e-15 && rejected && accepted;

  OneSampleRateOptions o{rate_grid(), kReps, kReference, workers};
  const auto v = vanishing_sigma_experiment(DistributionSpec::standard_gaussian(kDim),
                                            {ScheduleKind::inverse_log, 1.0, 0.0}, kGuardAlpha, o, seed_for("C12"),
                                            SmoothingConfig{});
  std::size_t holding = 0;
  double min_slack = INFINITY;
  for (const auto& row : v.sandwich) {
    holding += row.holds;
    min_slack = std::min(min_slack, row.bound + 3.0 * row.standard_error - row.w1_mean);
  }
  return {arithmetic && holding == v.sandwich.size(),
          fmt("threshold %.6g, p=%.1f %s, p=%.1f %s; sandwich holds at %zu/%zu grid points (min slack %.4f)",
              threshold, kRejectedP, rejected ? "rejected" : "ACCEPTED", kAcceptedP, accepted ? "accepted" : "REJECTED",
              holding, v.sandwich.size(), min_slack)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"C1", "exact-OT oracle suite", exact_ot_oracles},
      {"C2", "estimator cross-validation", estimator_cross_validation},
      {"C3", "parametric rate (d=3, sigma=1)", parametric_rate},
      {"C4", "classic W1 baseline (d=5, sigma=0)", cod_baseline},
      {"C5", "intrinsic dimension (s=3 in d=10)", intrinsic_dimension},
      {"C6", "sigma-prefactor envelope (d=6)", sigma_prefactor},
      {"C7", "stability bound", stability_bound},
      {"C8", "two-sample test level and power", two_sample_level_power},
      {"C9", "bootstrap law proximity", bootstrap_law_proximity},
      {"C10", "minimum-distance estimator rate", mde_rate},
      {"C11", "concentration tail", concentration_shape},
      {"C12", "vanishing-sigma guard and sandwich", vanishing_sigma_guard},
  };

  CLI::App app{"Acceptance suite: one line per criterion"};
  std::vector<std::string> only;
  int workers = static_cast<int>(hardware_workers());
  bool list = false;
  app.add_option("--only", only, "Criterion ids to run (default: all)")->delimiter(',');
  app.add_option("--workers", workers, "Worker threads")->capture_default_str();
  app.add_flag("--list", list, "List criteria and exit");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& c : criteria) std::printf("%s %s\n", c.id.c_str(), c.title.c_str());
    return 0;
  }
  const std::set<std::string> selected(only.begin(), only.end());
  int failures = 0, ran = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run(workers);
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    failures += !out.pass;
    std::printf("%s %s %s: %s [%.1f s]\n", out.pass ? "PASS" : "FAIL", c.id.c_str(), c.title.c_str(),
                out.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  if (ran == 0) {
    std::fprintf(stderr, "no criterion matched --only\n");
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
