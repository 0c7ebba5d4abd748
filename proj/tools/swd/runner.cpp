#include "runner.hpp"

#include "swd/bootstrap.hpp"
#include "swd/errors.hpp"
#include "swd/experiments.hpp"
#include "swd/mswe.hpp"
#include "swd/report_io.hpp"
#include "swd/two_sample_test.hpp"

namespace swd::cli {

namespace {

struct Writer {
  const RunConfig& config;
  const RunOptions& options;
  Provenance provenance;
  std::vector<std::filesystem::path> sidecars;

  std::string file(const std::string& suffix) const { return config.name + suffix; }

  void csv(const std::string& name, const std::string& body) const {
    write_text_file(options.output_dir / name, body);
  }
  void sidecar(const std::string& name, const std::string& body) {
    write_text_file(options.output_dir / name, body);
    sidecars.push_back(options.output_dir / name);
  }
};

void run_rates(Writer& w, SmoothingConfig estimator, const Seed& seed) {
  const auto& cfg = w.config;
  const auto& r = *cfg.rates;
  OneSampleRateOptions opts;
  opts.n_grid = r.n_grid;
  opts.reps = r.reps;
  opts.reference_size = r.reference_size;
  opts.workers = w.options.workers;
  auto emit = [&](const RateReport& report, const std::string& stem, std::span<const SandwichRow> sandwich = {}) {
    w.csv(stem + ".csv", rate_csv(report));
    w.sidecar(stem + ".json", rate_sidecar(report, w.provenance, cfg, stem + ".csv", sandwich));
  };
  switch (r.experiment) {
    case RateExperiment::one_sample:
      emit(one_sample_rate_experiment(*cfg.spec, r.sigma, opts, seed, estimator), cfg.name);
      break;
    case RateExperiment::sigma_prefactor:
      emit(sigma_prefactor_experiment(*cfg.spec, r.n, r.sigma_grid, r.reps, r.reference_size, seed, estimator,
                                      w.options.workers),
           cfg.name);
      break;
    case RateExperiment::intrinsic_dim: {
      const auto both = intrinsic_dim_experiment(r.intrinsic_dim, r.ambient_dim, r.sigma, opts, seed, estimator);
      emit(both.classic, cfg.name + ".classic");
      emit(both.smoothed, cfg.name + ".smoothed");
      break;
    }
    case RateExperiment::vanishing_sigma: {
      const auto v = vanishing_sigma_experiment(*cfg.spec, r.schedule, r.guard_alpha, opts, seed, estimator);
      w.csv(cfg.name + ".sandwich.csv", sandwich_csv(v.sandwich));
      emit(v.rate, cfg.name, v.sandwich);
      break;
    }
  }
}

void run_bootstrap(Writer& w, const SmoothingConfig& estimator, const Seed& seed) {
  const auto& cfg = w.config;
  const auto& b = *cfg.bootstrap;
  const int workers = w.options.workers;
  if (b.mode == BootstrapMode::law) {
    const auto law =
        bootstrap_law_experiment(*cfg.spec, b.n, b.sigma, b.B, b.replications, b.reference_size, seed, estimator, workers);
    const auto boot = w.file(".csv"), sampling = w.file(".sampling.csv");
    w.csv(boot, bootstrap_csv(law.bootstrap.values));
    w.csv(sampling, bootstrap_csv(law.sampling));
    w.sidecar(w.file(".json"), bootstrap_law_sidecar(law, b.levels, w.provenance, cfg, boot, sampling));
    return;
  }
  BootstrapDistribution dist;
  if (b.mode == BootstrapMode::one_sample) {
    const auto data = load_point_cloud(cfg.resolve(b.data));
    dist = one_sample_bootstrap(data, b.sigma, b.B, seed, estimator, workers);
  } else {
    const auto x = load_point_cloud(cfg.resolve(b.x));
    const auto y = load_point_cloud(cfg.resolve(b.y));
    dist = two_sample_pooled_bootstrap(x, y, b.sigma, b.B, seed, estimator, workers);
  }
  w.csv(w.file(".csv"), bootstrap_csv(dist.values));
  w.sidecar(w.file(".json"), bootstrap_sidecar(dist, b.levels, w.provenance, cfg, w.file(".csv")));
}

void run_mde(Writer& w, const SmoothingConfig& estimator, const Seed& seed) {
  const auto& cfg = w.config;
  const auto& m = *cfg.mde;
  MsweOptions opts = m.options;
  opts.smoothing.noise_seed = estimator.noise_seed;
  opts.seed = seed;
  if (m.rate) {
    MsweRateOptions rate = *m.rate;
    rate.workers = w.options.workers;
    const auto report = mswe_rate_experiment(m.family, rate, opts, seed);
    w.csv(w.file(".csv"), rate_csv(report));
    w.sidecar(w.file(".json"), rate_sidecar(report, w.provenance, cfg, w.file(".csv")));
    return;
  }
  const auto data = load_point_cloud(cfg.resolve(m.data), m.family.dim);
  const auto fit = fit_mswe(data, m.family, opts);
  w.csv(w.file(".trace.csv"), trace_csv(fit));
  w.sidecar(w.file(".json"), fit_sidecar(fit, w.provenance, cfg, data.size(), w.file(".trace.csv")));
}

}  // namespace

std::vector<std::filesystem::path> run(const RunConfig& config, const RunOptions& options) {
  if (options.workers < 1) throw InputError("workers must be ≥ 1");
  Writer w{config, options, {config.command, config.name, options.seed, config.source, config.base_dir}, {}};
  const Seed seed{options.seed, to_string(config.command)};
  SmoothingConfig estimator = config.estimator;
  estimator.noise_seed = seed.derive("noise");
  switch (config.command) {
    case Command::rates:
      run_rates(w, estimator, seed);
      break;
    case Command::concentration: {
      const auto& c = *config.concentration;
      const auto report = concentration_experiment(*config.spec, c.n, c.sigma, c.eta, c.t_grid, c.trials,
                                                   c.reference_size, seed, estimator, options.workers);
      w.csv(w.file(".csv"), concentration_csv(report));
      w.sidecar(w.file(".json"), concentration_sidecar(report, w.provenance, config, w.file(".csv")));
      break;
    }
    case Command::mde:
      run_mde(w, estimator, seed);
      break;
    case Command::bootstrap:
      run_bootstrap(w, estimator, seed);
      break;
    case Command::power: {
      const auto& p = *config.power;
      const auto result = level_power_experiment(*config.spec, p.alternative, p.n, p.m, p.sigma, p.alpha, p.B,
                                                 p.trials, seed, estimator, options.workers);
      w.csv(w.file(".csv"), power_csv(result));
      w.sidecar(w.file(".json"), power_sidecar(result, w.provenance, config, w.file(".csv")));
      break;
    }
  }
  return w.sidecars;
}

}  // namespace swd::cli
