#include "swd/report_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "swd/errors.hpp"

namespace swd {

using nlohmann::json;
using nlohmann::ordered_json;

std::string format_real(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string rate_csv(const RateReport& report) {
  std::string out = "axis_value,mean,sd,reps\n";
  for (std::size_t g = 0; g < report.grid.size(); ++g) {
    out += format_real(report.grid[g]) + "," + format_real(report.means[g]) + "," + format_real(report.sds[g]) + "," +
           std::to_string(report.reps) + "\n";
  }
  return out;
}

std::string bootstrap_csv(std::span<const double> sorted_values) {
  std::string out = "replicate,value\n";
  for (std::size_t b = 0; b < sorted_values.size(); ++b) {
    out += std::to_string(b) + "," + format_real(sorted_values[b]) + "\n";
  }
  return out;
}

std::string concentration_csv(const ConcentrationReport& report) {
  std::string out = "t,exceedance,reference\n";
  for (std::size_t i = 0; i < report.t_grid.size(); ++i) {
    out += format_real(report.t_grid[i]) + "," + format_real(report.exceedance[i]) + "," +
           format_real(report.reference_curve[i]) + "\n";
  }
  return out;
}

std::string power_csv(const LevelPowerResult& result) {
  std::string out = "scenario,trials,rejections,rejection_rate,standard_error\n";
  for (const auto* r : {&result.null_report, &result.alternative_report}) {
    out += r->scenario + "," + std::to_string(r->trials) + "," + std::to_string(r->rejections) + "," +
           format_real(r->rejection_rate) + "," + format_real(r->standard_error) + "\n";
  }
  return out;
}

std::string sandwich_csv(std::span<const SandwichRow> rows) {
  std::string out = "n,sigma,w1_mean,swd_mean,bound,standard_error,holds\n";
  for (const auto& r : rows) {
    out += std::to_string(r.n) + "," + format_real(r.sigma) + "," + format_real(r.w1_mean) + "," +
           format_real(r.swd_mean) + "," + format_real(r.bound) + "," + format_real(r.standard_error) + "," +
           (r.holds ? "true" : "false") + "\n";
  }
  return out;
}

std::string trace_csv(const FitResult& fit) {
  const std::size_t p = fit.theta_hat.size();
  std::string out = "evaluation";
  for (std::size_t k = 0; k < p; ++k) out += ",theta_" + std::to_string(k);
  out += ",objective\n";
  for (std::size_t i = 0; i < fit.trace.size(); ++i) {
    out += std::to_string(i);
    for (double v : fit.trace[i].first) out += "," + format_real(v);
    out += "," + format_real(fit.trace[i].second) + "\n";
  }
  return out;
}

namespace {

ordered_json spec_to_json(const DistributionSpec& spec) {
  ordered_json j;
  j["family"] = spec.family_name();
  j["dim"] = spec.dim();
  std::visit(
      [&](const auto& f) {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, GaussianFamily>) {
          j["mean"] = f.mean;
          j["variances"] = f.variances;
        } else if constexpr (std::is_same_v<F, UniformCubeFamily>) {
          j["side"] = f.side;
          j["center"] = f.center;
        } else if constexpr (std::is_same_v<F, PointMassFamily>) {
          j["location"] = f.location;
        } else if constexpr (std::is_same_v<F, MixtureFamily>) {
          j["components"] = ordered_json::array();
          for (const auto& c : f.components) {
            auto cj = spec_to_json(*c.spec);
            cj["weight"] = c.weight;
            j["components"].push_back(std::move(cj));
          }
        } else {
          j["intrinsic_dim"] = f.intrinsic_dim;
          j["ambient_dim"] = f.ambient_dim;
          j["offset"] = f.offset;
          j["frame_seed"] = f.frame_seed;
          j["base"] = spec_to_json(*f.base);
        }
      },
      spec.family());
  return j;
}

ordered_json estimator_json(const SmoothingConfig& c) {
  ordered_json j;
  j["method"] = to_string(c.method);
  j["replicas"] = c.replicas;
  j["min_smoothed_points"] = c.min_smoothed_points;
  j["repeats"] = c.repeats;
  j["sinkhorn_epsilon"] = c.sinkhorn_epsilon ? json(*c.sinkhorn_epsilon) : json(nullptr);
  j["sinkhorn_max_iters"] = c.sinkhorn_max_iters;
  j["sinkhorn_tol"] = c.sinkhorn_tol;
  j["quadrature_tol"] = c.quadrature_tol;
  j["grid"] = {{"spacing", c.grid.spacing},
               {"margin", c.grid.margin},
               {"stencil_radius", c.grid.stencil_radius},
               {"max_cells", c.grid.max_cells}};
  return j;
}

ordered_json sidecar_head(const std::string& kind, const Provenance& p, const RunConfig& config) {
  ordered_json j;
  j["kind"] = kind;
  j["command"] = to_string(p.command);
  j["name"] = p.name;
  j["seed"] = p.seed;
  j["spec"] = config.spec ? spec_to_json(*config.spec) : ordered_json(nullptr);
  j["estimator"] = estimator_json(config.estimator);
  return j;
}

std::string finish(ordered_json j, const Provenance& p) {
  j["config"] = {{"source", p.config_source}, {"dir", p.config_dir.generic_string()}};
  return j.dump(2) + "\n";
}

ordered_json quantiles_json(const BootstrapDistribution& dist, std::span<const double> levels) {
  auto q = ordered_json::array();
  for (double level : levels) q.push_back({{"level", level}, {"value", quantile(dist, level).value}});
  return q;
}

ordered_json rate_body(const RateReport& r) {
  ordered_json j;
  j["experiment"] = r.experiment;
  j["axis"] = r.axis;
  j["summary"] = r.summary;
  j["grid"] = r.grid;
  j["means"] = r.means;
  j["sds"] = r.sds;
  j["reps"] = r.reps;
  j["slope"] = r.slope ? json(r.slope->slope) : json(nullptr);
  j["slope_stderr"] = r.slope ? json(r.slope->standard_error) : json(nullptr);
  j["values"] = r.values;
  ordered_json meta = ordered_json::object();
  for (const auto& [k, v] : r.metadata) meta[k] = v;
  j["metadata"] = std::move(meta);
  return j;
}

}  // namespace

std::string spec_json(const DistributionSpec& spec) { return spec_to_json(spec).dump(); }

std::string dist_json(const SwdEstimate& e, std::size_t n, std::size_t m, std::size_t d, double sigma) {
  ordered_json j;
  j["value"] = e.value;
  j["stderr"] = e.standard_error;
  j["method"] = to_string(e.method);
  j["n"] = n;
  j["m"] = m;
  j["d"] = d;
  j["sigma"] = sigma;
  return j.dump();
}

std::string test_json(const TestResult& r) {
  ordered_json j;
  j["statistic"] = r.statistic;
  j["critical_value"] = r.critical_value;
  j["p_value"] = r.p_value;
  j["reject"] = r.reject;
  j["alpha"] = r.alpha;
  j["B"] = r.B;
  j["sigma"] = r.sigma;
  j["n"] = r.n;
  j["m"] = r.m;
  j["seed"] = r.seed;
  return j.dump();
}

std::string fit_json(const FitResult& fit, const ParametricFamily& family, double sigma, std::size_t n,
                     std::uint64_t seed) {
  ordered_json j;
  j["family"] = to_string(family.kind);
  j["theta_hat"] = fit.theta_hat;
  j["objective"] = fit.objective;
  j["evaluations"] = fit.evaluations;
  j["converged"] = fit.converged;
  j["seed"] = seed;
  j["sigma"] = sigma;
  j["m"] = fit.model_sample_size;
  j["n"] = n;
  return j.dump();
}

std::string rate_sidecar(const RateReport& report, const Provenance& p, const RunConfig& config,
                         const std::string& csv_name, std::span<const SandwichRow> sandwich) {
  auto j = sidecar_head("rate", p, config);
  j["csv"] = csv_name;
  j.update(rate_body(report));
  if (!sandwich.empty()) {
    auto rows = ordered_json::array();
    for (const auto& r : sandwich) {
      rows.push_back({{"n", r.n},
                      {"sigma", r.sigma},
                      {"w1_mean", r.w1_mean},
                      {"swd_mean", r.swd_mean},
                      {"bound", r.bound},
                      {"standard_error", r.standard_error},
                      {"holds", r.holds}});
    }
    j["sandwich"] = std::move(rows);
  }
  return finish(std::move(j), p);
}

std::string bootstrap_sidecar(const BootstrapDistribution& dist, std::span<const double> levels, const Provenance& p,
                              const RunConfig& config, const std::string& csv_name) {
  auto j = sidecar_head("bootstrap", p, config);
  j["csv"] = csv_name;
  j["bootstrap_kind"] = to_string(dist.kind);
  j["B"] = dist.B;
  j["n"] = dist.n;
  j["m"] = dist.m;
  j["sigma"] = dist.sigma;
  j["method"] = to_string(dist.method);
  j["quantiles"] = quantiles_json(dist, levels);
  return finish(std::move(j), p);
}

std::string bootstrap_law_sidecar(const BootstrapLawReport& report, std::span<const double> levels,
                                  const Provenance& p, const RunConfig& config, const std::string& bootstrap_csv_name,
                                  const std::string& sampling_csv_name) {
  auto j = sidecar_head("bootstrap", p, config);
  const auto& dist = report.bootstrap;
  j["csv"] = bootstrap_csv_name;
  j["bootstrap_kind"] = to_string(dist.kind);
  j["B"] = dist.B;
  j["n"] = dist.n;
  j["m"] = dist.m;
  j["sigma"] = dist.sigma;
  j["method"] = to_string(dist.method);
  j["quantiles"] = quantiles_json(dist, levels);
  j["sampling_csv"] = sampling_csv_name;
  j["replications"] = report.sampling.size();
  j["kolmogorov_distance"] = report.kolmogorov_distance;
  return finish(std::move(j), p);
}

std::string concentration_sidecar(const ConcentrationReport& r, const Provenance& p, const RunConfig& config,
                                  const std::string& csv_name) {
  auto j = sidecar_head("concentration", p, config);
  j["csv"] = csv_name;
  j["n"] = r.n;
  j["sigma"] = r.sigma;
  j["eta"] = r.eta;
  j["diameter"] = r.diameter;
  j["mean_estimate"] = r.mean_estimate;
  j["trials"] = r.trials;
  j["t_grid"] = r.t_grid;
  j["exceedance"] = r.exceedance;
  j["reference_curve"] = r.reference_curve;
  return finish(std::move(j), p);
}

std::string power_sidecar(const LevelPowerResult& result, const Provenance& p, const RunConfig& config,
                          const std::string& csv_name) {
  auto j = sidecar_head("power", p, config);
  const auto& s = *config.power;
  j["csv"] = csv_name;
  j["n"] = s.n;
  j["m"] = s.m;
  j["sigma"] = s.sigma;
  j["alpha"] = s.alpha;
  j["B"] = s.B;
  j["alternative"] = spec_to_json(s.alternative);
  auto scenario = [](const PowerReport& r) {
    return ordered_json{{"scenario", r.scenario},
                        {"trials", r.trials},
                        {"rejections", r.rejections},
                        {"rejection_rate", r.rejection_rate},
                        {"standard_error", r.standard_error}};
  };
  j["scenarios"] = {scenario(result.null_report), scenario(result.alternative_report)};
  return finish(std::move(j), p);
}

std::string fit_sidecar(const FitResult& fit, const Provenance& p, const RunConfig& config, std::size_t n,
                        const std::string& csv_name) {
  auto j = sidecar_head("fit", p, config);
  const auto& m = *config.mde;
  j["csv"] = csv_name;
  j.update(ordered_json::parse(fit_json(fit, m.family, m.options.smoothing.sigma, n, p.seed)));
  j["lower"] = m.family.lower;
  j["upper"] = m.family.upper;
  j["optimizer"] = to_string(m.options.optimizer);
  return finish(std::move(j), p);
}

Provenance read_provenance(const std::filesystem::path& sidecar) {
  std::ifstream in(sidecar, std::ios::binary);
  if (!in) throw InputError("cannot open sidecar " + sidecar.string());
  json j;
  try {
    j = json::parse(in);
    Provenance p;
    p.command = parse_command(j.at("command").get<std::string>());
    p.name = j.at("name").get<std::string>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.config_source = j.at("config").at("source").get<std::string>();
    p.config_dir = j.at("config").at("dir").get<std::string>();
    return p;
  } catch (const json::exception& e) {
    throw InputError("sidecar " + sidecar.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << content;
  if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace swd
