#include "swd/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "swd/errors.hpp"

namespace swd {

std::string to_string(Command command) {
  switch (command) {
    case Command::rates: return "rates";
    case Command::concentration: return "concentration";
    case Command::mde: return "mde";
    case Command::bootstrap: return "bootstrap";
    case Command::power: return "power";
  }
  return "?";
}

Command parse_command(std::string_view name) {
  for (auto c : {Command::rates, Command::concentration, Command::mde, Command::bootstrap, Command::power}) {
    if (to_string(c) == name) return c;
  }
  throw InputError("unknown command '" + std::string(name) + "'");
}

std::string to_string(RateExperiment experiment) {
  switch (experiment) {
    case RateExperiment::one_sample: return "one-sample";
    case RateExperiment::sigma_prefactor: return "sigma-prefactor";
    case RateExperiment::intrinsic_dim: return "intrinsic-dim";
    case RateExperiment::vanishing_sigma: return "vanishing-sigma";
  }
  return "?";
}

RateExperiment parse_rate_experiment(std::string_view name) {
  for (auto e : {RateExperiment::one_sample, RateExperiment::sigma_prefactor, RateExperiment::intrinsic_dim,
                 RateExperiment::vanishing_sigma}) {
    if (to_string(e) == name) return e;
  }
  throw InputError("unknown experiment '" + std::string(name) +
                   "' (expected one-sample, sigma-prefactor, intrinsic-dim or vanishing-sigma)");
}

std::filesystem::path RunConfig::resolve(const std::filesystem::path& p) const {
  if (p.empty() || p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

namespace {

// A TOML table that remembers which keys were read so leftovers can be
// reported by name.
class Section {
 public:
  Section(const toml::table& table, std::string path) : table_(&table), path_(std::move(path)) {}

  [[nodiscard]] std::string key(std::string_view k) const {
    return path_.empty() ? std::string(k) : path_ + "." + std::string(k);
  }

  [[noreturn]] void fail(std::string_view k, const std::string& why) const { throw InputError(key(k) + ": " + why); }

  [[nodiscard]] const std::string& path() const { return path_; }

  bool has(std::string_view k) const { return table_->contains(k); }

  const toml::node* find(std::string_view k) {
    seen_.insert(std::string(k));
    return table_->get(k);
  }

  std::optional<double> real(std::string_view k) {
    const auto* n = find(k);
    if (!n) return std::nullopt;
    auto v = n->value<double>();
    if (!v || !(n->is_floating_point() || n->is_integer())) fail(k, "expected a number");
    if (!std::isfinite(*v)) fail(k, "must be finite");
    return v;
  }
  double real(std::string_view k, double fallback) { return real(k).value_or(fallback); }
  double required_real(std::string_view k) {
    if (auto v = real(k)) return *v;
    fail(k, "missing required key");
  }

  std::optional<std::int64_t> integer(std::string_view k) {
    const auto* n = find(k);
    if (!n) return std::nullopt;
    if (!n->is_integer()) fail(k, "expected an integer");
    return n->value<std::int64_t>();
  }
  std::size_t count(std::string_view k, std::size_t fallback) {
    auto v = integer(k);
    if (!v) return fallback;
    if (*v < 0) fail(k, "must be ≥ 0");
    return static_cast<std::size_t>(*v);
  }
  std::size_t required_count(std::string_view k) {
    if (!has(k)) {
      find(k);
      fail(k, "missing required key");
    }
    return count(k, 0);
  }
  int small_int(std::string_view k, int fallback) {
    auto v = integer(k);
    if (!v) return fallback;
    if (*v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max()) fail(k, "out of range");
    return static_cast<int>(*v);
  }

  std::optional<std::string> text(std::string_view k) {
    const auto* n = find(k);
    if (!n) return std::nullopt;
    if (!n->is_string()) fail(k, "expected a string");
    return n->value<std::string>();
  }
  std::string required_text(std::string_view k) {
    if (auto v = text(k)) return *v;
    fail(k, "missing required key");
  }

  const toml::array* array(std::string_view k) {
    const auto* n = find(k);
    if (!n) return nullptr;
    if (!n->is_array()) fail(k, "expected an array");
    return n->as_array();
  }
  std::optional<std::vector<double>> reals(std::string_view k) {
    const auto* a = array(k);
    if (!a) return std::nullopt;
    std::vector<double> out;
    for (const auto& e : *a) {
      auto v = e.value<double>();
      if (!v || !(e.is_floating_point() || e.is_integer()) || !std::isfinite(*v)) fail(k, "expected finite numbers");
      out.push_back(*v);
    }
    return out;
  }
  std::vector<double> required_reals(std::string_view k) {
    if (auto v = reals(k)) return *v;
    fail(k, "missing required key");
  }
  std::optional<std::vector<std::size_t>> counts(std::string_view k) {
    const auto* a = array(k);
    if (!a) return std::nullopt;
    std::vector<std::size_t> out;
    for (const auto& e : *a) {
      if (!e.is_integer() || *e.value<std::int64_t>() < 0) fail(k, "expected nonnegative integers");
      out.push_back(static_cast<std::size_t>(*e.value<std::int64_t>()));
    }
    return out;
  }

  std::optional<Section> table(std::string_view k) {
    const auto* n = find(k);
    if (!n) return std::nullopt;
    if (!n->is_table()) fail(k, "expected a table");
    return Section(*n->as_table(), key(k));
  }
  std::vector<Section> tables(std::string_view k) {
    const auto* a = array(k);
    if (!a) return {};
    std::vector<Section> out;
    for (std::size_t i = 0; i < a->size(); ++i) {
      const auto* t = a->get(i)->as_table();
      if (!t) fail(k, "expected an array of tables");
      out.emplace_back(*t, key(k) + "[" + std::to_string(i) + "]");
    }
    return out;
  }

  // Rejects keys that were never read: typos and options that do not apply.
  void finish() const {
    for (auto&& [k, v] : *table_) {
      if (!seen_.count(std::string(k.str()))) fail(k.str(), "unexpected key");
    }
  }

 private:
  const toml::table* table_;
  std::string path_;
  std::set<std::string> seen_;
};

// Runs `body`, prefixing any InputError with the key it concerns.
template <class F>
auto keyed(const std::string& key, F&& body) {
  try {
    return body();
  } catch (const InputError& e) {
    throw InputError(key + ": " + e.what());
  }
}

DistributionSpec read_spec(Section& s) {
  const std::string family = s.required_text("family");
  DistributionSpec spec = DistributionSpec::standard_gaussian(1);
  if (family == "gaussian") {
    auto mean = s.reals("mean");
    auto variances = s.reals("variances");
    auto dim = s.integer("dim");
    if (dim && *dim < 1) s.fail("dim", "must be ≥ 1");
    const std::size_t d = mean ? mean->size() : variances ? variances->size() : dim ? static_cast<std::size_t>(*dim) : 0;
    if (d == 0) s.fail("dim", "gaussian needs dim, mean or variances");
    if (dim && static_cast<std::size_t>(*dim) != d) s.fail("dim", "disagrees with the length of mean/variances");
    spec = keyed(s.key("family"), [&] {
      return DistributionSpec::gaussian(mean.value_or(std::vector<double>(d, 0.0)),
                                        variances.value_or(std::vector<double>(d, 1.0)));
    });
  } else if (family == "uniform-cube") {
    const double side = s.real("side", 1.0);
    auto center = s.reals("center");
    auto dim = s.integer("dim");
    if (!center) {
      if (!dim || *dim < 1) s.fail("dim", "uniform-cube needs center or dim ≥ 1");
      center = std::vector<double>(static_cast<std::size_t>(*dim), side / 2);
    } else if (dim && static_cast<std::size_t>(*dim) != center->size()) {
      s.fail("dim", "disagrees with the length of center");
    }
    spec = keyed(s.key("family"), [&] { return DistributionSpec::uniform_cube(side, *center); });
  } else if (family == "point-mass") {
    auto location = s.required_reals("location");
    spec = keyed(s.key("location"), [&] { return DistributionSpec::point_mass(location); });
  } else if (family == "mixture") {
    std::vector<std::pair<double, DistributionSpec>> parts;
    for (auto& c : s.tables("components")) {
      const double w = c.required_real("weight");
      parts.emplace_back(w, read_spec(c));
    }
    if (parts.empty()) s.fail("components", "mixture needs at least one component");
    spec = keyed(s.key("components"), [&] { return DistributionSpec::mixture(parts); });
  } else if (family == "affine-embedded") {
    const std::size_t k = s.required_count("intrinsic_dim");
    const std::size_t d = s.required_count("ambient_dim");
    auto offset = s.reals("offset").value_or(std::vector<double>(d, 0.0));
    const auto frame_seed = static_cast<std::uint64_t>(s.count("frame_seed", 0));
    DistributionSpec base = DistributionSpec::standard_gaussian(std::max<std::size_t>(k, 1));
    if (auto b = s.table("base")) {
      base = read_spec(*b);
      b->finish();
    }
    spec = keyed(s.key("family"),
                 [&] { return DistributionSpec::affine_embedded(k, d, base, offset, frame_seed); });
  } else {
    s.fail("family", "unknown family '" + family +
                         "' (expected gaussian, uniform-cube, point-mass, mixture or affine-embedded)");
  }
  s.finish();
  return spec;
}

SmoothingConfig read_estimator(Section& s) {
  SmoothingConfig c;
  if (auto m = s.text("method")) c.method = keyed(s.key("method"), [&] { return parse_smoothing_method(*m); });
  c.replicas = s.small_int("replicas", c.replicas);
  c.min_smoothed_points = s.count("min_smoothed_points", c.min_smoothed_points);
  c.repeats = s.small_int("repeats", c.repeats);
  if (auto e = s.real("sinkhorn_epsilon")) c.sinkhorn_epsilon = *e;
  c.sinkhorn_max_iters = s.small_int("sinkhorn_max_iters", c.sinkhorn_max_iters);
  c.sinkhorn_tol = s.real("sinkhorn_tol", c.sinkhorn_tol);
  c.quadrature_tol = s.real("quadrature_tol", c.quadrature_tol);
  if (auto g = s.table("grid")) {
    c.grid.spacing = g->real("spacing", c.grid.spacing);
    c.grid.margin = g->real("margin", c.grid.margin);
    c.grid.stencil_radius = g->small_int("stencil_radius", c.grid.stencil_radius);
    c.grid.max_cells = g->count("max_cells", c.grid.max_cells);
    g->finish();
  }
  s.finish();
  keyed(s.path(), [&] {
    c.validate();
    return 0;
  });
  return c;
}

void check_sigma(Section& s, std::string_view key, double sigma) {
  if (!(sigma >= 0.0)) s.fail(key, "sigma must be ≥ 0");
}

void check_n_grid(Section& s, std::string_view key, const std::vector<std::size_t>& grid) {
  if (grid.size() < 3) s.fail(key, "n_grid needs ≥ 3 points");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 1) s.fail(key, "n_grid entries must be ≥ 1");
    if (i > 0 && grid[i] <= grid[i - 1]) s.fail(key, "n_grid must be strictly increasing");
  }
}

void check_reps(Section& s, int reps, int minimum) {
  if (reps < minimum) s.fail("reps", "reps must be ≥ " + std::to_string(minimum));
}

void check_reference(Section& s, std::size_t reference_size, std::size_t max_n) {
  if (reference_size != 0 && reference_size < 4 * max_n) {
    s.fail("reference_size", "reference_size must be ≥ 4·max(n_grid) = " + std::to_string(4 * max_n));
  }
}

const DistributionSpec& need_spec(const RunConfig& cfg, const std::string& who) {
  if (!cfg.spec) throw InputError("spec: missing [spec] table required by " + who);
  return *cfg.spec;
}

RatesSettings read_rates(Section& s, RunConfig& cfg) {
  RatesSettings r;
  r.experiment = keyed(s.key("experiment"),
                       [&] { return parse_rate_experiment(s.text("experiment").value_or("one-sample")); });
  r.reps = s.small_int("reps", r.reps);
  check_reps(s, r.reps, 2);
  const std::string who = "rates experiment '" + to_string(r.experiment) + "'";
  switch (r.experiment) {
    case RateExperiment::one_sample:
    case RateExperiment::intrinsic_dim:
    case RateExperiment::vanishing_sigma: {
      if (!s.has("n_grid")) s.fail("n_grid", "missing required key");
      r.n_grid = *s.counts("n_grid");
      check_n_grid(s, "n_grid", r.n_grid);
      r.reference_size = s.count("reference_size", 0);
      check_reference(s, r.reference_size, r.n_grid.back());
      if (r.experiment == RateExperiment::vanishing_sigma) {
        auto sched = s.table("schedule");
        if (!sched) s.fail("schedule", "missing required table");
        r.schedule.kind = keyed(sched->key("kind"), [&] { return parse_schedule_kind(sched->required_text("kind")); });
        r.schedule.c = sched->real("c", 1.0);
        r.schedule.p = sched->real("p", 0.0);
        sched->finish();
        if (!(r.schedule.c > 0.0)) sched->fail("c", "must be > 0");
        r.guard_alpha = s.required_real("guard_alpha");
        const auto& spec = need_spec(cfg, who);
        keyed(sched->key("p"), [&] {
          check_schedule_guard(r.schedule, spec.dim(), r.guard_alpha);
          return 0;
        });
        for (auto n : r.n_grid) {
          const double sn = r.schedule.at(n);
          if (!(sn > 0.0 && sn <= 1.0)) {
            sched->fail("c", "schedule gives sigma_n = " + std::to_string(sn) + " at n = " + std::to_string(n) +
                                 ", outside (0, 1]");
          }
        }
      } else {
        r.sigma = s.real("sigma", r.sigma);
        check_sigma(s, "sigma", r.sigma);
      }
      if (r.experiment == RateExperiment::intrinsic_dim) {
        r.intrinsic_dim = s.required_count("intrinsic_dim");
        r.ambient_dim = s.required_count("ambient_dim");
        if (r.intrinsic_dim <= 2) s.fail("intrinsic_dim", "intrinsic dimension must be > 2");
        if (r.intrinsic_dim > r.ambient_dim) s.fail("intrinsic_dim", "must not exceed ambient_dim");
        if (cfg.spec) throw InputError("spec: intrinsic-dim generates its own data; remove [spec]");
      } else {
        need_spec(cfg, who);
      }
      break;
    }
    case RateExperiment::sigma_prefactor: {
      r.n = s.required_count("n");
      if (r.n < 1) s.fail("n", "must be ≥ 1");
      r.sigma_grid = s.required_reals("sigma_grid");
      if (r.sigma_grid.size() < 3) s.fail("sigma_grid", "sigma_grid needs ≥ 3 points");
      for (double v : r.sigma_grid) {
        if (!(v > 0.0 && v <= 1.0)) s.fail("sigma_grid", "every sigma must lie in (0, 1]");
      }
      r.reference_size = s.count("reference_size", 0);
      check_reference(s, r.reference_size, r.n);
      if (r.reference_size == 0) r.reference_size = default_reference_size(std::vector<std::size_t>{r.n});
      need_spec(cfg, who);
      break;
    }
  }
  s.finish();
  return r;
}

ConcentrationSettings read_concentration(Section& s, RunConfig& cfg) {
  ConcentrationSettings c;
  c.n = s.required_count("n");
  if (c.n < 1) s.fail("n", "must be ≥ 1");
  c.sigma = s.real("sigma", c.sigma);
  check_sigma(s, "sigma", c.sigma);
  c.eta = s.real("eta", c.eta);
  if (!(c.eta >= 0.0)) s.fail("eta", "must be ≥ 0");
  c.t_grid = s.required_reals("t_grid");
  if (c.t_grid.empty()) s.fail("t_grid", "needs at least one value");
  for (std::size_t i = 0; i < c.t_grid.size(); ++i) {
    if (!(c.t_grid[i] >= 0.0)) s.fail("t_grid", "values must be ≥ 0");
    if (i > 0 && c.t_grid[i] <= c.t_grid[i - 1]) s.fail("t_grid", "must be strictly increasing");
  }
  c.trials = s.small_int("trials", c.trials);
  if (c.trials < 100) s.fail("trials", "trials must be ≥ 100");
  c.reference_size = s.count("reference_size", c.reference_size);
  if (c.reference_size < 1) s.fail("reference_size", "must be ≥ 1");
  const auto& spec = need_spec(cfg, "concentration");
  if (!spec.support_diameter()) throw InputError("spec.family: concentration needs a bounded law with known diameter");
  s.finish();
  return c;
}

MdeSettings read_mde(Section& s, RunConfig& cfg) {
  MdeSettings m;
  m.family.kind = keyed(s.key("family"), [&] { return parse_family_kind(s.required_text("family")); });
  const std::size_t d = s.required_count("dim");
  if (d < 1) s.fail("dim", "must be ≥ 1");
  m.family.dim = d;
  m.family.lower = s.required_reals("lower");
  m.family.upper = s.required_reals("upper");
  keyed(s.key("lower"), [&] {
    m.family.validate();
    return 0;
  });
  m.options.smoothing = cfg.estimator;
  m.options.smoothing.sigma = s.real("sigma", 1.0);
  check_sigma(s, "sigma", m.options.smoothing.sigma);
  if (auto o = s.text("optimizer")) m.options.optimizer = keyed(s.key("optimizer"), [&] { return parse_optimizer(*o); });
  m.options.starts = s.small_int("starts", m.options.starts);
  m.options.tolerance = s.real("tolerance", m.options.tolerance);
  m.options.max_evaluations = s.small_int("max_evaluations", m.options.max_evaluations);
  m.options.model_sample_size = s.count("model_sample_size", 0);
  keyed(s.path(), [&] {
    m.options.validate();
    return 0;
  });
  if (auto data = s.text("data")) m.data = *data;
  if (auto r = s.table("rate")) {
    MsweRateOptions ro;
    ro.theta_star = r->required_reals("theta_star");
    if (!m.family.contains(ro.theta_star)) r->fail("theta_star", "theta_star must lie inside the parameter box");
    if (!r->has("n_grid")) r->fail("n_grid", "missing required key");
    ro.n_grid = *r->counts("n_grid");
    check_n_grid(*r, "n_grid", ro.n_grid);
    ro.reps = r->small_int("reps", ro.reps);
    check_reps(*r, ro.reps, 3);
    r->finish();
    m.rate = std::move(ro);
  }
  if (m.data.empty() == !m.rate.has_value()) s.fail("data", "set exactly one of data (single fit) or [mde.rate]");
  if (cfg.spec) throw InputError("spec: mde takes its model from the family keys; remove [spec]");
  s.finish();
  return m;
}

BootstrapSettings read_bootstrap(Section& s, RunConfig& cfg) {
  BootstrapSettings b;
  const std::string mode = s.text("mode").value_or("one-sample");
  if (mode == "one-sample") {
    b.mode = BootstrapMode::one_sample;
  } else if (mode == "two-sample") {
    b.mode = BootstrapMode::two_sample;
  } else if (mode == "law") {
    b.mode = BootstrapMode::law;
  } else {
    s.fail("mode", "unknown mode '" + mode + "' (expected one-sample, two-sample or law)");
  }
  b.sigma = s.real("sigma", b.sigma);
  check_sigma(s, "sigma", b.sigma);
  b.B = s.small_int("B", b.B);
  if (b.B < 1) s.fail("B", "B must be ≥ 1");
  if (auto levels = s.reals("levels")) b.levels = *levels;
  for (double l : b.levels) {
    if (!(l > 0.0 && l < 1.0)) s.fail("levels", "quantile levels must lie in (0, 1)");
  }
  switch (b.mode) {
    case BootstrapMode::one_sample:
      b.data = s.required_text("data");
      break;
    case BootstrapMode::two_sample:
      b.x = s.required_text("x");
      b.y = s.required_text("y");
      break;
    case BootstrapMode::law:
      b.n = s.required_count("n");
      if (b.n < 1) s.fail("n", "must be ≥ 1");
      b.replications = s.small_int("replications", b.replications);
      if (b.replications < 2) s.fail("replications", "must be ≥ 2");
      b.reference_size = s.count("reference_size", b.reference_size);
      if (b.reference_size < 1) s.fail("reference_size", "must be ≥ 1");
      need_spec(cfg, "bootstrap mode 'law'");
      break;
  }
  if (b.mode != BootstrapMode::law && cfg.spec) throw InputError("spec: only bootstrap mode 'law' samples from a spec");
  s.finish();
  return b;
}

PowerSettings read_power(Section& s, RunConfig& cfg) {
  PowerSettings p;
  p.n = s.required_count("n");
  p.m = s.required_count("m");
  if (p.n < 1) s.fail("n", "must be ≥ 1");
  if (p.m < 1) s.fail("m", "must be ≥ 1");
  p.sigma = s.real("sigma", p.sigma);
  check_sigma(s, "sigma", p.sigma);
  p.alpha = s.real("alpha", p.alpha);
  if (!(p.alpha > 0.0 && p.alpha < 1.0)) s.fail("alpha", "alpha must lie in (0, 1)");
  p.B = s.small_int("B", p.B);
  if (p.B < 1) s.fail("B", "B must be ≥ 1");
  p.trials = s.small_int("trials", p.trials);
  if (p.trials < 1) s.fail("trials", "must be ≥ 1");
  auto alt = s.table("alternative");
  if (!alt) s.fail("alternative", "missing required table");
  p.alternative = read_spec(*alt);
  const auto& null_spec = need_spec(cfg, "power");
  if (null_spec.dim() != p.alternative.dim()) s.fail("alternative", "dimension differs from [spec]");
  s.finish();
  return p;
}

}  // namespace

RunConfig parse_run_config(std::string_view text, Command command, const std::filesystem::path& base_dir) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config: line " << e.source().begin.line << ": " << e.description();
    throw InputError(msg.str());
  }
  RunConfig cfg;
  cfg.command = command;
  cfg.source = std::string(text);
  cfg.base_dir = base_dir;
  Section top(root, "");
  cfg.name = top.text("name").value_or(to_string(command));
  if (cfg.name.empty() || cfg.name.find_first_of("/\\") != std::string::npos) {
    top.fail("name", "must be a nonempty file stem without path separators");
  }
  cfg.output_dir = top.text("output_dir").value_or(".");
  if (auto seed = top.integer("seed")) {
    if (*seed < 0) top.fail("seed", "must be ≥ 0");
    cfg.seed = static_cast<std::uint64_t>(*seed);
  }
  cfg.workers = top.small_int("workers", 1);
  if (cfg.workers < 1) top.fail("workers", "must be ≥ 1");
  if (auto e = top.table("estimator")) cfg.estimator = read_estimator(*e);
  if (auto s = top.table("spec")) cfg.spec = read_spec(*s);

  auto section = top.table(to_string(command));
  if (!section) throw InputError(to_string(command) + ": missing [" + to_string(command) + "] table");
  switch (command) {
    case Command::rates: cfg.rates = read_rates(*section, cfg); break;
    case Command::concentration: cfg.concentration = read_concentration(*section, cfg); break;
    case Command::mde: cfg.mde = read_mde(*section, cfg); break;
    case Command::bootstrap: cfg.bootstrap = read_bootstrap(*section, cfg); break;
    case Command::power: cfg.power = read_power(*section, cfg); break;
  }
  top.finish();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, Command command) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), command, std::filesystem::absolute(path).parent_path());
}

DistributionSpec parse_spec(std::string_view text) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw InputError(std::string("spec: ") + std::string(e.description()));
  }
  Section s(root, "spec");
  return read_spec(s);
}

}  // namespace swd
