#include "swd/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "swd/errors.hpp"
#include "swd/parallel.hpp"

namespace swd {

ResampleEstimator::ResampleEstimator(const PointCloud& pool, const SmoothingConfig& config)
    : pool_(pool), reduced_pool_(pool), config_(config), method_(config.method) {
  config_.validate();
  const double sigma = config_.sigma;
  auto reduce = [&] {
    auto red = reduce_to_common_subspace(pool_, pool_);
    if (red.rank < pool_.dim()) reduced_pool_ = std::move(red.a);
    return red.rank;
  };
  switch (config_.method) {
    case SmoothingMethod::mc_exact:
    case SmoothingMethod::mc_flow:
    case SmoothingMethod::mc_sinkhorn:
      break;
    case SmoothingMethod::quadrature_1d:
      if (pool_.dim() != 1) throw InputError("quadrature-1d requires one-dimensional data");
      if (sigma == 0.0) throw InputError("quadrature-1d requires sigma > 0");
      break;
    case SmoothingMethod::grid_flow:
      if (sigma == 0.0) throw InputError("grid-flow requires sigma > 0");
      if (pool_.dim() > 3 && reduce() > 3) throw InputError("grid-flow requires data spanning at most 3 dimensions");
      break;
    case SmoothingMethod::automatic:
      if (sigma == 0.0) {
        method_ = SmoothingMethod::mc_exact;
      } else if (pool_.dim() == 1) {
        method_ = SmoothingMethod::quadrature_1d;
      } else {
        const std::size_t rank = reduce();
        method_ = rank <= 1   ? SmoothingMethod::quadrature_1d
                  : rank <= 3 ? SmoothingMethod::grid_flow
                              : SmoothingMethod::mc_exact;
        if (rank > 3) reduced_pool_ = pool_;
      }
      break;
  }
  if (method_ == SmoothingMethod::grid_flow) {
    grid_ = std::make_shared<const PooledGrid>(reduced_pool_, sigma, config_.grid);
  }
  config_.method = method_;
}

ResampleEstimator::~ResampleEstimator() = default;
ResampleEstimator::ResampleEstimator(ResampleEstimator&&) noexcept = default;
ResampleEstimator& ResampleEstimator::operator=(ResampleEstimator&&) noexcept = default;

SwdEstimate ResampleEstimator::estimate(std::span<const std::size_t> a, std::span<const std::size_t> b,
                                        const Seed& noise) const {
  if (method_ == SmoothingMethod::grid_flow) {
    const auto ma = grid_->masses(a);
    const auto mb = grid_->masses(b);
    LatticeTransport transport(grid_->box(), config_.grid.stencil_radius);
    const auto r = transport.w1(ma, mb);
    SwdEstimate est;
    est.value = r.value;
    est.method = method_;
    est.per_repeat_values = {r.value};
    est.diagnostics.reduced_dim = reduced_pool_.dim();
    est.diagnostics.iterations = r.pivots;
    GridDiagnostics g;
    g.shape = grid_->box().cells;
    g.cell_width = grid_->box().width;
    g.arcs = transport.arc_count();
    g.pivots = r.pivots;
    g.stencil_radius = config_.grid.stencil_radius;
    est.diagnostics.grid = std::move(g);
    return est;
  }
  SmoothingConfig cfg = config_;
  cfg.noise_seed = noise;
  const PointCloud& source = method_ == SmoothingMethod::quadrature_1d ? reduced_pool_ : pool_;
  return swd_estimate(source.select(a), source.select(b), cfg);
}

std::string to_string(BootstrapKind kind) {
  return kind == BootstrapKind::one_sample ? "one-sample" : "two-sample-pooled";
}

PointCloud canonical_pool(const PointCloud& a, const PointCloud& b, std::vector<std::size_t>* origin) {
  if (a.dim() != b.dim()) throw InputError("dimension mismatch between point clouds");
  const PointCloud joined = PointCloud::concat(a, b);
  std::vector<std::size_t> order(joined.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    const auto pl = joined.point(l);
    const auto pr = joined.point(r);
    return std::lexicographical_compare(pl.begin(), pl.end(), pr.begin(), pr.end());
  });
  if (origin) *origin = order;
  return joined.select(order);
}

namespace {

void check_bootstrap_args(double sigma, int B) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InputError("sigma must be ≥ 0");
  if (B < 1) throw InputError("bootstrap B must be ≥ 1");
}

}  // namespace

BootstrapDistribution one_sample_bootstrap(const PointCloud& data, double sigma, int B, const Seed& seed,
                                           const SmoothingConfig& config, int workers) {
  check_bootstrap_args(sigma, B);
  SmoothingConfig cfg = config;
  cfg.sigma = sigma;
  const ResampleEstimator estimator(data, cfg);
  const std::size_t n = data.size();
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  const double scale = std::sqrt(static_cast<double>(n));

  BootstrapDistribution out;
  out.values.resize(static_cast<std::size_t>(B));
  parallel_for(out.values.size(), workers, [&](std::size_t b) {
    RandomStream rng(seed.derive("resample", b));
    std::vector<std::size_t> idx(n);
    for (auto& i : idx) i = static_cast<std::size_t>(rng.below(n));
    out.values[b] = scale * estimator.estimate(idx, all, seed.derive("noise", b)).value;
  });
  std::sort(out.values.begin(), out.values.end());
  out.B = B;
  out.kind = BootstrapKind::one_sample;
  out.n = n;
  out.m = n;
  out.sigma = sigma;
  out.seed = seed;
  out.method = estimator.method();
  return out;
}

BootstrapDistribution two_sample_pooled_bootstrap(const ResampleEstimator& pooled, std::size_t m, std::size_t n,
                                                  int B, const Seed& seed, int workers) {
  check_bootstrap_args(pooled.sigma(), B);
  const std::size_t total = m + n;
  if (m == 0 || n == 0 || total != pooled.pool().size()) throw InputError("pooled bootstrap: sizes do not match the pool");
  const double scale = std::sqrt(static_cast<double>(m) * static_cast<double>(n) / static_cast<double>(total));

  BootstrapDistribution out;
  out.values.resize(static_cast<std::size_t>(B));
  parallel_for(out.values.size(), workers, [&](std::size_t b) {
    RandomStream rng(seed.derive("resample", b));
    std::vector<std::size_t> z(total);
    for (auto& i : z) i = static_cast<std::size_t>(rng.below(total));
    const std::span<const std::size_t> all(z);
    out.values[b] = scale * pooled.estimate(all.first(m), all.subspan(m), seed.derive("noise", b)).value;
  });
  std::sort(out.values.begin(), out.values.end());
  out.B = B;
  out.kind = BootstrapKind::two_sample_pooled;
  out.n = n;
  out.m = m;
  out.sigma = pooled.sigma();
  out.seed = seed;
  out.method = pooled.method();
  return out;
}

BootstrapDistribution two_sample_pooled_bootstrap(const PointCloud& x, const PointCloud& y, double sigma, int B,
                                                  const Seed& seed, const SmoothingConfig& config, int workers) {
  check_bootstrap_args(sigma, B);
  SmoothingConfig cfg = config;
  cfg.sigma = sigma;
  const ResampleEstimator estimator(canonical_pool(x, y), cfg);
  return two_sample_pooled_bootstrap(estimator, x.size(), y.size(), B, seed, workers);
}

QuantileEstimate quantile(const BootstrapDistribution& dist, double level) {
  if (!(level > 0.0 && level < 1.0)) throw InputError("quantile level must lie in (0, 1)");
  if (dist.values.empty()) throw InputError("empty bootstrap distribution");
  const double count = static_cast<double>(dist.values.size());
  // Guard against level·B landing a rounding error above an integer.
  auto k = static_cast<std::size_t>(std::ceil(level * count - 1e-9));
  k = std::clamp<std::size_t>(k, 1, dist.values.size());
  return {level, dist.values[k - 1]};
}

}  // namespace swd
