#include "swd/lattice.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "swd/errors.hpp"
#include "swd/exact_ot.hpp"
#include "swd/network_simplex.hpp"

namespace swd {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_interval(double l, double u) {
  if (!(u > l)) return 0.0;
  if (l >= 0.0) return normal_cdf(-l) - normal_cdf(-u);
  if (u <= 0.0) return normal_cdf(u) - normal_cdf(l);
  return 1.0 - normal_cdf(l) - normal_cdf(-u);
}

std::size_t GridBox::cell_count() const {
  std::size_t total = 1;
  for (std::size_t c : cells) total *= c;
  return total;
}

double grid_spacing(const GridOptions& options, std::size_t dim) {
  if (options.spacing > 0.0) return options.spacing;
  return dim <= 2 ? 0.5 : 0.75;
}

GridBox make_grid_box(std::span<const double> lo, std::span<const double> hi, double sigma,
                      const GridOptions& options) {
  if (lo.size() != hi.size() || lo.empty()) throw InputError("grid box: bad bounds");
  if (!(sigma > 0.0)) throw InputError("grid estimator needs sigma > 0");
  if (!(options.spacing >= 0.0) || !(options.margin >= 0.0)) throw InputError("grid spacing and margin must be >= 0");
  if (options.stencil_radius < 1) throw InputError("stencil radius must be >= 1");
  const std::size_t d = lo.size();

  std::vector<double> extent(d);
  for (std::size_t k = 0; k < d; ++k) extent[k] = (hi[k] - lo[k]) + 2.0 * options.margin * sigma;

  double width = grid_spacing(options, d) * sigma;
  auto count_cells = [&](double w) {
    std::vector<std::size_t> cells(d);
    for (std::size_t k = 0; k < d; ++k) {
      cells[k] = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(extent[k] / w - 1e-9)));
    }
    return cells;
  };
  std::vector<std::size_t> cells = count_cells(width);
  for (int guard = 0; guard < 200; ++guard) {
    double total = 1.0;
    for (std::size_t c : cells) total *= static_cast<double>(c);
    if (total <= static_cast<double>(options.max_cells)) break;
    width *= std::max(1.01, std::pow(total / static_cast<double>(options.max_cells), 1.0 / static_cast<double>(d)));
    cells = count_cells(width);
  }

  GridBox box;
  box.width = width;
  box.cells = cells;
  box.lower.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double centre = 0.5 * (lo[k] + hi[k]);
    box.lower[k] = centre - 0.5 * width * static_cast<double>(cells[k]);
  }
  return box;
}

GridBox make_grid_box(const PointCloud& a, const PointCloud& b, double sigma, const GridOptions& options) {
  if (a.dim() != b.dim()) throw InputError("grid box: dimension mismatch");
  const std::size_t d = a.dim();
  std::vector<double> lo(d, std::numeric_limits<double>::infinity());
  std::vector<double> hi(d, -std::numeric_limits<double>::infinity());
  for (const PointCloud* cloud : {&a, &b}) {
    for (std::size_t i = 0; i < cloud->size(); ++i) {
      for (std::size_t k = 0; k < d; ++k) {
        lo[k] = std::min(lo[k], (*cloud)(i, k));
        hi[k] = std::max(hi[k], (*cloud)(i, k));
      }
    }
  }
  return make_grid_box(lo, hi, sigma, options);
}

namespace {

// Probabilities below this are dropped from the tensor product; the masses
// are renormalised when quantised, so the effect is far below 1e-12.
constexpr double kNegligible = 1e-17;

using AxisWeights = PooledGrid::AxisWeights;

AxisWeights axis_weights(double x, double sigma, double lower, double width, std::size_t cells) {
  // Cell c spans [lower + c·w, lower + (c+1)·w); the outer cells extend to ±∞.
  // Cells beyond 9σ from x are folded into the nearest cell of the window.
  auto edge = [&](std::size_t j) { return (lower + static_cast<double>(j) * width - x) / sigma; };
  const double reach = 9.0 * sigma;
  const double lo_pos = (x - reach - lower) / width;
  const double hi_pos = (x + reach - lower) / width;
  const std::size_t c_lo = lo_pos <= 0.0 ? 0 : std::min(cells - 1, static_cast<std::size_t>(lo_pos));
  const std::size_t c_hi = hi_pos <= 0.0 ? 0 : std::min(cells - 1, static_cast<std::size_t>(hi_pos));
  AxisWeights out;
  out.first = c_lo;
  out.p.resize(c_hi - c_lo + 1);
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (std::size_t c = c_lo; c <= c_hi; ++c) {
    const double l = c == c_lo ? -inf : edge(c);
    const double u = c == c_hi ? inf : edge(c + 1);
    out.p[c - c_lo] = normal_interval(l, u);
  }
  return out;
}

void accumulate(const std::vector<AxisWeights>& w, double scale, const GridBox& box, std::vector<double>& mass) {
  const std::size_t d = w.size();
  if (d == 1) {
    for (std::size_t a = 0; a < w[0].p.size(); ++a) mass[w[0].first + a] += w[0].p[a] * scale;
  } else if (d == 2) {
    const std::size_t n1 = box.cells[1];
    for (std::size_t a = 0; a < w[0].p.size(); ++a) {
      const double pa = w[0].p[a] * scale;
      if (pa < kNegligible) continue;
      double* row = mass.data() + (w[0].first + a) * n1 + w[1].first;
      for (std::size_t b = 0; b < w[1].p.size(); ++b) row[b] += pa * w[1].p[b];
    }
  } else {
    const std::size_t n1 = box.cells[1];
    const std::size_t n2 = box.cells[2];
    for (std::size_t a = 0; a < w[0].p.size(); ++a) {
      const double pa = w[0].p[a] * scale;
      if (pa < kNegligible) continue;
      for (std::size_t b = 0; b < w[1].p.size(); ++b) {
        const double pab = pa * w[1].p[b];
        if (pab < kNegligible) continue;
        double* row = mass.data() + ((w[0].first + a) * n1 + (w[1].first + b)) * n2 + w[2].first;
        for (std::size_t c = 0; c < w[2].p.size(); ++c) row[c] += pab * w[2].p[c];
      }
    }
  }
}

void check_grid_input(std::size_t cloud_dim, double sigma, const GridBox& box) {
  if (cloud_dim != box.dim()) throw InputError("cell masses: dimension mismatch");
  if (box.dim() > 3) throw InputError("grid estimator supports at most 3 dimensions");
  if (!(sigma > 0.0)) throw InputError("grid estimator needs sigma > 0");
}

}  // namespace

std::vector<double> smoothed_cell_masses(const PointCloud& cloud, double sigma, const GridBox& box) {
  check_grid_input(cloud.dim(), sigma, box);
  const std::size_t d = box.dim();
  std::vector<double> mass(box.cell_count(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(cloud.size());
  std::vector<AxisWeights> w(d);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t k = 0; k < d; ++k) w[k] = axis_weights(cloud(i, k), sigma, box.lower[k], box.width, box.cells[k]);
    accumulate(w, inv_n, box, mass);
  }
  return mass;
}

PooledGrid::PooledGrid(const PointCloud& pool, double sigma, const GridOptions& options)
    : box_(make_grid_box(pool, pool, sigma, options)) {
  check_grid_input(pool.dim(), sigma, box_);
  weights_.resize(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    weights_[i].resize(pool.dim());
    for (std::size_t k = 0; k < pool.dim(); ++k) {
      weights_[i][k] = axis_weights(pool(i, k), sigma, box_.lower[k], box_.width, box_.cells[k]);
    }
  }
}

std::vector<double> PooledGrid::masses(std::span<const std::size_t> indices) const {
  if (indices.empty()) throw InputError("pooled grid: empty index set");
  std::vector<double> mass(box_.cell_count(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(indices.size());
  for (std::size_t i : indices) {
    if (i >= weights_.size()) throw InputError("pooled grid: index out of range");
    accumulate(weights_[i], inv_n, box_, mass);
  }
  return mass;
}

std::vector<std::vector<int>> lattice_stencil(std::size_t dim, int radius) {
  if (dim < 1 || dim > 3) throw InputError("lattice stencil: dimension must be 1, 2 or 3");
  if (radius < 1) throw InputError("stencil radius must be >= 1");
  std::vector<std::vector<int>> out;
  std::vector<int> v(dim, -radius);
  for (;;) {
    int g = 0;
    for (int c : v) g = std::gcd(g, std::abs(c));
    if (g == 1) out.push_back(v);
    std::size_t k = 0;
    while (k < dim && v[k] == radius) v[k++] = -radius;
    if (k == dim) break;
    ++v[k];
  }
  return out;
}

double stencil_distortion(std::size_t dim, int radius) {
  if (dim == 1) return 1.0;
  if (dim != 2) return std::numeric_limits<double>::quiet_NaN();
  // The lattice metric's unit ball is the hull of the normalised stencil
  // directions; its worst ratio is 1/cos(half the largest angular gap).
  std::vector<double> angles;
  for (const auto& v : lattice_stencil(2, radius)) angles.push_back(std::atan2(v[1], v[0]));
  std::sort(angles.begin(), angles.end());
  double gap = angles.front() + 2.0 * std::numbers::pi - angles.back();
  for (std::size_t i = 1; i < angles.size(); ++i) gap = std::max(gap, angles[i] - angles[i - 1]);
  return 1.0 / std::cos(0.5 * gap);
}

LatticeTransport::LatticeTransport(GridBox box, int stencil_radius) : box_(std::move(box)) {
  const std::size_t d = box_.dim();
  const auto stencil = lattice_stencil(d, stencil_radius);
  const std::size_t cells = box_.cell_count();
  solver_ = std::make_unique<NetworkSimplex>(cells);
  solver_->reserve_arcs(cells * stencil.size());

  std::vector<double> lengths;
  for (const auto& v : stencil) {
    double s = 0.0;
    for (int c : v) s += static_cast<double>(c) * c;
    lengths.push_back(box_.width * std::sqrt(s));
  }
  std::vector<std::size_t> stride(d, 1);
  for (std::size_t k = d - 1; k-- > 0;) stride[k] = stride[k + 1] * box_.cells[k + 1];

  std::vector<std::size_t> idx(d, 0);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    for (std::size_t s = 0; s < stencil.size(); ++s) {
      std::size_t target = 0;
      bool inside = true;
      for (std::size_t k = 0; k < d && inside; ++k) {
        const auto t = static_cast<std::ptrdiff_t>(idx[k]) + stencil[s][k];
        inside = t >= 0 && t < static_cast<std::ptrdiff_t>(box_.cells[k]);
        target += static_cast<std::size_t>(t) * stride[k];
      }
      if (inside) solver_->add_arc(cell, target, lengths[s]);
    }
    for (std::size_t k = d; k-- > 0;) {
      if (++idx[k] < box_.cells[k]) break;
      idx[k] = 0;
    }
  }
}

LatticeTransport::~LatticeTransport() = default;
LatticeTransport::LatticeTransport(LatticeTransport&&) noexcept = default;
LatticeTransport& LatticeTransport::operator=(LatticeTransport&&) noexcept = default;

std::size_t LatticeTransport::arc_count() const { return solver_->arc_count(); }

LatticeTransport::Result LatticeTransport::w1(std::span<const double> masses_a, std::span<const double> masses_b) {
  const std::size_t cells = box_.cell_count();
  if (masses_a.size() != cells || masses_b.size() != cells) throw InputError("lattice transport: mass vector size mismatch");
  constexpr std::int64_t total = std::int64_t{1} << 50;
  const auto qa = quantize_weights(masses_a, total);
  const auto qb = quantize_weights(masses_b, total);
  std::vector<std::int64_t> supply(cells);
  bool any = false;
  for (std::size_t c = 0; c < cells; ++c) {
    supply[c] = qa[c] - qb[c];
    any = any || supply[c] != 0;
  }
  Result out;
  if (!any) return out;
  solver_->set_supplies(supply);
  if (solver_->run() != NetworkSimplex::Status::optimal) {
    throw std::runtime_error("lattice transport: network simplex did not reach an optimal basis");
  }
  out.value = solver_->total_cost() / static_cast<double>(total);
  out.pivots = solver_->pivots();
  return out;
}

GridEstimate grid_smooth_w1(const PointCloud& a, const PointCloud& b, double sigma, const GridOptions& options) {
  if (a.dim() != b.dim()) throw InputError("dimension mismatch between point clouds");
  if (a.dim() > 3) throw InputError("grid estimator supports at most 3 dimensions");
  GridBox box = make_grid_box(a, b, sigma, options);
  const auto ma = smoothed_cell_masses(a, sigma, box);
  const auto mb = smoothed_cell_masses(b, sigma, box);
  LatticeTransport transport(box, options.stencil_radius);
  const auto result = transport.w1(ma, mb);
  GridEstimate out;
  out.value = result.value;
  out.diagnostics.shape = box.cells;
  out.diagnostics.cell_width = box.width;
  out.diagnostics.arcs = transport.arc_count();
  out.diagnostics.pivots = result.pivots;
  out.diagnostics.stencil_radius = options.stencil_radius;
  return out;
}

AffineReduction reduce_to_common_subspace(const PointCloud& a, const PointCloud& b, double rel_tol) {
  if (a.dim() != b.dim()) throw InputError("dimension mismatch between point clouds");
  const std::size_t d = a.dim();
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  Eigen::VectorXd centre = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) centre[static_cast<Eigen::Index>(k)] += a(i, k);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t k = 0; k < d; ++k) centre[static_cast<Eigen::Index>(k)] += b(j, k);
  centre /= static_cast<double>(n + m);

  Eigen::MatrixXd x(static_cast<Eigen::Index>(n + m), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = a(i, k) - centre[static_cast<Eigen::Index>(k)];
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t k = 0; k < d; ++k) x(static_cast<Eigen::Index>(n + j), static_cast<Eigen::Index>(k)) = b(j, k) - centre[static_cast<Eigen::Index>(k)];

  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  std::size_t rank = 0;
  const double top = s.size() > 0 ? s[0] : 0.0;
  double scale = 0.0;
  for (std::size_t k = 0; k < d; ++k) scale = std::max(scale, std::abs(centre[static_cast<Eigen::Index>(k)]));
  const double floor = rel_tol * std::max(top, 1e-300);
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (s[k] > floor && s[k] > 1e-14 * std::max(1.0, scale)) ++rank;
  }
  const std::size_t r = std::max<std::size_t>(rank, 1);
  Eigen::MatrixXd proj = x * svd.matrixV().leftCols(static_cast<Eigen::Index>(r));

  auto rows_to_cloud = [&](std::size_t start, std::size_t count) {
    std::vector<double> coords(count * r);
    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t k = 0; k < r; ++k)
        coords[i * r + k] = proj(static_cast<Eigen::Index>(start + i), static_cast<Eigen::Index>(k));
    return PointCloud(r, std::move(coords));
  };
  return AffineReduction{rank, rows_to_cloud(0, n), rows_to_cloud(n, m)};
}

}  // namespace swd
