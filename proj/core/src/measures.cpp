#include "swd/measures.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "swd/errors.hpp"

namespace swd {

namespace {

constexpr double kWeightTolerance = 1e-12;

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw InputError(std::string(what) + " must be finite");
  }
}

}  // namespace

PointCloud::PointCloud(std::size_t dim, std::vector<double> coords)
    : dim_(dim), coords_(std::move(coords)) {
  if (dim_ == 0) throw InputError("point cloud dimension must be >= 1");
  if (coords_.empty()) throw InputError("point cloud must contain at least one point");
  if (coords_.size() % dim_ != 0) {
    throw InputError("coordinate count is not a multiple of the dimension");
  }
  require_finite(coords_, "point coordinates");
}

PointCloud PointCloud::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw InputError("point cloud must contain at least one point");
  const std::size_t dim = rows.front().size();
  std::vector<double> coords;
  coords.reserve(rows.size() * dim);
  for (const auto& row : rows) {
    if (row.size() != dim) throw InputError("all points must have the same dimension");
    coords.insert(coords.end(), row.begin(), row.end());
  }
  return PointCloud(dim, std::move(coords));
}

PointCloud PointCloud::translated(std::span<const double> shift) const {
  if (shift.size() != dim_) throw InputError("shift dimension mismatch");
  std::vector<double> out = coords_;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += shift[i % dim_];
  return PointCloud(dim_, std::move(out));
}

PointCloud PointCloud::select(std::span<const std::size_t> indices) const {
  std::vector<double> out;
  out.reserve(indices.size() * dim_);
  for (std::size_t idx : indices) {
    const auto p = point(idx);
    out.insert(out.end(), p.begin(), p.end());
  }
  return PointCloud(dim_, std::move(out));
}

PointCloud PointCloud::concat(const PointCloud& first, const PointCloud& second) {
  if (first.dim() != second.dim()) throw InputError("cannot concatenate clouds of different dimension");
  std::vector<double> out;
  out.reserve(first.coords_.size() + second.coords_.size());
  out.insert(out.end(), first.coords_.begin(), first.coords_.end());
  out.insert(out.end(), second.coords_.begin(), second.coords_.end());
  return PointCloud(first.dim(), std::move(out));
}

double euclidean_distance(std::span<const double> x, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double diff = x[k] - y[k];
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

DiscreteMeasure::DiscreteMeasure(PointCloud support, std::vector<double> weights)
    : support_(std::move(support)), weights_(std::move(weights)) {
  if (weights_.size() != support_.size()) throw InputError("one weight per support point required");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("weights must be finite and non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightTolerance) throw InputError("weights must sum to 1");
  uniform_ = std::all_of(weights_.begin(), weights_.end(),
                         [&](double w) { return w == weights_.front(); });
}

DiscreteMeasure empirical_measure(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  return DiscreteMeasure(cloud, std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

// ---------------------------------------------------------------------------
// DistributionSpec

DistributionSpec DistributionSpec::gaussian(std::vector<double> mean, std::vector<double> variances) {
  if (mean.empty()) throw InputError("gaussian: dimension must be >= 1");
  if (variances.size() != mean.size()) throw InputError("gaussian: mean and variances differ in length");
  require_finite(mean, "gaussian mean");
  for (double v : variances) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("gaussian: variances must be finite and >= 0");
  }
  const std::size_t d = mean.size();
  return DistributionSpec(d, GaussianFamily{std::move(mean), std::move(variances)});
}

DistributionSpec DistributionSpec::standard_gaussian(std::size_t dim) {
  return gaussian(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0));
}

DistributionSpec DistributionSpec::uniform_cube(double side, std::vector<double> center) {
  if (center.empty()) throw InputError("uniform-cube: dimension must be >= 1");
  if (!(side > 0.0) || !std::isfinite(side)) throw InputError("uniform-cube: side must be > 0");
  require_finite(center, "uniform-cube center");
  const std::size_t d = center.size();
  return DistributionSpec(d, UniformCubeFamily{side, std::move(center)});
}

DistributionSpec DistributionSpec::point_mass(std::vector<double> location) {
  if (location.empty()) throw InputError("point-mass: dimension must be >= 1");
  require_finite(location, "point-mass location");
  const std::size_t d = location.size();
  return DistributionSpec(d, PointMassFamily{std::move(location)});
}

DistributionSpec DistributionSpec::mixture(std::vector<std::pair<double, DistributionSpec>> components) {
  if (components.empty()) throw InputError("mixture: at least one component required");
  const std::size_t d = components.front().second.dim();
  double total = 0.0;
  MixtureFamily fam;
  for (auto& [w, spec] : components) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("mixture: weights must be >= 0");
    if (spec.dim() != d) throw InputError("mixture: components must share a dimension");
    total += w;
    fam.components.push_back({w, std::make_shared<const DistributionSpec>(std::move(spec))});
  }
  if (std::abs(total - 1.0) > kWeightTolerance) throw InputError("mixture: weights must sum to 1");
  return DistributionSpec(d, std::move(fam));
}

DistributionSpec DistributionSpec::affine_embedded(std::size_t intrinsic_dim, std::size_t ambient_dim,
                                                   DistributionSpec base, std::vector<double> offset,
                                                   std::uint64_t frame_seed) {
  if (intrinsic_dim < 1 || intrinsic_dim > ambient_dim) {
    throw InputError("affine-embedded: need 1 <= intrinsic_dim <= ambient_dim");
  }
  if (base.dim() != intrinsic_dim) throw InputError("affine-embedded: base law must live on R^s");
  if (offset.empty()) offset.assign(ambient_dim, 0.0);
  if (offset.size() != ambient_dim) throw InputError("affine-embedded: offset must have ambient dimension");
  require_finite(offset, "affine-embedded offset");
  AffineEmbeddedFamily fam;
  fam.intrinsic_dim = intrinsic_dim;
  fam.ambient_dim = ambient_dim;
  fam.base = std::make_shared<const DistributionSpec>(std::move(base));
  fam.offset = std::move(offset);
  fam.frame_seed = frame_seed;
  fam.frame = orthonormal_frame(ambient_dim, intrinsic_dim, frame_seed);
  return DistributionSpec(ambient_dim, std::move(fam));
}

std::string DistributionSpec::family_name() const {
  struct Namer {
    std::string operator()(const GaussianFamily&) const { return "gaussian"; }
    std::string operator()(const UniformCubeFamily&) const { return "uniform-cube"; }
    std::string operator()(const PointMassFamily&) const { return "point-mass"; }
    std::string operator()(const MixtureFamily&) const { return "mixture"; }
    std::string operator()(const AffineEmbeddedFamily&) const { return "affine-embedded"; }
  };
  return std::visit(Namer{}, family_);
}

std::optional<double> DistributionSpec::support_diameter() const {
  if (const auto* cube = std::get_if<UniformCubeFamily>(&family_)) {
    return cube->side * std::sqrt(static_cast<double>(dim_));
  }
  if (std::holds_alternative<PointMassFamily>(family_)) return 0.0;
  if (const auto* mix = std::get_if<MixtureFamily>(&family_)) {
    // Bounding box of the component supports.
    std::vector<double> lo(dim_, INFINITY), hi(dim_, -INFINITY);
    for (const auto& comp : mix->components) {
      if (comp.weight == 0.0) continue;
      const auto& f = comp.spec->family();
      if (const auto* c = std::get_if<UniformCubeFamily>(&f)) {
        for (std::size_t k = 0; k < dim_; ++k) {
          lo[k] = std::min(lo[k], c->center[k] - c->side / 2);
          hi[k] = std::max(hi[k], c->center[k] + c->side / 2);
        }
      } else if (const auto* p = std::get_if<PointMassFamily>(&f)) {
        for (std::size_t k = 0; k < dim_; ++k) {
          lo[k] = std::min(lo[k], p->location[k]);
          hi[k] = std::max(hi[k], p->location[k]);
        }
      } else {
        return std::nullopt;
      }
    }
    double acc = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) acc += (hi[k] - lo[k]) * (hi[k] - lo[k]);
    return std::sqrt(acc);
  }
  return std::nullopt;
}

std::vector<double> orthonormal_frame(std::size_t ambient_dim, std::size_t intrinsic_dim,
                                      std::uint64_t frame_seed) {
  RandomStream rng(Seed{frame_seed, "affine-frame"});
  Eigen::MatrixXd g(ambient_dim, intrinsic_dim);
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(ambient_dim, intrinsic_dim);
  // Fix the sign ambiguity so that R has a positive diagonal.
  const Eigen::MatrixXd r = qr.matrixQR().topRows(intrinsic_dim).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return {q.data(), q.data() + q.size()};
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

void draw_point(const DistributionSpec& spec, RandomStream& rng, std::span<double> out);

struct PointDrawer {
  RandomStream& rng;
  std::span<double> out;

  void operator()(const GaussianFamily& g) const {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = g.mean[k] + std::sqrt(g.variances[k]) * rng.normal();
  }
  void operator()(const UniformCubeFamily& c) const {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = c.center[k] + c.side * (rng.uniform() - 0.5);
  }
  void operator()(const PointMassFamily& p) const {
    std::copy(p.location.begin(), p.location.end(), out.begin());
  }
  void operator()(const MixtureFamily& m) const {
    const double u = rng.uniform();
    double cumulative = 0.0;
    const MixtureComponent* chosen = &m.components.back();
    for (const auto& comp : m.components) {
      cumulative += comp.weight;
      if (u < cumulative) {
        chosen = &comp;
        break;
      }
    }
    draw_point(*chosen->spec, rng, out);
  }
  void operator()(const AffineEmbeddedFamily& a) const {
    std::vector<double> z(a.intrinsic_dim);
    draw_point(*a.base, rng, z);
    for (std::size_t i = 0; i < a.ambient_dim; ++i) {
      double acc = a.offset[i];
      for (std::size_t j = 0; j < a.intrinsic_dim; ++j) acc += a.frame[j * a.ambient_dim + i] * z[j];
      out[i] = acc;
    }
  }
};

void draw_point(const DistributionSpec& spec, RandomStream& rng, std::span<double> out) {
  std::visit(PointDrawer{rng, out}, spec.family());
}

}  // namespace

PointCloud sample(const DistributionSpec& spec, std::size_t n, const Seed& seed) {
  if (n < 1) throw InputError("sample size must be >= 1");
  const std::size_t d = spec.dim();
  std::vector<double> coords(n * d);
  RandomStream rng(seed);
  for (std::size_t i = 0; i < n; ++i) draw_point(spec, rng, std::span<double>(coords.data() + i * d, d));
  return PointCloud(d, std::move(coords));
}

// ---------------------------------------------------------------------------
// CSV ingestion

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

PointCloud parse_point_cloud(std::string_view text, std::optional<std::size_t> expected_dim) {
  std::vector<double> coords;
  std::size_t width = 0;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text.remove_prefix(eol == std::string_view::npos ? text.size() : eol + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;

    std::size_t fields = 0;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      std::string_view field = trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
      ++fields;
      if (!field.empty() && field.front() == '+') field.remove_prefix(1);
      double value = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value)) {
        std::ostringstream msg;
        msg << "non-numeric field at row " << line_no << ", column " << fields << ": '" << field << "'";
        throw InputError(msg.str());
      }
      coords.push_back(value);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (width == 0) {
      width = fields;
    } else if (fields != width) {
      std::ostringstream msg;
      msg << "inconsistent row width at row " << line_no << ": expected " << width << " fields, found " << fields;
      throw InputError(msg.str());
    }
  }
  if (coords.empty()) throw InputError("no points found");
  if (expected_dim && *expected_dim != width) {
    std::ostringstream msg;
    msg << "dimension mismatch: expected " << *expected_dim << ", file has " << width;
    throw InputError(msg.str());
  }
  return PointCloud(width, std::move(coords));
}

PointCloud load_point_cloud(const std::filesystem::path& path, std::optional<std::size_t> expected_dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open point file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_point_cloud(buffer.str(), expected_dim);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void save_point_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write point file: " + path.string());
  char buf[32];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (std::size_t k = 0; k < cloud.dim(); ++k) {
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, cloud(i, k));
      if (k) out << ',';
      out.write(buf, ptr - buf);
    }
    out << '\n';
  }
}

}  // namespace swd
