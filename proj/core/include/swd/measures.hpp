#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "swd/rng.hpp"

namespace swd {

/// n points in R^d stored row-major. Always non-empty with finite coordinates.
class PointCloud {
 public:
  PointCloud(std::size_t dim, std::vector<double> coords);

  static PointCloud from_rows(const std::vector<std::vector<double>>& rows);

  [[nodiscard]] std::size_t size() const { return coords_.size() / dim_; }
  [[nodiscard]] std::size_t dim() const { return dim_; }

  [[nodiscard]] std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  [[nodiscard]] double operator()(std::size_t i, std::size_t k) const {
    return coords_[i * dim_ + k];
  }
  [[nodiscard]] std::span<const double> coords() const { return coords_; }

  [[nodiscard]] PointCloud translated(std::span<const double> shift) const;
  [[nodiscard]] PointCloud select(std::span<const std::size_t> indices) const;
  /// Rows of `first` followed by rows of `second`.
  [[nodiscard]] static PointCloud concat(const PointCloud& first, const PointCloud& second);

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

 private:
  std::size_t dim_;
  std::vector<double> coords_;
};

double euclidean_distance(std::span<const double> x, std::span<const double> y);

/// Weighted atoms; weights are non-negative and sum to one.
class DiscreteMeasure {
 public:
  DiscreteMeasure(PointCloud support, std::vector<double> weights);

  [[nodiscard]] const PointCloud& support() const { return support_; }
  [[nodiscard]] std::span<const double> weights() const { return weights_; }
  [[nodiscard]] std::size_t size() const { return weights_.size(); }
  [[nodiscard]] std::size_t dim() const { return support_.dim(); }
  /// True when every weight equals 1/size().
  [[nodiscard]] bool is_uniform() const { return uniform_; }

 private:
  PointCloud support_;
  std::vector<double> weights_;
  bool uniform_ = false;
};

/// Uniform weights 1/n; duplicate points stay separate atoms.
DiscreteMeasure empirical_measure(const PointCloud& cloud);

class DistributionSpec;

struct GaussianFamily {
  std::vector<double> mean;
  std::vector<double> variances;  // diagonal covariance
};

struct UniformCubeFamily {
  double side = 1.0;
  std::vector<double> center;
};

struct PointMassFamily {
  std::vector<double> location;
};

struct MixtureComponent {
  double weight;
  std::shared_ptr<const DistributionSpec> spec;
};

struct MixtureFamily {
  std::vector<MixtureComponent> components;
};

/// Law of x0 + F·Z where Z follows `base` on R^s and F is a d×s matrix with
/// orthonormal columns generated from `frame_seed`.
struct AffineEmbeddedFamily {
  std::size_t intrinsic_dim = 0;
  std::size_t ambient_dim = 0;
  std::shared_ptr<const DistributionSpec> base;
  std::vector<double> offset;
  std::uint64_t frame_seed = 0;
  std::vector<double> frame;  // column-major d×s
};

/// Immutable description of a sampling law. Construct through the named
/// factories, which validate the family invariants.
class DistributionSpec {
 public:
  using Family = std::variant<GaussianFamily, UniformCubeFamily, PointMassFamily,
                              MixtureFamily, AffineEmbeddedFamily>;

  static DistributionSpec gaussian(std::vector<double> mean, std::vector<double> variances);
  static DistributionSpec standard_gaussian(std::size_t dim);
  static DistributionSpec uniform_cube(double side, std::vector<double> center);
  static DistributionSpec point_mass(std::vector<double> location);
  static DistributionSpec mixture(std::vector<std::pair<double, DistributionSpec>> components);
  static DistributionSpec affine_embedded(std::size_t intrinsic_dim, std::size_t ambient_dim,
                                          DistributionSpec base, std::vector<double> offset,
                                          std::uint64_t frame_seed);

  [[nodiscard]] std::size_t dim() const { return dim_; }
  [[nodiscard]] const Family& family() const { return family_; }
  [[nodiscard]] std::string family_name() const;

  /// Diameter of the support when it is bounded and known in closed form
  /// (uniform cubes, point masses, mixtures of those).
  [[nodiscard]] std::optional<double> support_diameter() const;

 private:
  DistributionSpec(std::size_t dim, Family family) : dim_(dim), family_(std::move(family)) {}

  std::size_t dim_;
  Family family_;
};

/// Orthonormal d×s frame (column-major) from QR of a seeded Gaussian matrix.
std::vector<double> orthonormal_frame(std::size_t ambient_dim, std::size_t intrinsic_dim,
                                      std::uint64_t frame_seed);

/// n i.i.d. draws; a pure function of (spec, n, seed).
PointCloud sample(const DistributionSpec& spec, std::size_t n, const Seed& seed);

/// CSV with one point per row; lines starting with '#' are skipped.
PointCloud load_point_cloud(const std::filesystem::path& path,
                            std::optional<std::size_t> expected_dim = std::nullopt);
PointCloud parse_point_cloud(std::string_view text, std::optional<std::size_t> expected_dim = std::nullopt);
void save_point_cloud(const std::filesystem::path& path, const PointCloud& cloud);

}  // namespace swd
