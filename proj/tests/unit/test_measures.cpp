#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "swd/errors.hpp"
#include "swd/measures.hpp"

using namespace swd;

TEST(PointCloud, RejectsBadInput) {
  EXPECT_THROW(PointCloud(0, {1.0}), InputError);
  EXPECT_THROW(PointCloud(2, {}), InputError);
  EXPECT_THROW(PointCloud(2, {1.0, 2.0, 3.0}), InputError);
  EXPECT_THROW(PointCloud(1, {std::nan("")}), InputError);
  EXPECT_THROW(PointCloud(1, {INFINITY}), InputError);
}

TEST(PointCloud, ConcatAndSelect) {
  const auto a = PointCloud::from_rows({{0, 1}, {2, 3}});
  const auto b = PointCloud::from_rows({{4, 5}});
  const auto c = PointCloud::concat(a, b);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c(2, 1), 5.0);
  const std::vector<std::size_t> idx{2, 0, 0};
  const auto s = c.select(idx);
  EXPECT_EQ(s(0, 0), 4.0);
  EXPECT_EQ(s(2, 1), 1.0);
}

TEST(DiscreteMeasure, ValidatesWeights) {
  const auto p = PointCloud::from_rows({{0.0}, {1.0}});
  EXPECT_THROW(DiscreteMeasure(p, {0.5, 0.6}), InputError);
  EXPECT_THROW(DiscreteMeasure(p, {-0.5, 1.5}), InputError);
  EXPECT_THROW(DiscreteMeasure(p, {1.0}), InputError);
  EXPECT_TRUE(empirical_measure(p).is_uniform());
  EXPECT_FALSE(DiscreteMeasure(p, {0.25, 0.75}).is_uniform());
}

TEST(Sampling, DeterministicPerSeed) {
  const auto spec = DistributionSpec::standard_gaussian(3);
  const auto x = sample(spec, 50, Seed{9, "s"});
  const auto y = sample(spec, 50, Seed{9, "s"});
  const auto z = sample(spec, 50, Seed{10, "s"});
  EXPECT_EQ(x, y);
  EXPECT_NE(x, z);
}

TEST(Sampling, GaussianMoments) {
  const auto spec = DistributionSpec::gaussian({1.0, -2.0}, {4.0, 0.25});
  const auto x = sample(spec, 40000, Seed{1, "g"});
  double m0 = 0, m1 = 0, v0 = 0, v1 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    m0 += x(i, 0);
    m1 += x(i, 1);
  }
  m0 /= x.size();
  m1 /= x.size();
  for (std::size_t i = 0; i < x.size(); ++i) {
    v0 += (x(i, 0) - m0) * (x(i, 0) - m0);
    v1 += (x(i, 1) - m1) * (x(i, 1) - m1);
  }
  v0 /= x.size();
  v1 /= x.size();
  EXPECT_NEAR(m0, 1.0, 0.05);
  EXPECT_NEAR(m1, -2.0, 0.0125);
  EXPECT_NEAR(v0, 4.0, 0.15);
  EXPECT_NEAR(v1, 0.25, 0.01);
}

TEST(Sampling, UniformCubeStaysInside) {
  const auto spec = DistributionSpec::uniform_cube(2.0, {1.0, 1.0, 1.0});
  const auto x = sample(spec, 5000, Seed{1, "c"});
  for (double v : x.coords()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 2.0);
  }
  EXPECT_NEAR(*spec.support_diameter(), 2.0 * std::sqrt(3.0), 1e-12);
}

TEST(Sampling, MixtureWeights) {
  const auto spec = DistributionSpec::mixture(
      {{0.3, DistributionSpec::point_mass({-1.0})}, {0.7, DistributionSpec::point_mass({1.0})}});
  const auto x = sample(spec, 20000, Seed{5, "m"});
  int left = 0;
  for (double v : x.coords()) left += v < 0;
  EXPECT_NEAR(left / 20000.0, 0.3, 0.015);
  EXPECT_NEAR(*spec.support_diameter(), 2.0, 1e-12);
}

TEST(Sampling, AffineEmbeddingIsOrthonormalAndFlat) {
  const std::size_t d = 8, s = 2;
  const auto frame = orthonormal_frame(d, s, 77);
  for (std::size_t a = 0; a < s; ++a) {
    for (std::size_t b = 0; b < s; ++b) {
      double dot = 0;
      for (std::size_t k = 0; k < d; ++k) dot += frame[a * d + k] * frame[b * d + k];
      EXPECT_NEAR(dot, a == b ? 1.0 : 0.0, 1e-12);
    }
  }
  std::vector<double> offset(d, 0.5);
  const auto spec =
      DistributionSpec::affine_embedded(s, d, DistributionSpec::uniform_cube(1.0, {0.0, 0.0}), offset, 77);
  const auto x = sample(spec, 100, Seed{1, "e"});
  // Residual after projecting x − offset onto the frame must vanish.
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> r(d);
    for (std::size_t k = 0; k < d; ++k) r[k] = x(i, k) - offset[k];
    for (std::size_t a = 0; a < s; ++a) {
      double c = 0;
      for (std::size_t k = 0; k < d; ++k) c += r[k] * frame[a * d + k];
      for (std::size_t k = 0; k < d; ++k) r[k] -= c * frame[a * d + k];
    }
    for (double v : r) EXPECT_NEAR(v, 0.0, 1e-12);
  }
}

TEST(PointFile, ParsesCommentsAndBlankLines) {
  const auto c = parse_point_cloud("# header\n1,2\n\n3.5,-4e-1\n");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.dim(), 2u);
  EXPECT_DOUBLE_EQ(c(1, 1), -0.4);
}

TEST(PointFile, ReportsRowAndColumn) {
  try {
    parse_point_cloud("1,2\n3,abc\n");
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2, column 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_point_cloud("1,2\n3\n"), InputError);
  EXPECT_THROW(parse_point_cloud("# only a comment\n"), InputError);
  EXPECT_THROW(parse_point_cloud("1,2\n", 3), InputError);
}

TEST(PointFile, RoundTripIsBitExact) {
  const auto x = sample(DistributionSpec::standard_gaussian(3), 40, Seed{1, "rt"});
  const auto path = std::filesystem::temp_directory_path() / "swd_roundtrip.csv";
  save_point_cloud(path, x);
  EXPECT_EQ(load_point_cloud(path), x);
  std::filesystem::remove(path);
  EXPECT_THROW(load_point_cloud("/nonexistent/file.csv"), InputError);
}
