#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "swd/errors.hpp"
#include "swd/lattice.hpp"
#include "swd/smooth_w1.hpp"

using namespace swd;

TEST(NormalCdf, IntervalsAreAccurateInTails) {
  EXPECT_NEAR(normal_cdf(0.0), 0.5, 1e-16);
  EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-15);
  // Far tail interval, where the naive difference of CDFs would be 0.
  const double tail = normal_interval(10.0, 11.0);
  EXPECT_GT(tail, 7.6e-24);
  EXPECT_LT(tail, 7.7e-24);
  EXPECT_NEAR(normal_interval(-11.0, -10.0), tail, 1e-36);
  EXPECT_NEAR(normal_interval(-1.0, 1.0), 0.6826894921370859, 1e-15);
  EXPECT_EQ(normal_interval(1.0, 1.0), 0.0);
}

TEST(GridBox, CoversDataWithMargin) {
  const auto a = PointCloud::from_rows({{0.0, 0.0}, {1.0, 3.0}});
  const auto b = PointCloud::from_rows({{-1.0, 2.0}});
  GridOptions opt;
  const auto box = make_grid_box(a, b, 0.5, opt);
  ASSERT_EQ(box.dim(), 2u);
  EXPECT_NEAR(box.width, 0.25, 1e-15);
  EXPECT_LE(box.lower[0], -1.0 - 1.5 + 1e-12);
  EXPECT_GE(box.lower[0] + box.width * box.cells[0], 1.0 + 1.5 - 1e-12);
  opt.max_cells = 100;
  const auto coarse = make_grid_box(a, b, 0.5, opt);
  EXPECT_LE(coarse.cell_count(), 100u);
}

TEST(CellMasses, SumToOneAndMatchDirectFormula) {
  const auto x = PointCloud::from_rows({{0.1}, {0.7}, {2.0}});
  GridOptions opt;
  const auto box = make_grid_box(x, x, 0.4, opt);
  const auto m = smoothed_cell_masses(x, 0.4, box);
  EXPECT_NEAR(std::accumulate(m.begin(), m.end(), 0.0), 1.0, 1e-14);
  for (std::size_t c = 1; c + 1 < m.size(); ++c) {
    const double l = box.lower[0] + c * box.width, u = l + box.width;
    double direct = 0;
    for (double p : x.coords()) direct += (std::erf((u - p) / 0.4 / std::sqrt(2.0)) - std::erf((l - p) / 0.4 / std::sqrt(2.0))) / 6.0;
    EXPECT_NEAR(m[c], direct, 1e-15);
  }
}

TEST(CellMasses, ThreeDimensionalTensorProduct) {
  const auto x = sample(DistributionSpec::standard_gaussian(3), 20, Seed{1, "cm"});
  GridOptions opt;
  opt.spacing = 0.7;
  const auto box = make_grid_box(x, x, 1.0, opt);
  const auto m = smoothed_cell_masses(x, 1.0, box);
  EXPECT_NEAR(std::accumulate(m.begin(), m.end(), 0.0), 1.0, 1e-13);
  for (double v : m) EXPECT_GE(v, 0.0);
}

TEST(Stencil, PrimitiveDirections) {
  EXPECT_EQ(lattice_stencil(1, 3).size(), 2u);
  EXPECT_EQ(lattice_stencil(2, 1).size(), 8u);
  EXPECT_EQ(lattice_stencil(2, 2).size(), 16u);
  EXPECT_EQ(lattice_stencil(3, 1).size(), 26u);
  EXPECT_EQ(lattice_stencil(3, 2).size(), 98u);
  EXPECT_NEAR(stencil_distortion(2, 1), 1.0 / std::cos(M_PI / 8), 1e-12);
  EXPECT_NEAR(stencil_distortion(2, 2), 1.0 / std::cos(0.5 * std::atan(0.5)), 1e-12);
}

TEST(LatticeTransport, OneDimensionalMatchesCumulativeOracle) {
  // On a line W1 between cell masses is h·Σ|cumulative difference|.
  GridBox box;
  box.lower = {0.0};
  box.cells = {40};
  box.width = 0.3;
  RandomStream r(Seed{4, "lt"});
  std::vector<double> a(40), b(40);
  for (auto& v : a) v = r.uniform();
  for (auto& v : b) v = r.uniform();
  const double sa = std::accumulate(a.begin(), a.end(), 0.0), sb = std::accumulate(b.begin(), b.end(), 0.0);
  for (auto& v : a) v /= sa;
  for (auto& v : b) v /= sb;
  double oracle = 0, cum = 0;
  for (std::size_t c = 0; c < 40; ++c) {
    cum += a[c] - b[c];
    oracle += 0.3 * std::abs(cum);
  }
  LatticeTransport lt(box, 2);
  EXPECT_NEAR(lt.w1(a, b).value, oracle, 1e-12);
  // Solver reuse with swapped roles.
  EXPECT_NEAR(lt.w1(b, a).value, oracle, 1e-12);
}

TEST(GridEstimator, TranslationInPlane) {
  // W1σ(P, P + v) = |v| for every σ.
  const auto a = sample(DistributionSpec::standard_gaussian(2), 60, Seed{5, "tr"});
  for (const std::vector<double>& v : {std::vector<double>{0.8, 0.0}, std::vector<double>{0.6, 0.6}}) {
    const double len = std::hypot(v[0], v[1]);
    const auto est = grid_smooth_w1(a, a.translated(v), 1.0, GridOptions{});
    EXPECT_NEAR(est.value, len, 0.03 * len);
  }
}

TEST(GridEstimator, CollinearDataMatchesQuadrature) {
  const auto x = sample(DistributionSpec::standard_gaussian(1), 40, Seed{6, "cx"});
  const auto y = sample(DistributionSpec::uniform_cube(3.0, {0.5}), 50, Seed{6, "cy"});
  std::vector<double> x2, y2;
  for (double v : x.coords()) x2.insert(x2.end(), {v, 0.0});
  for (double v : y.coords()) y2.insert(y2.end(), {v, 0.0});
  const double q = swd_quadrature_1d(x, y, 0.5).value;
  const double g = grid_smooth_w1(PointCloud(2, x2), PointCloud(2, y2), 0.5, GridOptions{}).value;
  EXPECT_NEAR(g, q, 0.01 * q + 1e-3);
  const double g1 = grid_smooth_w1(x, y, 0.5, GridOptions{}).value;
  EXPECT_NEAR(g1, q, 0.01 * q + 1e-3);
}

TEST(GridEstimator, ThreeDimensionalTranslation) {
  const auto a = sample(DistributionSpec::standard_gaussian(3), 30, Seed{7, "t3"});
  GridOptions opt;
  opt.stencil_radius = 1;
  opt.spacing = 0.75;
  const std::vector<double> v{0.7, 0.0, 0.0};
  const auto est = grid_smooth_w1(a, a.translated(v), 1.0, opt);
  EXPECT_NEAR(est.value, 0.7, 0.05);
}

TEST(Reduction, DetectsEmbeddedRankAndPreservesDistances) {
  const auto spec = DistributionSpec::affine_embedded(2, 6, DistributionSpec::standard_gaussian(2),
                                                      std::vector<double>(6, 1.0), 3);
  const auto a = sample(spec, 40, Seed{1, "ra"});
  const auto b = sample(spec, 30, Seed{1, "rb"});
  const auto red = reduce_to_common_subspace(a, b);
  EXPECT_EQ(red.rank, 2u);
  ASSERT_EQ(red.a.dim(), 2u);
  for (std::size_t i = 0; i < 40; ++i) {
    for (std::size_t j = 0; j < 30; ++j) {
      EXPECT_NEAR(euclidean_distance(red.a.point(i), red.b.point(j)), euclidean_distance(a.point(i), b.point(j)),
                  1e-10);
    }
  }
  const auto full = reduce_to_common_subspace(sample(DistributionSpec::standard_gaussian(3), 10, Seed{2, "f"}),
                                              sample(DistributionSpec::standard_gaussian(3), 10, Seed{3, "f"}));
  EXPECT_EQ(full.rank, 3u);
  const auto same = PointCloud::from_rows({{1.0, 2.0}, {1.0, 2.0}});
  EXPECT_EQ(reduce_to_common_subspace(same, same).rank, 0u);
}
