#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "swd/errors.hpp"
#include "swd/exact_ot.hpp"
#include "swd/network_simplex.hpp"

using namespace swd;

namespace {

PointCloud gaussian_cloud(std::size_t n, std::size_t d, std::uint64_t seed) {
  return sample(DistributionSpec::standard_gaussian(d), n, Seed{seed, "ot-test"});
}

void expect_marginals(const TransportPlan& plan, std::span<const double> a, std::span<const double> b) {
  std::vector<double> ra(a.size(), 0.0), rb(b.size(), 0.0);
  for (const auto& e : plan.entries) {
    EXPECT_GE(e.mass, 0.0);
    ra[e.source] += e.mass;
    rb[e.target] += e.mass;
  }
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(ra[i], a[i], 1e-12);
  for (std::size_t j = 0; j < b.size(); ++j) EXPECT_NEAR(rb[j], b[j], 1e-12);
}

}  // namespace

TEST(ExactOt, SmallCasesMatchBruteForce) {
  for (std::uint64_t s = 0; s < 40; ++s) {
    const std::size_t n = 1 + s % 7;
    const auto a = gaussian_cloud(n, 2, 2 * s);
    const auto b = gaussian_cloud(n, 2, 2 * s + 1);
    const double oracle = w1_bruteforce(a, b).distance;
    EXPECT_NEAR(w1_assignment(a, b).distance, oracle, 1e-12) << "seed " << s;
    EXPECT_NEAR(w1_mincost_flow(empirical_measure(a), empirical_measure(b)).distance, oracle, 1e-12) << "seed " << s;
  }
}

TEST(ExactOt, OneDimensionalAgreesWithSortedFormula) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto a = gaussian_cloud(30 + s, 1, 100 + s);
    const auto b = gaussian_cloud(45, 1, 200 + s);
    RandomStream r(Seed{s, "weights"});
    std::vector<double> wa(a.size()), wb(b.size());
    for (auto& w : wa) w = r.uniform_open();
    for (auto& w : wb) w = r.uniform_open();
    const double sa = std::accumulate(wa.begin(), wa.end(), 0.0);
    const double sb = std::accumulate(wb.begin(), wb.end(), 0.0);
    for (auto& w : wa) w /= sa;
    for (auto& w : wb) w /= sb;
    const DiscreteMeasure ma(a, wa), mb(b, wb);
    EXPECT_NEAR(w1_mincost_flow(ma, mb).distance, w1_sorted_1d(ma, mb).distance, 1e-10);
  }
}

TEST(ExactOt, RationalWeightsMatchReplicatedBruteForce) {
  // Weights k/8 are equivalent to uniform clouds with repeated atoms.
  const auto a = PointCloud::from_rows({{0.0, 0.0}, {1.0, 2.0}, {-1.0, 0.5}});
  const auto b = PointCloud::from_rows({{0.5, 0.5}, {2.0, -1.0}});
  const std::vector<int> ka{3, 4, 1}, kb{5, 3};
  std::vector<std::size_t> ia, ib;
  for (std::size_t i = 0; i < ka.size(); ++i) ia.insert(ia.end(), ka[i], i);
  for (std::size_t j = 0; j < kb.size(); ++j) ib.insert(ib.end(), kb[j], j);
  const double oracle = w1_bruteforce(a.select(ia), b.select(ib)).distance;
  const DiscreteMeasure ma(a, {3 / 8.0, 4 / 8.0, 1 / 8.0}), mb(b, {5 / 8.0, 3 / 8.0});
  const auto sol = w1_mincost_flow(ma, mb);
  EXPECT_NEAR(sol.distance, oracle, 1e-12);
  ASSERT_TRUE(sol.plan);
  expect_marginals(*sol.plan, ma.weights(), mb.weights());
}

TEST(ExactOt, TranslationCostsTheShiftLength) {
  const auto a = gaussian_cloud(120, 3, 5);
  const std::vector<double> v{0.3, -1.2, 0.4};
  const double len = std::sqrt(0.09 + 1.44 + 0.16);
  EXPECT_NEAR(w1_assignment(a, a.translated(v)).distance, len, 1e-12);
  EXPECT_NEAR(w1_mincost_flow(empirical_measure(a), empirical_measure(a.translated(v))).distance, len, 1e-12);
}

TEST(ExactOt, AssignmentAndFlowAgreeAtScale) {
  const auto a = gaussian_cloud(300, 4, 11);
  const auto b = sample(DistributionSpec::uniform_cube(3.0, {0, 0, 0, 0}), 300, Seed{12, "x"});
  const double x = w1_assignment(a, b).distance;
  const double y = w1_mincost_flow(empirical_measure(a), empirical_measure(b)).distance;
  EXPECT_NEAR(x, y, 1e-10 * x);
}

TEST(ExactOt, UnequalSizesUseExactIntegerMasses) {
  const auto m = integer_masses(std::vector<double>(6, 1 / 6.0), true, std::vector<double>(4, 0.25), true);
  EXPECT_EQ(m.total, 12);
  EXPECT_EQ(m.first[0], 2);
  EXPECT_EQ(m.second[0], 3);
  const auto q = quantize_weights(std::vector<double>{1 / 3.0, 1 / 3.0, 1 / 3.0}, 10);
  EXPECT_EQ(std::accumulate(q.begin(), q.end(), std::int64_t{0}), 10);
}

TEST(ExactOt, SymmetryAndIdentity) {
  const auto a = gaussian_cloud(50, 2, 1);
  const auto b = gaussian_cloud(70, 2, 2);
  const auto ma = empirical_measure(a), mb = empirical_measure(b);
  EXPECT_NEAR(w1_mincost_flow(ma, mb).distance, w1_mincost_flow(mb, ma).distance, 1e-12);
  EXPECT_EQ(w1_assignment(a, a).distance, 0.0);
  EXPECT_EQ(w1_mincost_flow(ma, ma).distance, 0.0);
}

TEST(ExactOt, SinkhornApproachesExactFromAbove) {
  const auto a = gaussian_cloud(60, 2, 21);
  const auto b = gaussian_cloud(60, 2, 22).translated(std::vector<double>{1.0, 0.0});
  const auto ma = empirical_measure(a), mb = empirical_measure(b);
  const double exact = w1_assignment(a, b).distance;
  SinkhornOptions opt;
  opt.epsilon = 0.05;
  const auto s = w1_sinkhorn(ma, mb, opt);
  EXPECT_TRUE(s.converged);
  EXPECT_LT(s.gap, 1e-6);
  EXPECT_GE(s.distance, exact - 1e-6);
  EXPECT_LT(s.distance, exact + 0.1);
}

TEST(ExactOt, RejectsMismatchedInputs) {
  const auto a = gaussian_cloud(5, 2, 1);
  const auto b = gaussian_cloud(6, 2, 2);
  const auto c = gaussian_cloud(5, 3, 3);
  EXPECT_THROW(w1_assignment(a, b), InputError);
  EXPECT_THROW(w1_assignment(a, c), InputError);
  EXPECT_THROW(w1_mincost_flow(empirical_measure(a), empirical_measure(c)), InputError);
}

TEST(NetworkSimplex, TransshipmentWithOptimalityCertificate) {
  // A path graph where the cheap route goes through an intermediate node.
  NetworkSimplex ns(4);
  ns.add_arc(0, 3, 10.0);
  ns.add_arc(0, 1, 1.0);
  ns.add_arc(1, 2, 1.0);
  ns.add_arc(2, 3, 1.0);
  ns.add_arc(1, 3, 5.0);
  const std::vector<std::int64_t> supply{5, 0, 0, -5};
  ns.set_supplies(supply);
  ASSERT_EQ(ns.run(), NetworkSimplex::Status::optimal);
  EXPECT_DOUBLE_EQ(ns.total_cost(), 15.0);
  EXPECT_LE(ns.max_dual_violation(), 1e-12);
}

TEST(NetworkSimplex, DetectsInfeasibility) {
  NetworkSimplex ns(3);
  ns.add_arc(0, 1, 1.0);
  const std::vector<std::int64_t> supply{1, 0, -1};
  ns.set_supplies(supply);
  EXPECT_EQ(ns.run(), NetworkSimplex::Status::infeasible);
  NetworkSimplex unbalanced(2);
  unbalanced.add_arc(0, 1, 1.0);
  const std::vector<std::int64_t> bad{2, -1};
  unbalanced.set_supplies(bad);
  EXPECT_EQ(unbalanced.run(), NetworkSimplex::Status::infeasible);
}

TEST(NetworkSimplex, RerunWithNewSupplies) {
  NetworkSimplex ns(3);
  ns.add_arc(0, 1, 1.0);
  ns.add_arc(1, 2, 2.0);
  ns.add_arc(2, 0, 4.0);
  const std::vector<std::int64_t> s1{3, 0, -3};
  ns.set_supplies(s1);
  ASSERT_EQ(ns.run(), NetworkSimplex::Status::optimal);
  EXPECT_DOUBLE_EQ(ns.total_cost(), 9.0);
  const std::vector<std::int64_t> s2{-2, 0, 2};
  ns.set_supplies(s2);
  ASSERT_EQ(ns.run(), NetworkSimplex::Status::optimal);
  EXPECT_DOUBLE_EQ(ns.total_cost(), 8.0);
}
