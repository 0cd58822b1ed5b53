#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "titleeval/transport.hpp"

namespace titleeval {
namespace {

Matrix from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < m.rows; ++i)
    for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
  return m;
}

std::vector<int> random_units(std::mt19937_64& rng, std::size_t k, int total) {
  // Random composition of `total` into k positive parts.
  std::vector<int> cuts;
  std::uniform_int_distribution<int> pick(1, total - 1);
  while (cuts.size() + 1 < k) {
    int c = pick(rng);
    if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  std::vector<int> parts;
  int prev = 0;
  for (int c : cuts) {
    parts.push_back(c - prev);
    prev = c;
  }
  parts.push_back(total - prev);
  return parts;
}

std::vector<double> to_mass(const std::vector<int>& units, int total) {
  std::vector<double> out;
  for (int u : units) out.push_back(static_cast<double>(u) / total);
  return out;
}

TEST(Transport, SingleCell) {
  std::vector<double> one{1.0};
  auto plan = solve_transport(one, one, from_rows({{0.6}}));
  EXPECT_DOUBLE_EQ(plan.cost, 0.6);
  EXPECT_DOUBLE_EQ(plan.flow(0, 0), 1.0);
}

TEST(Transport, PicksCheapDiagonal) {
  std::vector<double> half{0.5, 0.5};
  auto plan = solve_transport(half, half, from_rows({{0.0, 1.0}, {1.0, 0.0}}));
  EXPECT_NEAR(plan.cost, 0.0, 1e-12);
  plan = solve_transport(half, half, from_rows({{1.0, 0.0}, {0.0, 1.0}}));
  EXPECT_NEAR(plan.cost, 0.0, 1e-12);
  EXPECT_NEAR(plan.flow(0, 1), 0.5, 1e-12);
}

TEST(Transport, UnevenMarginals) {
  // One source split over two sinks: cost is the weighted average.
  std::vector<double> s{1.0}, d{0.25, 0.75};
  auto plan = solve_transport(s, d, from_rows({{0.2, 0.6}}));
  EXPECT_NEAR(plan.cost, 0.25 * 0.2 + 0.75 * 0.6, 1e-12);
}

TEST(Transport, MatchesGridEnumeration) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<std::size_t> size(1, 3);
  std::uniform_real_distribution<double> c(0.0, 2.0);
  const int units = 24;
  for (int trial = 0; trial < 60; ++trial) {
    std::size_t m = size(rng), n = size(rng);
    auto su = random_units(rng, m, units), du = random_units(rng, n, units);
    std::vector<std::vector<double>> cost(m, std::vector<double>(n));
    for (auto& row : cost)
      for (auto& x : row) x = c(rng);
    double grid = oracle::grid_transport_min(su, du, cost, units);
    auto plan = solve_transport(to_mass(su, units), to_mass(du, units), from_rows(cost));
    // Integral marginals give an integral optimal vertex, so the grid
    // contains the optimum.
    EXPECT_NEAR(plan.cost, grid, 1e-9);
  }
}

TEST(Transport, MarginalsAndDualCertificate) {
  std::mt19937_64 rng(32);
  std::uniform_int_distribution<std::size_t> size(1, 12);
  std::uniform_real_distribution<double> w(0.01, 1.0), c(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t m = size(rng), n = size(rng);
    std::vector<double> s(m), d(n);
    for (auto& x : s) x = w(rng);
    for (auto& x : d) x = w(rng);
    double ss = std::accumulate(s.begin(), s.end(), 0.0), ds = std::accumulate(d.begin(), d.end(), 0.0);
    for (auto& x : s) x /= ss;
    for (auto& x : d) x /= ds;
    // Force exact balance after rounding.
    d.back() += std::accumulate(s.begin(), s.end(), 0.0) - std::accumulate(d.begin(), d.end(), 0.0);
    Matrix cost(m, n);
    for (auto& x : cost.data) x = c(rng);

    auto plan = solve_transport(s, d, cost);
    for (std::size_t i = 0; i < m; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        EXPECT_GE(plan.flow(i, j), -1e-12);
        row += plan.flow(i, j);
      }
      EXPECT_NEAR(row, s[i], 1e-8);
    }
    for (std::size_t j = 0; j < n; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < m; ++i) col += plan.flow(i, j);
      EXPECT_NEAR(col, d[j], 1e-8);
    }
    EXPECT_LE(plan.max_dual_violation(cost), 1e-9);
    EXPECT_LE(plan.dual_objective(s, d), plan.cost + 1e-8);
    EXPECT_NEAR(plan.dual_objective(s, d), plan.cost, 1e-8);
  }
}

TEST(Transport, TransposeGivesSameCost) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> c(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    auto su = random_units(rng, 4, 60), du = random_units(rng, 5, 60);
    Matrix cost(4, 5), tcost(5, 4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 5; ++j) tcost(j, i) = cost(i, j) = c(rng);
    auto a = solve_transport(to_mass(su, 60), to_mass(du, 60), cost);
    auto b = solve_transport(to_mass(du, 60), to_mass(su, 60), tcost);
    EXPECT_NEAR(a.cost, b.cost, 1e-10);
  }
}

TEST(Transport, DegenerateTiesTerminate) {
  // Identical rows and columns and constant cost: heavy degeneracy.
  const std::size_t k = 20;
  std::vector<double> u(k, 1.0 / k);
  Matrix cost(k, k, 0.5);
  auto plan = solve_transport(u, u, cost);
  EXPECT_NEAR(plan.cost, 0.5, 1e-12);
}

TEST(Transport, RejectsBadInput) {
  std::vector<double> one{1.0}, two{0.5, 0.5}, empty;
  Matrix c11(1, 1), c12(1, 2);
  EXPECT_THROW(solve_transport(empty, one, c11), Error);
  EXPECT_THROW(solve_transport(one, two, c11), Error);
  EXPECT_THROW(solve_transport(one, std::vector<double>{0.5, 0.4}, c12), Error);
  EXPECT_THROW(solve_transport(std::vector<double>{-1.0, 2.0}, one, Matrix(2, 1)), Error);
  Matrix nan_cost(1, 1, std::numeric_limits<double>::quiet_NaN());
  EXPECT_THROW(solve_transport(one, one, nan_cost), Error);
}

}  // namespace
}  // namespace titleeval
