#include <gtest/gtest.h>

#include <cmath>

#include "mmdim/error.hpp"
#include "mmdim/systems.hpp"
#include "oracles.hpp"

using namespace mmdim;

namespace {

SystemModel binary(int window = 8, double eps_min = 0.1) {
  SystemParams p;
  p.k = 2;
  p.window = window;
  p.eps_min = eps_min;
  return SystemModel(p);
}

}  // namespace

TEST(Metric, IdentityIsZero) {
  const SystemModel s = binary();
  const PointWindow x = s.make_point({1, 0, 1, 1});
  EXPECT_EQ(s.metric(x, x), 0.0);
}

TEST(Metric, SingleDifferenceAtOrigin) {
  const SystemModel s = binary();
  EXPECT_DOUBLE_EQ(s.metric(s.make_point({0, 0, 0}), s.make_point({1, 0, 0})), 1.0);
}

TEST(Metric, SingleDifferenceAtCoordinateOne) {
  const SystemModel s = binary();
  const auto x = s.make_point({0, 1, 0}), y = s.make_point({0, 0, 0});
  EXPECT_DOUBLE_EQ(s.metric(x, y), 0.5);
  EXPECT_DOUBLE_EQ(s.metric(x, y), oracle::shifted(s, x, y, 0));
}

TEST(Metric, MismatchedSystemsRejected) {
  const SystemModel a = binary(8), b = binary(9);
  EXPECT_THROW(a.metric(a.make_point({1}), b.make_point({1})), ConfigError);
}

TEST(Metric, WindowTooSmallRejected) {
  SystemParams p;
  p.window = 3;
  p.eps_min = 0.1;
  EXPECT_THROW(SystemModel{p}, ConfigError);
}

TEST(Metric, TriangleSymmetryAndOracleOnDepthFour) {
  for (auto metric : {SymbolMetric::discrete, SymbolMetric::abs_diff}) {
    SystemParams p;
    p.k = 2;
    p.window = 8;
    p.eps_min = 0.1;
    p.symbol_metric = metric;
    const SystemModel s(p);
    const PointSet z = s.enumerate_points(4);
    for (const auto& x : z)
      for (const auto& y : z) {
        const double dxy = s.metric(x, y);
        EXPECT_NEAR(dxy, oracle::shifted(s, x, y, 0), 1e-15);
        EXPECT_EQ(dxy, s.metric(y, x));
        EXPECT_EQ(dxy == 0.0, x == y);
        for (const auto& w : z) EXPECT_LE(dxy, s.metric(x, w) + s.metric(w, y) + 1e-15);
      }
  }
}

TEST(Metric, TwoSidedOracleAgreement) {
  SystemParams p;
  p.k = 3;
  p.window = 6;
  p.sidedness = Sidedness::two_sided;
  p.symbol_metric = SymbolMetric::abs_diff;
  p.eps_min = 0.4;
  const SystemModel s(p);
  const PointSet z = s.enumerate_points(3);
  for (std::size_t a = 0; a < z.size(); a += 5)
    for (std::size_t b = 0; b < z.size(); b += 3)
      for (int j = 0; j < 3; ++j)
        EXPECT_NEAR(s.shifted_metric(z[a], z[b], j), oracle::shifted(s, z[a], z[b], j), 1e-15);
}

TEST(Metric, DependsOnlyOnDifferingCoordinates) {
  const SystemModel s = binary();
  // Same pattern of differences on different backgrounds.
  const auto x1 = s.make_point({0, 1, 0, 0}), y1 = s.make_point({0, 0, 0, 1});
  const auto x2 = s.make_point({1, 1, 1, 0}), y2 = s.make_point({1, 0, 1, 1});
  EXPECT_DOUBLE_EQ(s.metric(x1, y1), s.metric(x2, y2));
}

TEST(ApplyMap, ShiftsLeftWithZeroPad) {
  SystemParams p;
  p.k = 2;
  p.window = 4;
  p.eps_min = 2.0;
  const SystemModel s(p);
  const auto y = s.apply_map(s.make_point({0, 1, 1, 0}));
  EXPECT_EQ(y, s.make_point({1, 1, 0, 0}));
  const auto ones = s.apply_map(s.make_point({1, 1, 1, 1}));
  EXPECT_EQ(ones, s.make_point({1, 1, 1, 0}));
}

TEST(ApplyMap, TwoSidedKeepsOrigin) {
  SystemParams p;
  p.k = 3;
  p.window = 6;
  p.sidedness = Sidedness::two_sided;
  p.eps_min = 0.4;
  const SystemModel s(p);
  PointWindow x = s.make_point({1, 2, 0, 1});
  x.symbols[0] = 2;  // coordinate -6
  const PointWindow y = s.apply_map(x);
  EXPECT_EQ(y.origin, x.origin);
  for (std::size_t i = 0; i + 1 < x.symbols.size(); ++i) EXPECT_EQ(y.symbols[i], x.symbols[i + 1]);
  EXPECT_EQ(y.symbols.back(), 0);
  EXPECT_EQ(s.coord(y, 0), 2);
}

TEST(Birkhoff, ConstantPotential) {
  const SystemModel s = binary();
  const auto x = s.make_point({1, 0, 1});
  EXPECT_DOUBLE_EQ(birkhoff_sum(s, Potential::constant(0.7), x, 5), 3.5);
  // Constant potentials may run past the window.
  EXPECT_DOUBLE_EQ(birkhoff_sum(s, Potential::constant(1.0), x, 50), 50.0);
}

TEST(Birkhoff, IdentityTable) {
  const SystemModel s = binary();
  EXPECT_DOUBLE_EQ(birkhoff_sum(s, Potential::coordinate({0.0, 1.0}), s.make_point({1, 0, 1, 1}), 3), 2.0);
}

TEST(Birkhoff, TwoValueTable) {
  const SystemModel s = binary();
  EXPECT_NEAR(birkhoff_sum(s, Potential::coordinate({0.2, 0.7}), s.make_point({1, 1, 0}), 2), 1.4, 1e-15);
}

TEST(Birkhoff, WindowExhaustedForTables) {
  const SystemModel s = binary(8);
  EXPECT_THROW(birkhoff_sum(s, Potential::coordinate({0.2, 0.7}), s.make_point({1}), 9), WindowExhausted);
}

TEST(Birkhoff, CocycleOnEnumeratedWords) {
  const SystemModel s = binary(10);
  const Potential phi = Potential::finite_range(2, 2, {0.1, -0.4, 0.9, 0.3});
  for (const auto& x : s.enumerate_points(5))
    for (int n = 1; n <= 4; ++n)
      for (int m = 1; m <= 4; ++m)
        EXPECT_NEAR(birkhoff_sum(s, phi, x, n + m),
                    birkhoff_sum(s, phi, x, n) + [&] {
                      PointWindow y = x;
                      for (int i = 0; i < n; ++i) y = s.apply_map(y);
                      return birkhoff_sum(s, phi, y, m);
                    }(),
                    1e-12);
}

TEST(Potential, ModulusAndBounds) {
  const SystemModel s = binary();
  const Potential c = Potential::constant(0.4);
  EXPECT_EQ(c.modulus(s, 0.5), 0.0);
  const Potential t = Potential::coordinate({0.2, 0.7});
  EXPECT_DOUBLE_EQ(t.sup(), 0.7);
  EXPECT_DOUBLE_EQ(t.inf(), 0.2);
  EXPECT_DOUBLE_EQ(t.norm(), 0.7);
  // Distance <= 0.5 cannot flip coordinate 0 under the discrete metric.
  EXPECT_DOUBLE_EQ(t.modulus(s, 0.5), 0.0);
  EXPECT_NEAR(t.modulus(s, 1.0), 0.5, 1e-15);
}

TEST(Enumerate, Counts) {
  EXPECT_EQ(binary().enumerate_points(2).size(), 4u);
  SystemParams p;
  p.k = 3;
  p.window = 8;
  p.eps_min = 0.1;
  EXPECT_EQ(SystemModel(p).enumerate_points(3).size(), 27u);
}

TEST(Enumerate, CapExceeded) {
  SystemParams p;
  p.kind = ShiftKind::grid;
  p.k = 16;
  p.window = 10;
  p.eps_min = 0.1;
  EXPECT_THROW(SystemModel(p).enumerate_points(6), CapExceeded);
}
