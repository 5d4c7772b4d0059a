#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "mmdim/error.hpp"
#include "mmdim/measure.hpp"
#include "oracles.hpp"

using namespace mmdim;

namespace {

SystemModel binary(int window = 12, double eps_min = 0.1) {
  SystemParams p;
  p.k = 2;
  p.window = window;
  p.eps_min = eps_min;
  return SystemModel(p);
}

SystemModel grid(int k, int window = 16, Sidedness side = Sidedness::two_sided) {
  SystemParams p;
  p.kind = ShiftKind::grid;
  p.k = k;
  p.window = window;
  p.sidedness = side;
  p.symbol_metric = SymbolMetric::abs_diff;
  p.eps_min = 1.0 / k;
  return SystemModel(p);
}

// mu(B_n(x,eps)) by summing over every window word.
double oracle_mass(const SystemModel& s, const std::vector<double>& probs, const PointWindow& x, int n, double eps) {
  const int L = s.length();
  double total = 0.0;
  PointWindow y = x;
  std::vector<int> digits(L, 0);
  for (;;) {
    double m = 1.0;
    for (int i = 0; i < L; ++i) {
      y.symbols[i] = static_cast<std::uint16_t>(digits[i]);
      m *= probs[digits[i]];
    }
    if (m > 0 && oracle::open_ball(s, x, y, n, eps)) total += m;
    int i = 0;
    while (i < L && ++digits[i] == s.k()) digits[i++] = 0;
    if (i == L) break;
  }
  return total;
}

// Smallest number of (n,eps)-balls whose union has mass > 1 - delta under the
// uniform measure on binary window words, for radii below the symbol gap.
// Such balls sit inside n-cylinders and act identically on the tail word, so
// g(j) = best tail mass of j balls is found by subset enumeration and the
// cylinders are combined by a knapsack over counts.
double oracle_katok(const SystemModel& s, int n, double eps, double delta) {
  const int L = s.length();
  const int B = L - n;
  const std::size_t tails = std::size_t{1} << B;
  std::vector<std::uint64_t> cover(tails, 0);
  auto word = [&](std::size_t tail) {
    PointWindow w = s.make_point({});
    for (int b = 0; b < B; ++b) w.symbols[n + b] = static_cast<std::uint16_t>(tail >> b & 1u);
    return w;
  };
  for (std::size_t c = 0; c < tails; ++c)
    for (std::size_t u = 0; u < tails; ++u)
      if (oracle::open_ball(s, word(c), word(u), n, eps)) cover[c] |= std::uint64_t{1} << u;
  std::vector<double> g{0.0};
  std::vector<std::size_t> pick;
  while (g.back() < 1.0) {
    const std::size_t j = g.size();
    double best = 0.0;
    // All j-subsets of the centers.
    pick.assign(j, 0);
    for (std::size_t i = 0; i < j; ++i) pick[i] = i;
    for (;;) {
      std::uint64_t u = 0;
      for (std::size_t i : pick) u |= cover[i];
      best = std::max(best, double(__builtin_popcountll(u)) / double(tails));
      std::size_t i = j;
      while (i > 0 && pick[i - 1] == tails - j + i - 1) --i;
      if (i == 0) break;
      ++pick[i - 1];
      for (std::size_t t = i; t < j; ++t) pick[t] = pick[t - 1] + 1;
    }
    g.push_back(best);
  }
  const int cyl = 1 << n;
  const double need = (1.0 - delta) * cyl;  // in units of one cylinder's mass
  // best[c] = max covered mass (cylinder units) with c balls.
  const std::size_t jmax = g.size() - 1;
  std::vector<double> best(cyl * jmax + 1, 0.0);
  for (int c = 0; c < cyl; ++c) {
    std::vector<double> next(best.size(), 0.0);
    for (std::size_t used = 0; used < best.size(); ++used)
      for (std::size_t j = 0; j <= jmax && used + j < best.size(); ++j)
        next[used + j] = std::max(next[used + j], best[used] + g[j]);
    best = next;
  }
  for (std::size_t c = 0; c < best.size(); ++c)
    if (best[c] > need + 1e-12) return double(c);
  return -1.0;
}

std::vector<int> de_bruijn_2_4() {
  // Lexicographically least cyclic word containing every binary 4-block once.
  std::vector<int> a(8, 0), out;
  std::function<void(int, int)> db = [&](int t, int p) {
    if (t > 4) {
      if (4 % p == 0)
        for (int j = 1; j <= p; ++j) out.push_back(a[j]);
      return;
    }
    a[t] = a[t - p];
    db(t + 1, p);
    for (int j = a[t - p] + 1; j < 2; ++j) {
      a[t] = j;
      db(t + 1, t);
    }
  };
  db(1, 1);
  return out;
}

}  // namespace

TEST(MassBracket, ExampleAtOneEighth) {
  const SystemModel s = grid(8);
  const MeasureModel mu = MeasureModel::product_uniform(s);
  const auto b = ball_mass_bracket(mu, s.make_point({3, 1}), 2, 0.125);
  EXPECT_EQ(b.r, 6);
  EXPECT_DOUBLE_EQ(b.lower, std::pow(1.0 / 48, 14));
  EXPECT_DOUBLE_EQ(b.upper, 0.25);
}

TEST(MassBracket, OrderZero) {
  const SystemModel s = grid(16);
  const auto b = ball_mass_bracket(MeasureModel::product_uniform(s), s.make_point({0}), 0, 1.0 / 16);
  EXPECT_LE(b.lower, 1.0);
  EXPECT_EQ(b.upper, 1.0);
}

TEST(MassBracket, Preconditions) {
  const SystemModel s = grid(8);
  const MeasureModel mu = MeasureModel::product_uniform(s);
  EXPECT_THROW(ball_mass_bracket(mu, s.make_point({0}), 2, 0.3), PreconditionError);
  EXPECT_THROW(ball_mass_bracket(mu, s.make_point({0}), 2, 0.01), PreconditionError);
  const SystemModel b = binary();
  EXPECT_THROW(ball_mass_bracket(MeasureModel::bernoulli(b, {0.3, 0.7}), b.make_point({0}), 2, 0.125),
               PreconditionError);
}

TEST(MeasureModel, RejectsBadProbabilities) {
  const SystemModel s = binary();
  EXPECT_THROW(MeasureModel::bernoulli(s, {0.5, 0.6}), ConfigError);
  EXPECT_THROW(MeasureModel::bernoulli(s, {1.0}), ConfigError);
  EXPECT_THROW(MeasureModel::empirical(s, {}, {}), ConfigError);
}

TEST(MeasureModel, Integrals) {
  const SystemModel s = binary();
  EXPECT_NEAR(MeasureModel::bernoulli(s, {0.3, 0.7}).integral(Potential::coordinate({1.0, 2.0})), 1.7, 1e-14);
  const auto emp = MeasureModel::empirical(s, {s.make_point({0}), s.make_point({1})}, {1.0, 3.0});
  EXPECT_NEAR(emp.integral(Potential::coordinate({0.0, 1.0})), 0.75, 1e-14);
}

TEST(BallMass, ExactMatchesOracle) {
  const SystemModel s = binary(8, 0.1);
  const std::vector<double> probs{0.3, 0.7};
  const MeasureModel mu = MeasureModel::bernoulli(s, probs);
  for (const auto& x : {s.make_point({0, 1, 1}), s.make_point({1, 1, 0, 1})})
    for (int n : {1, 2, 3})
      for (double eps : {0.2, 0.45, 0.8, 1.3})
        EXPECT_NEAR(exact_ball_mass(mu, x, n, eps, 1'000'000), oracle_mass(s, probs, x, n, eps), 1e-12)
            << n << " " << eps;
}

TEST(BallMass, SampledIntervalsContainExactMass) {
  const SystemModel s = binary(8, 0.1);
  const MeasureModel mu = MeasureModel::bernoulli(s, {0.4, 0.6});
  const auto x = s.make_point({1, 0, 1});
  for (auto method : {MassMethod::frequency, MassMethod::importance}) {
    MassOptions o;
    o.method = method;
    o.samples = 20000;
    for (double eps : {0.45, 0.8}) {
      const double exact = exact_ball_mass(mu, x, 2, eps, 1'000'000);
      const auto est = estimate_ball_mass(mu, x, 2, eps, o, 99);
      EXPECT_LE(est.ci_lo, exact);
      EXPECT_GE(est.ci_hi, exact);
    }
  }
}

TEST(BallMass, RadiusAboveDiameterIsOne) {
  const SystemModel s = binary(8, 0.1);
  const MeasureModel mu = MeasureModel::product_uniform(s);
  MassOptions o;
  o.method = MassMethod::frequency;
  o.samples = 2000;
  const auto est = estimate_ball_mass(mu, s.make_point({1, 0}), 3, 3.0, o, 1);
  EXPECT_EQ(est.value, 1.0);
  EXPECT_EQ(est.hits, est.samples);
}

TEST(BallMass, TinyRadiusHasNoHits) {
  const SystemModel s = grid(64);
  MassOptions o;
  o.method = MassMethod::frequency;
  o.samples = 2000;
  const auto est = estimate_ball_mass(MeasureModel::product_uniform(s), s.make_point({5, 9, 60}), 4, 1.0 / 64, o, 3);
  EXPECT_TRUE(est.zero_hits);
  EXPECT_EQ(est.value, 0.0);
  EXPECT_GT(est.ci_hi, 0.0);
}

TEST(BallMass, ImportanceWithinGridBracket) {
  const SystemModel s = grid(16);
  const MeasureModel mu = MeasureModel::product_uniform(s);
  MassOptions o;
  o.method = MassMethod::importance;
  o.samples = 20000;
  Rng rng(4);
  for (int n : {1, 3, 5}) {
    const PointWindow x = mu.sample(rng);
    const auto b = ball_mass_bracket(mu, x, n, 1.0 / 16);
    const auto est = estimate_ball_mass(mu, x, n, 1.0 / 16, o, 10 + n);
    EXPECT_GE(est.ci_lo, b.lower);
    EXPECT_LE(est.ci_hi, b.upper);
  }
}

TEST(BrinKatok, UniformBernoulliIsLogK) {
  for (int k : {2, 3}) {
    SystemParams p;
    p.k = k;
    p.window = 14;
    p.eps_min = 0.1;
    const SystemModel s(p);
    EntropyOptions eo;
    eo.n_schedule = {1, 2, 3, 4, 5, 6};
    eo.x_samples = 8;
    eo.mass.samples = 20000;
    for (auto bound : {EntropyBound::lower, EntropyBound::upper})
      EXPECT_NEAR(brin_katok(MeasureModel::product_uniform(s), 0.5, bound, eo).value, std::log(double(k)), 0.1);
  }
}

TEST(BrinKatok, GridWithinBracket) {
  const SystemModel s = grid(16);
  EntropyOptions eo;
  eo.n_schedule = {1, 2, 3, 4, 5, 6};
  eo.x_samples = 8;
  eo.mass.method = MassMethod::importance;
  eo.mass.samples = 20000;
  for (auto bound : {EntropyBound::lower, EntropyBound::upper}) {
    const auto e = brin_katok(MeasureModel::product_uniform(s), 1.0 / 16, bound, eo);
    EXPECT_GE(e.value, std::log(4.0));
    EXPECT_LE(e.value, std::log(96.0));
  }
}

TEST(BrinKatok, PointMassIsZero) {
  const SystemModel s = binary();
  EntropyOptions eo;
  eo.n_schedule = {1, 2, 3, 4};
  eo.x_samples = 4;
  eo.mass.samples = 2000;
  const auto e = brin_katok(MeasureModel::point_mass(s, s.make_point({})), 0.5, EntropyBound::upper, eo);
  EXPECT_EQ(e.value, 0.0);
}

TEST(BsEntropy, ConstantPotentials) {
  const SystemModel s = binary();
  const MeasureModel mu = MeasureModel::bernoulli(s, {0.3, 0.7});
  EntropyOptions eo;
  eo.n_schedule = {2, 3, 4, 5, 6};
  eo.x_samples = 8;
  eo.mass.samples = 10000;
  for (auto bound : {EntropyBound::lower, EntropyBound::upper}) {
    const auto bk = brin_katok(mu, 0.5, bound, eo);
    const auto one = bs_entropy(mu, Potential::constant(1.0), 0.5, bound, eo);
    const auto two = bs_entropy(mu, Potential::constant(2.0), 0.5, bound, eo);
    EXPECT_EQ(one.value, bk.value);
    EXPECT_EQ(one.ci_lo, bk.ci_lo);
    EXPECT_EQ(one.ci_hi, bk.ci_hi);
    EXPECT_NEAR(two.value, bk.value / 2, 1e-12);
  }
}

TEST(BsEntropy, TableDividesByIntegral) {
  const SystemModel s = binary();
  const MeasureModel mu = MeasureModel::bernoulli(s, {0.3, 0.7});
  const Potential phi = Potential::coordinate({1.0, 2.0});
  EntropyOptions eo;
  eo.n_schedule = {1, 2, 3, 4, 5, 6, 7, 8};
  eo.x_samples = 32;
  eo.mass.samples = 10000;
  const auto bk = brin_katok(mu, 0.5, EntropyBound::upper, eo);
  const auto bs = bs_entropy(mu, phi, 0.5, EntropyBound::upper, eo);
  EXPECT_NEAR(bs.extrapolated, bk.extrapolated / mu.integral(phi), 0.15 * bk.extrapolated / mu.integral(phi));
}

TEST(Katok, NearlyFullDeficitNeedsOneBall) {
  const SystemModel s = binary(8);
  KatokOptions ko;
  EXPECT_EQ(katok_rn(MeasureModel::product_uniform(s), 3, 0.5, 0.999, ko).count, 1.0);
}

TEST(Katok, RadiusAboveDiameterNeedsOneBall) {
  const SystemModel s = binary(8);
  KatokOptions ko;
  EXPECT_EQ(katok_rn(MeasureModel::product_uniform(s), 3, 5.0, 0.5, ko).count, 1.0);
}

TEST(Katok, OrderThreeMatchesOracle) {
  const SystemModel s = binary(8);
  KatokOptions ko;
  for (double eps : {0.5, 0.9}) {
    const double oracle = oracle_katok(s, 3, eps, 0.5);
    EXPECT_EQ(katok_rn(MeasureModel::product_uniform(s), 3, eps, 0.5, ko).count, oracle) << eps;
    // Balls are strictly smaller than 3-cylinders under the tail terms, so
    // half of the eight cylinders is never enough.
    EXPECT_GT(oracle, 4.0);
  }
  EXPECT_EQ(oracle_katok(s, 3, 0.9, 0.5), 5.0);
}

TEST(Katok, BadDeficitRejected) {
  const SystemModel s = binary(8);
  EXPECT_THROW(katok_rn(MeasureModel::product_uniform(s), 3, 0.5, 1.0, {}), ConfigError);
}

TEST(Katok, UniformBinaryEntropyLogTwo) {
  const SystemModel s = binary(14);
  const auto e = katok_entropy(MeasureModel::product_uniform(s), 0.5, 0.5, {2, 3, 4, 5, 6, 7, 8}, {});
  EXPECT_NEAR(e.value, std::log(2.0), 0.1);
}

TEST(Katok, PointMassIsZero) {
  const SystemModel s = binary(8);
  const auto e = katok_entropy(MeasureModel::point_mass(s, s.make_point({})), 0.5, 0.5, {2, 3, 4}, {});
  EXPECT_EQ(e.value, 0.0);
}

TEST(PsEntropy, HugeEtaIsWholeSpace) {
  const SystemModel s = binary(14);
  PsOptions po;
  po.n_schedule = {2, 3, 4};
  const auto e = ps_entropy(MeasureModel::product_uniform(s), 0.5, 10.0, po);
  EXPECT_NEAR(e.value, std::log(2.0), 1e-9);
}

TEST(PsEntropy, AboveKatokOnUniformBinary) {
  const SystemModel s = binary(16);
  const MeasureModel mu = MeasureModel::product_uniform(s);
  PsOptions po;
  po.n_schedule = {4, 5, 6, 7, 8, 9, 10};
  const auto ps = ps_entropy(mu, 0.5, 0.1, po);
  const auto k = katok_entropy(mu, 0.5, 0.5, {2, 3, 4, 5, 6}, {});
  EXPECT_GE(ps.value, k.value - 0.1);
}

TEST(PsEntropy, FixedPointMeasureIsZero) {
  const SystemModel s = binary(12);
  PsOptions po;
  po.n_schedule = {2, 3, 4, 5};
  const auto e = ps_entropy(MeasureModel::point_mass(s, s.make_point({})), 0.5, 0.05, po);
  EXPECT_TRUE(e.flags.empty());
  EXPECT_NEAR(e.value, 0.0, 1e-12);
}

TEST(PsEntropy, CountsGrowWithEta) {
  const SystemModel s = binary(14);
  PsOptions po;
  po.n_schedule = {4, 6, 8};
  const auto scan = ps_entropy_scan(MeasureModel::bernoulli(s, {0.3, 0.7}), 0.5, {0.3, 0.05, 0.15}, po);
  ASSERT_EQ(scan.per_eta.size(), 3u);
  for (std::size_t i = 1; i < scan.per_eta.size(); ++i) {
    EXPECT_LT(scan.per_eta[i - 1].first, scan.per_eta[i].first);
    for (std::size_t j = 0; j < po.n_schedule.size(); ++j)
      EXPECT_LE(scan.per_eta[i - 1].second.per_scale[j].second, scan.per_eta[i].second.per_scale[j].second);
  }
  EXPECT_TRUE(scan.found);
}

TEST(GenericPoint, ConstantDictionaryAlwaysPasses) {
  const SystemModel s = binary(1000);
  const MeasureModel mu = MeasureModel::bernoulli(s, {0.3, 0.7});
  Rng rng(8);
  EXPECT_TRUE(generic_point_test(s, mu.sample(rng), mu, 1000, 0.01, {Potential::constant(1.0)}));
}

TEST(GenericPoint, FixedPointFailsForUniform) {
  const SystemModel s = binary(64);
  const MeasureModel mu = MeasureModel::product_uniform(s);
  EXPECT_FALSE(generic_point_test(s, s.make_point({}), mu, 32, 0.1, {Potential::coordinate({0.0, 1.0})}));
}

TEST(GenericPoint, DeBruijnWordPasses) {
  const SystemModel s = binary(32);
  const MeasureModel mu = MeasureModel::product_uniform(s);
  const std::vector<int> w = de_bruijn_2_4();
  ASSERT_EQ(w.size(), 16u);
  EXPECT_TRUE(generic_point_test(s, s.make_point(w), mu, 16, 0.1, default_dictionary(s, 16)));
  // The average of coordinate-0 indicators over the full cycle is exact.
  EXPECT_TRUE(generic_point_test(s, s.make_point(w), mu, 16, 0.0, default_dictionary(s, 16)));
}

TEST(Gmu, PointMassGivesZero) {
  SystemFamily fam;
  fam.base.k = 2;
  fam.base.window = 12;
  fam.base.eps_min = 0.1;
  GmuOptions opt;
  opt.tol = 0.05;
  opt.n_schedule = {2, 3, 4};
  opt.bk.n_schedule = {1, 2, 3, 4};
  opt.bk.x_samples = 4;
  opt.bk.mass.samples = 2000;
  opt.ps.n_schedule = {2, 3, 4};
  const auto g = gmu_mdim_estimate(
      fam, [](const SystemModel& s) { return MeasureModel::point_mass(s, s.make_point({})); }, {0.8, 0.4, 0.2}, opt);
  for (const auto* d : {&g.ps, &g.katok, &g.bk_lower, &g.bk_upper, &g.bowen_subset})
    for (double v : d->per_eps) EXPECT_NEAR(v, 0.0, 1e-5);
}
