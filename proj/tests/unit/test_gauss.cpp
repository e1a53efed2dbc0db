#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "seqdet/gauss.hpp"

using namespace seqdet;

TEST(NormalCdf, MatchesSeriesOracleOnGrid) {
  for (double x = -8.0; x <= 8.0; x += 0.01) {
    const double ref = oracle::normal_cdf(x);
    EXPECT_NEAR(std_normal_cdf(x), ref, 1e-15 + 1e-12 * ref) << "x=" << x;
  }
}

TEST(NormalCdf, KnownValues) {
  EXPECT_DOUBLE_EQ(std_normal_cdf(0.0), 0.5);
  EXPECT_NEAR(std_normal_cdf(1.0), 0.8413447460685429, 1e-15);
  EXPECT_NEAR(std_normal_cdf(-1.0), 0.15865525393145707, 1e-15);
}

TEST(NormalCdf, SymmetryAndTail) {
  for (double x = 0.0; x <= 30.0; x += 0.25) {
    EXPECT_NEAR(std_normal_cdf(x) + std_normal_cdf(-x), 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(std_normal_sf(x), std_normal_cdf(-x));
  }
  // The upper tail keeps relative precision where 1 - Phi(x) would underflow to 0.
  EXPECT_GT(std_normal_sf(10.0), 7.6e-24);
  EXPECT_LT(std_normal_sf(10.0), 7.7e-24);
}

TEST(NormalCdf, RejectsNonFinite) {
  EXPECT_THROW(std_normal_cdf(NAN), DomainError);
  EXPECT_THROW(std_normal_cdf(INFINITY), DomainError);
}

TEST(NormalMass, AgreesWithDifferencesAndNeverNegative) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-9, 9);
  for (int i = 0; i < 10000; ++i) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    const double m = std_normal_mass(a, b);
    EXPECT_GE(m, 0.0);
    EXPECT_NEAR(m, oracle::normal_cdf(b) - oracle::normal_cdf(a), 2e-15);
  }
  EXPECT_EQ(std_normal_mass(1.0, 1.0), 0.0);
  EXPECT_EQ(std_normal_mass(2.0, 1.0), 0.0);
}

TEST(GaussianModel, MeansAndDensities) {
  GaussianModel m;
  EXPECT_EQ(m.mean(Hypothesis::f), 0.0);
  EXPECT_EQ(m.mean(Hypothesis::g1), -1.0);
  EXPECT_EQ(m.mean(Hypothesis::g2), 1.0);
  EXPECT_THROW(m.mean(Hypothesis::folded_f), DomainError);
  EXPECT_NEAR(m.density(0.3, Hypothesis::g2), oracle::normal_pdf(-0.7), 1e-16);
  EXPECT_THROW(GaussianModel(0.0), DomainError);
  EXPECT_THROW(GaussianModel(-1.0), DomainError);
}

TEST(FoldedDensities, ValuesAtZero) {
  const auto [ff, gg] = folded_densities(0.0);
  EXPECT_NEAR(ff, 0.797885, 1e-6);
  EXPECT_NEAR(gg, 0.483941, 1e-6);
  EXPECT_THROW(folded_densities(-1e-12), DomainError);
}

TEST(FoldedDensities, IntegrateToOne) {
  const double zf = oracle::simpson([](double x) { return folded_densities(x).first; }, 0.0, 12.0, 4000);
  const double zg = oracle::simpson([](double x) { return folded_densities(x).second; }, 0.0, 12.0, 4000);
  EXPECT_NEAR(zf, 1.0, 1e-10);
  EXPECT_NEAR(zg, 1.0, 1e-10);
}

TEST(FoldedDensities, SymmetricMixtureIdentity) {
  GaussianModel m;
  for (double x = 0.0; x <= 6.0; x += 0.05) {
    const auto [ff, gg] = folded_densities(x);
    EXPECT_NEAR(ff, m.density(x, Hypothesis::f) + m.density(-x, Hypothesis::f), 1e-15);
    EXPECT_NEAR(gg, m.density(x, Hypothesis::g1) + m.density(-x, Hypothesis::g1), 1e-15);
    EXPECT_NEAR(gg, m.density(x, Hypothesis::g2) + m.density(-x, Hypothesis::g2), 1e-15);
  }
}

TEST(FoldedMass, MatchesQuadrature) {
  GaussianModel m;
  for (double lam : {0.1, 0.5, 1.2824, 3.0}) {
    const double qf = oracle::simpson([](double x) { return folded_densities(x).first; }, 0.0, lam, 2000);
    const double qg = oracle::simpson([](double x) { return folded_densities(x).second; }, 0.0, lam, 2000);
    EXPECT_NEAR(m.folded_mass(0.0, lam, Hypothesis::folded_f), qf, 1e-12);
    EXPECT_NEAR(m.folded_mass(0.0, lam, Hypothesis::folded_g), qg, 1e-12);
  }
  EXPECT_THROW(m.folded_mass(0.0, 1.0, Hypothesis::f), DomainError);
}

TEST(HypothesisLabels, RoundTrip) {
  for (Hypothesis h : {Hypothesis::f, Hypothesis::g1, Hypothesis::g2, Hypothesis::folded_f, Hypothesis::folded_g})
    EXPECT_EQ(parse_hypothesis(name_of(h)), h);
  EXPECT_THROW(parse_hypothesis("g3"), DomainError);
}
