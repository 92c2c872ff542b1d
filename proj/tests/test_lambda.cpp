#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "slc/lambda.hpp"
#include "slc/rng.hpp"

using namespace slc;

namespace {

std::vector<LambdaMeasure> measures() {
  return {LambdaMeasure::kingman(),
          LambdaMeasure::bolthausen_sznitman(),
          LambdaMeasure::beta(0.5, 1.5),
          LambdaMeasure::beta(2.0, 3.0, 0.7),
          LambdaMeasure::point_mass(1.0),
          LambdaMeasure::point_mass(0.3, 2.0),
          LambdaMeasure(0.4, BetaDensity{1.0, 1.0, 0.6}),
          LambdaMeasure::tabulated([](double z) { return 6.0 * z * (1.0 - z); }),
          LambdaMeasure::tabulated([](double z) { return 1.0 + std::sin(3.0 * z); }, 0.25)};
}

}  // namespace

TEST(MergeRate, Kingman) {
  const auto m = LambdaMeasure::kingman();
  for (int b = 2; b <= 10; ++b) {
    EXPECT_EQ(merge_rate(m, b, 2), 1.0);
    for (int k = 3; k <= b; ++k) EXPECT_EQ(merge_rate(m, b, k), 0.0);
  }
}

TEST(MergeRate, BolthausenSznitman) {
  const auto m = LambdaMeasure::bolthausen_sznitman();
  EXPECT_DOUBLE_EQ(merge_rate(m, 2, 2), 1.0);
  EXPECT_DOUBLE_EQ(merge_rate(m, 3, 3), 0.5);
  EXPECT_DOUBLE_EQ(merge_rate(m, 3, 2), 0.5);
  // closed form B(k-1, b-k+1) = (k-2)!(b-k)!/(b-1)!
  for (int b = 2; b <= 12; ++b)
    for (int k = 2; k <= b; ++k)
      EXPECT_NEAR(merge_rate(m, b, k), std::tgamma(k - 1) * std::tgamma(b - k + 1) / std::tgamma(b), 1e-13);
}

TEST(MergeRate, PointMassAtOne) {
  const auto m = LambdaMeasure::point_mass(1.0);
  for (int b = 2; b <= 8; ++b)
    for (int k = 2; k <= b; ++k) EXPECT_EQ(merge_rate(m, b, k), k == b ? 1.0 : 0.0);
}

TEST(MergeRate, BetaClosedFormMatchesQuadrature) {
  for (auto [a, bb] : {std::pair{0.5, 1.5}, {1.0, 1.0}, {2.0, 3.0}, {1.5, 0.7}}) {
    const auto closed = LambdaMeasure::beta(a, bb, 1.3);
    const double norm = std::exp(std::lgamma(a) + std::lgamma(bb) - std::lgamma(a + bb));
    const auto quad = LambdaMeasure::tabulated(
        [a = a, bb = bb, norm](double z) { return 1.3 * std::pow(z, a - 1) * std::pow(1 - z, bb - 1) / norm; });
    for (int b = 2; b <= 10; ++b)
      for (int k = 2; k <= b; ++k) {
        // endpoint singularities (a or b < 1) limit quadrature accuracy
        const double tol = (a < 1 && k == 2) || (bb < 1 && k == b) ? 2e-3 : 1e-8;
        EXPECT_NEAR(merge_rate(closed, b, k), merge_rate(quad, b, k), tol) << a << "," << bb << " b=" << b << " k=" << k;
      }
  }
}

TEST(MergeRate, Errors) {
  const auto m = LambdaMeasure::kingman();
  EXPECT_THROW(merge_rate(m, 3, 1), std::invalid_argument);
  EXPECT_THROW(merge_rate(m, 3, 4), std::invalid_argument);
  EXPECT_THROW(LambdaMeasure::beta(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(LambdaMeasure::point_mass(0.0), std::invalid_argument);
  EXPECT_THROW(LambdaMeasure::point_mass(1.5), std::invalid_argument);
  EXPECT_THROW(LambdaMeasure(0.0, NoDensity{}), std::invalid_argument);
  EXPECT_THROW(LambdaMeasure(-1.0, BetaDensity{}), std::invalid_argument);
}

TEST(MergeRate, PitmanConsistency) {
  for (const auto& m : measures()) {
    const bool quad = std::holds_alternative<TabulatedDensity>(m.density());
    for (int b = 2; b <= 20; ++b)
      for (int k = 2; k <= b; ++k) {
        const double lhs = merge_rate(m, b, k);
        const double rhs = merge_rate(m, b + 1, k) + merge_rate(m, b + 1, k + 1);
        EXPECT_NEAR(lhs, rhs, quad ? 1e-8 : 1e-12 * std::max(1.0, lhs)) << "b=" << b << " k=" << k;
        EXPECT_GE(lhs, 0.0);
      }
  }
}

TEST(MergeRate, ScalingLinearity) {
  for (const auto& m : measures()) {
    const auto s = m.scaled(2.5);
    for (int b = 2; b <= 9; ++b)
      for (int k = 2; k <= b; ++k) EXPECT_NEAR(merge_rate(s, b, k), 2.5 * merge_rate(m, b, k), 1e-9);
  }
}

TEST(TotalRate, Examples) {
  EXPECT_DOUBLE_EQ(total_merge_rate(LambdaMeasure::kingman(), 4), 6.0);
  for (const auto& m : measures()) {
    EXPECT_EQ(total_merge_rate(m, 1), 0.0);
    EXPECT_EQ(total_merge_rate(m, 0), 0.0);
  }
  EXPECT_DOUBLE_EQ(total_merge_rate(LambdaMeasure::bolthausen_sznitman(), 3), 2.0);
}

TEST(RateTable, MatchesDirect) {
  const auto m = LambdaMeasure::beta(1.2, 0.8);
  const MergeRateTable t(m, 12);
  for (int b = 2; b <= 12; ++b) {
    EXPECT_NEAR(t.total(b), total_merge_rate(m, b), 1e-12);
    for (int k = 2; k <= b; ++k) EXPECT_EQ(t.rate(b, k), merge_rate(m, b, k));
  }
  EXPECT_EQ(t.total(1), 0.0);
}

TEST(SampleMerge, TwoBlocks) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto d = sample_merge(LambdaMeasure::bolthausen_sznitman(), 2, rng);
    ASSERT_TRUE(d);
    EXPECT_EQ(d->k, 2);
    EXPECT_EQ(d->subset, (std::vector<int>{0, 1}));
  }
  EXPECT_FALSE(sample_merge(LambdaMeasure::kingman(), 1, rng));
}

TEST(SampleMerge, KingmanPairsUniform) {
  Rng rng(2);
  const int draws = 200000;
  std::map<std::vector<int>, int> freq;
  for (int i = 0; i < draws; ++i) {
    const auto d = sample_merge(LambdaMeasure::kingman(), 5, rng);
    ASSERT_EQ(d->k, 2);
    ++freq[d->subset];
  }
  EXPECT_EQ(freq.size(), 10u);
  const double p = 0.1, se = std::sqrt(p * (1 - p) / draws);
  for (const auto& [s, c] : freq) EXPECT_LE(std::abs(c / double(draws) - p), 4 * se);
}

TEST(SampleMerge, SizeLaw) {
  // 10^6 draws of k for several measures, each k within 4 binomial sigma
  Rng rng(5);
  for (const auto& m : {LambdaMeasure::bolthausen_sznitman(), LambdaMeasure::beta(0.5, 1.5), LambdaMeasure::point_mass(0.4)}) {
    const int b = 7;
    const MergeRateTable t(m, b);
    std::vector<int> count(b + 1, 0);
    const int draws = 1000000;
    for (int i = 0; i < draws; ++i) ++count[*t.sample_size(b, rng)];
    for (int k = 2; k <= b; ++k) {
      const double p = detail::binomial(b, k) * t.rate(b, k) / t.total(b);
      EXPECT_LE(std::abs(count[k] / double(draws) - p), 4 * std::sqrt(p * (1 - p) / draws) + 1e-12) << "k=" << k;
    }
  }
  // uniform b=3: P(k=3) = 1/4
  Rng rng2(6);
  int triples = 0;
  const int draws = 400000;
  for (int i = 0; i < draws; ++i) triples += sample_merge(LambdaMeasure::bolthausen_sznitman(), 3, rng2)->k == 3;
  EXPECT_LE(std::abs(triples / double(draws) - 0.25), 4 * std::sqrt(0.25 * 0.75 / draws));
}

TEST(SampleSubset, UniformAndSorted) {
  Rng rng(8);
  std::map<std::vector<int>, int> freq;
  const int draws = 120000;
  for (int i = 0; i < draws; ++i) {
    auto s = sample_subset(5, 3, rng);
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    EXPECT_EQ(std::set<int>(s.begin(), s.end()).size(), 3u);
    ++freq[s];
  }
  EXPECT_EQ(freq.size(), 10u);
  for (const auto& [s, c] : freq) EXPECT_LE(std::abs(c / double(draws) - 0.1), 4 * std::sqrt(0.09 / draws));
}

TEST(Mechanism, Parse) {
  EXPECT_FALSE(parse_mechanism("kingman").instantaneous());
  EXPECT_TRUE(parse_mechanism("crw").instantaneous());
  EXPECT_DOUBLE_EQ(merge_rate(parse_mechanism("bs").measure, 3, 3), 0.5);
  EXPECT_DOUBLE_EQ(parse_mechanism("beta:1:1:2").measure.total_mass(), 2.0);
  EXPECT_DOUBLE_EQ(merge_rate(parse_mechanism("pointmass:1").measure, 4, 4), 1.0);
  for (const char* bad : {"", "kingmann", "beta:1", "beta:x:1", "pointmass:2", "beta:1:1:1:1", "crw:1"})
    EXPECT_THROW(parse_mechanism(bad), std::invalid_argument) << bad;
}
