#include <gtest/gtest.h>

#include <numeric>

#include "slc/cannings.hpp"
#include "slc/stats.hpp"

using namespace slc;

namespace {

const std::vector<OffspringLaw> kLaws{OffspringLaw::wright_fisher(), OffspringLaw::moran(),
                                      OffspringLaw::skewed(0.5, 0.5), OffspringLaw::skewed(0.1, 1.0)};

bool coarser(const LabeledPartition& fine, const LabeledPartition& coarse) {
  for (const auto& b : fine.blocks()) {
    bool inside = false;
    for (const auto& c : coarse.blocks())
      inside |= std::includes(c.elements.begin(), c.elements.end(), b.elements.begin(), b.elements.end());
    if (!inside) return false;
  }
  return true;
}

}  // namespace

TEST(Offspring, SumIsColonySize) {
  Rng rng(1);
  for (const auto& law : kLaws)
    for (int N : {1, 2, 3, 10, 57})
      for (int i = 0; i < 200; ++i) {
        const auto nu = sample_offspring(law, N, rng);
        EXPECT_EQ(static_cast<int>(nu.size()), N);
        EXPECT_EQ(std::accumulate(nu.begin(), nu.end(), 0), N) << to_string(law);
        for (int v : nu) EXPECT_GE(v, 0);
      }
  EXPECT_THROW(sample_offspring(OffspringLaw::moran(), 0, rng), std::invalid_argument);
}

TEST(Offspring, MoranIsPermutationOfTwoOneZero) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    auto nu = sample_offspring(OffspringLaw::moran(), 3, rng);
    std::sort(nu.begin(), nu.end());
    EXPECT_EQ(nu, (std::vector<int>{0, 1, 2}));
  }
}

TEST(Offspring, WrightFisherMeanOne) {
  Rng rng(3);
  std::vector<double> first;
  for (int i = 0; i < 100000; ++i) first.push_back(sample_offspring(OffspringLaw::wright_fisher(), 20, rng)[0]);
  const auto m = stats::mean_se(first);
  EXPECT_LE(std::abs(m.mean - 1.0), 4 * m.se);
}

TEST(Offspring, SkewedJackpot) {
  Rng rng(4);
  const auto law = OffspringLaw::skewed(0.5, 1.0);
  EXPECT_EQ(law.jackpot(10), 5);
  EXPECT_EQ(OffspringLaw::skewed(0.25, 1.0).jackpot(10), 3);
  for (int i = 0; i < 500; ++i) {
    const auto nu = sample_offspring(law, 10, rng);
    EXPECT_GE(*std::max_element(nu.begin(), nu.end()), 5);
  }
  EXPECT_THROW(OffspringLaw::skewed(0.0, 0.5), std::invalid_argument);
  EXPECT_THROW(OffspringLaw::skewed(0.5, 1.5), std::invalid_argument);
}

TEST(Offspring, Parse) {
  EXPECT_EQ(parse_offspring_law("wf").family, OffspringLaw::Family::wright_fisher);
  EXPECT_EQ(parse_offspring_law("moran").family, OffspringLaw::Family::moran);
  const auto s = parse_offspring_law("skewed:0.3:0.2");
  EXPECT_DOUBLE_EQ(s.psi, 0.3);
  EXPECT_DOUBLE_EQ(s.epsilon, 0.2);
  EXPECT_THROW(parse_offspring_law("skewed:0.3"), std::invalid_argument);
  EXPECT_THROW(parse_offspring_law("poisson"), std::invalid_argument);
}

TEST(Offspring, Exchangeable) {
  // joint law of (nu_1, nu_2) is symmetric
  Rng rng(5);
  for (const auto& law : kLaws) {
    const int N = 6;
    std::vector<std::vector<double>> table(N + 1, std::vector<double>(N + 1, 0.0));
    std::vector<double> pos(N, 0.0);
    for (int i = 0; i < 100000; ++i) {
      const auto nu = sample_offspring(law, N, rng);
      table[nu[0]][nu[1]] += 1.0;
      for (int j = 0; j < N; ++j) pos[j] += nu[j];
    }
    EXPECT_GT(stats::symmetry_test_p_value(table), 1e-4) << to_string(law);
    for (int j = 0; j < N; ++j) EXPECT_NEAR(pos[j] / 100000, 1.0, 0.03) << to_string(law) << " slot " << j;
  }
}

TEST(PairCoalescence, Analytic) {
  EXPECT_DOUBLE_EQ(pair_coalescence_prob(OffspringLaw::wright_fisher(), 10), 0.1);
  EXPECT_DOUBLE_EQ(pair_coalescence_prob(OffspringLaw::moran(), 10), 2.0 / 90.0);
  // skewed, N = 10, psi = 0.5, eps = 1: K = 5
  const double k = 5, n = 10;
  const double want = (k * (k - 1) / n + (n - 1) / n * (n - k) * (n - k - 1) / ((n - 1) * (n - 1))) / (n - 1);
  EXPECT_DOUBLE_EQ(pair_coalescence_prob(OffspringLaw::skewed(0.5, 1.0), 10), want);
  EXPECT_THROW(pair_coalescence_prob(OffspringLaw::moran(), 1), std::invalid_argument);
}

TEST(PairCoalescence, MonteCarloMatchesAnalytic) {
  Rng rng(6);
  for (const auto& law : kLaws)
    for (int N : {5, 40}) {
      const auto e = pair_coalescence_prob_mc(law, N, 200000, rng);
      EXPECT_LE(std::abs(e.value - pair_coalescence_prob(law, N)), 4 * e.stderr_ + 1e-12) << to_string(law) << " N=" << N;
    }
}

TEST(Moments, MoranHasNoTriples) {
  Rng rng(7);
  for (const auto& r : moment_diagnostics(OffspringLaw::moran(), {10, 50}, 4, 1000, rng))
    if (r.quantity == "phi1" && r.k >= 3) { EXPECT_EQ(r.estimate, 0.0); }
}

TEST(Moments, WrightFisherTriplesVanish) {
  Rng rng(8);
  const auto rows = moment_diagnostics(OffspringLaw::wright_fisher(), {50, 100, 200, 400}, 3, 4000, rng);
  std::vector<double> phi3;
  for (const auto& r : rows)
    if (r.quantity == "phi1" && r.k == 3) {
      phi3.push_back(r.estimate);
      // E[(nu)_3] = (N)_3 / N^3 and c^N = 1/N
      const double N = r.N;
      EXPECT_LE(std::abs(r.estimate - (N - 1) * (N - 2) / (N * N * N)), 5 * r.stderr_ + 1e-12);
    }
  ASSERT_EQ(phi3.size(), 4u);
  for (std::size_t i = 1; i < phi3.size(); ++i) EXPECT_LT(phi3[i], phi3[i - 1]);
}

TEST(Moments, SkewedTriplesPersist) {
  Rng rng(9);
  const auto rows = moment_diagnostics(OffspringLaw::skewed(0.5, 0.5), {100, 400}, 3, 4000, rng);
  for (const auto& r : rows)
    if (r.quantity == "phi1" && r.k == 3) { EXPECT_GT(r.estimate, 0.1) << r.N; }
  for (const auto& r : rows)
    if (r.quantity == "phi1" && r.k == 2) { EXPECT_LE(std::abs(r.estimate - 1.0), 5 * r.stderr_ + 1e-9); }
}

TEST(Model, Validation) {
  EXPECT_NO_THROW(CanningsModel::on_torus(TorusSpec(1), 10, OffspringLaw::wright_fisher(), 1));
  EXPECT_THROW(CanningsModel::on_torus(TorusSpec(1), 3, OffspringLaw::wright_fisher(), 1), std::invalid_argument);
  // unbalanced: site 0 sends one to site 1, nothing comes back
  std::vector<std::vector<int>> mig(9, std::vector<int>(9, 0));
  mig[0][1] = 1;
  EXPECT_THROW(CanningsModel(TorusSpec(1), std::vector<int>(9, 5), std::vector<OffspringLaw>(9), mig),
               std::invalid_argument);
  EXPECT_THROW(CanningsModel(TorusSpec(1), std::vector<int>(8, 5), std::vector<OffspringLaw>(9),
                             std::vector<std::vector<int>>(9, std::vector<int>(9, 0))),
               std::invalid_argument);
  EXPECT_THROW(CanningsModel::single_site(0, OffspringLaw::moran()), std::invalid_argument);
}

TEST(Model, GenerationConservesColonies) {
  Rng rng(10);
  const auto model = CanningsModel::on_torus(TorusSpec(1), 12, OffspringLaw::skewed(0.5, 0.5), 2);
  auto pop = initial_population(model);
  for (int g = 0; g < 50; ++g) {
    pop = step_generation(model, pop, rng);
    for (std::size_t x = 0; x < model.site_count(); ++x) EXPECT_EQ(pop.tags[x].size(), 12u);
  }
}

TEST(Model, OneGenerationPairCoalescence) {
  Rng rng(11);
  const auto model = CanningsModel::single_site(10, OffspringLaw::wright_fisher());
  const int trials = 100000;
  int same = 0;
  for (int i = 0; i < trials; ++i) {
    const auto map = step_generation(model, rng);
    same += map.parents[0][0] == map.parents[0][1];
  }
  EXPECT_LE(std::abs(stats::binomial_z(same, trials, 0.1)), 4.0);
}

TEST(Genealogy, MoranPairTime) {
  // mean time to the MRCA of two lineages is 1 / c^N = 45 generations
  Rng rng(12);
  const auto model = CanningsModel::single_site(10, OffspringLaw::moran());
  const auto sample = singletons(2, {Site{0, 0}, Site{0, 0}});
  std::vector<double> t;
  for (int i = 0; i < 20000; ++i) t.push_back(static_cast<double>(*trace_genealogy(model, sample, 100000, rng).mrca_generation));
  const auto m = stats::mean_se(t);
  EXPECT_LE(std::abs(m.mean - 45.0), 4 * m.se);
}

TEST(Genealogy, OnlyCoarsens) {
  Rng rng(13);
  const auto model = CanningsModel::on_torus(TorusSpec(1), 8, OffspringLaw::skewed(0.5, 0.5), 1);
  const auto sample = singletons(5, {Site{0, 0}, Site{0, 0}, Site{1, 0}, Site{0, 1}, Site{-1, -1}});
  for (int i = 0; i < 100; ++i) {
    const auto g = trace_genealogy(model, sample, 100000, rng);
    ASSERT_TRUE(g.complete);
    LabeledPartition prev = sample;
    std::size_t gen = 0;
    for (const auto& r : g.changes) {
      EXPECT_GT(r.generation, gen);
      EXPECT_TRUE(coarser(prev, r.partition));
      EXPECT_NO_THROW(validate_labels(r.partition, model.torus()));
      prev = r.partition;
      gen = r.generation;
    }
    EXPECT_EQ(prev.block_count(), 1u);
    EXPECT_EQ(*g.mrca_generation, gen);
  }
}

TEST(Genealogy, TrivialAndErrors) {
  Rng rng(14);
  const auto model = CanningsModel::single_site(3, OffspringLaw::wright_fisher());
  const auto g = trace_genealogy(model, singletons(1, {Site{0, 0}}), 10, rng);
  EXPECT_TRUE(g.complete);
  EXPECT_EQ(*g.mrca_generation, 0u);
  EXPECT_FALSE(g.first_merger());
  EXPECT_THROW(trace_genealogy(model, singletons(4, std::vector<Site>(4, Site{0, 0})), 10, rng),
               std::invalid_argument);
  const auto capped = trace_genealogy(CanningsModel::single_site(1000, OffspringLaw::moran()),
                                      singletons(2, {Site{0, 0}, Site{0, 0}}), 1, rng);
  EXPECT_EQ(capped.generations, 1u);
}
