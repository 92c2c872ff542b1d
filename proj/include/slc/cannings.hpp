#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "slc/partition.hpp"
#include "slc/rng.hpp"
#include "slc/torus.hpp"

namespace slc {

/// Exchangeable offspring law for a colony of size N.
struct OffspringLaw {
  enum class Family { wright_fisher, moran, skewed };
  Family family = Family::wright_fisher;
  double psi = 0.0;      // skewed: fraction of the colony born to one parent
  double epsilon = 0.0;  // skewed: probability of a sweepstakes generation

  static OffspringLaw wright_fisher() { return {}; }
  static OffspringLaw moran() { return {Family::moran, 0.0, 0.0}; }
  static OffspringLaw skewed(double psi, double epsilon) {
    if (!(psi > 0.0 && psi <= 1.0)) throw std::invalid_argument("skewed law needs psi in (0, 1]");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw std::invalid_argument("skewed law needs epsilon in (0, 1]");
    return {Family::skewed, psi, epsilon};
  }

  /// Size of the sweepstakes family, ceil(psi N).
  int jackpot(int N) const { return static_cast<int>(std::ceil(psi * N - 1e-9)); }
};

inline std::string to_string(const OffspringLaw& law) {
  switch (law.family) {
    case OffspringLaw::Family::wright_fisher: return "wright-fisher";
    case OffspringLaw::Family::moran: return "moran";
    case OffspringLaw::Family::skewed:
      return "skewed(" + std::to_string(law.psi) + "," + std::to_string(law.epsilon) + ")";
  }
  return "?";
}

/// Parses `wf`/`wright-fisher`, `moran`, `skewed:PSI:EPS`.
inline OffspringLaw parse_offspring_law(const std::string& text) {
  if (text == "wf" || text == "wright-fisher") return OffspringLaw::wright_fisher();
  if (text == "moran") return OffspringLaw::moran();
  if (text.rfind("skewed:", 0) == 0) {
    const auto rest = text.substr(7);
    const auto colon = rest.find(':');
    if (colon != std::string::npos) {
      try {
        return OffspringLaw::skewed(std::stod(rest.substr(0, colon)), std::stod(rest.substr(colon + 1)));
      } catch (const std::invalid_argument&) {
      }
    }
  }
  throw std::invalid_argument("unknown offspring law '" + text + "' (expected wf, moran, skewed:PSI:EPS)");
}

namespace detail {

// N children choose a parent uniformly among `parents` slots starting at `first`.
template <typename G>
void scatter_uniform(std::vector<int>& nu, int children, int first, int parents, G& rng) {
  for (int c = 0; c < children; ++c) ++nu[first + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(parents)))];
}

}  // namespace detail

/// Offspring numbers (nu_1, ..., nu_N), exchangeable, summing to N.
template <typename G>
std::vector<int> sample_offspring(const OffspringLaw& law, int N, G& rng) {
  if (N < 1) throw std::invalid_argument("colony size must be >= 1");
  std::vector<int> nu(static_cast<std::size_t>(N), 0);
  if (N == 1) {
    nu[0] = 1;
    return nu;
  }
  switch (law.family) {
    case OffspringLaw::Family::wright_fisher:
      detail::scatter_uniform(nu, N, 0, N, rng);
      break;
    case OffspringLaw::Family::moran: {
      std::fill(nu.begin(), nu.end(), 1);
      const auto i = uniform_index(rng, static_cast<std::size_t>(N));
      auto j = uniform_index(rng, static_cast<std::size_t>(N - 1));
      if (j >= i) ++j;
      nu[i] = 2;
      nu[j] = 0;
      break;
    }
    case OffspringLaw::Family::skewed:
      if (uniform01(rng) < law.epsilon) {
        const int k = law.jackpot(N);
        // jackpot parent at slot 0, the rest multinomial over slots 1..N-1, then shuffled
        nu[0] = k;
        detail::scatter_uniform(nu, N - k, 1, N - 1, rng);
        std::swap(nu[0], nu[uniform_index(rng, static_cast<std::size_t>(N))]);
      } else {
        detail::scatter_uniform(nu, N, 0, N, rng);
      }
      break;
  }
  return nu;
}

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;  // 0 for analytic values
};

/// E[(nu_1)_2] for the law at colony size N.
inline double second_factorial_moment(const OffspringLaw& law, int N) {
  if (N < 2) throw std::invalid_argument("c^N needs N >= 2");
  const double n = N;
  const double wf = (n - 1.0) / n;
  switch (law.family) {
    case OffspringLaw::Family::wright_fisher: return wf;
    case OffspringLaw::Family::moran: return 2.0 / n;
    case OffspringLaw::Family::skewed: {
      const double k = law.jackpot(N);
      const double jackpot = k * (k - 1.0) / n + (n - 1.0) / n * (n - k) * (n - k - 1.0) / ((n - 1.0) * (n - 1.0));
      return law.epsilon * jackpot + (1.0 - law.epsilon) * wf;
    }
  }
  return 0.0;
}

/// c^N = E[(nu_1)_2] / (N - 1).
inline double pair_coalescence_prob(const OffspringLaw& law, int N) {
  return second_factorial_moment(law, N) / (N - 1.0);
}

/// Monte Carlo c^N: two distinct children of one generation, do they share a parent?
template <typename G>
Estimate pair_coalescence_prob_mc(const OffspringLaw& law, int N, std::size_t trials, G& rng) {
  if (N < 2) throw std::invalid_argument("c^N needs N >= 2");
  if (trials < 2) throw std::invalid_argument("need >= 2 trials");
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto nu = sample_offspring(law, N, rng);
    // first child: parent l with probability nu_l / N
    auto c = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(N)));
    std::size_t l = 0;
    while (c >= nu[l]) c -= nu[l++];
    // second child among the other N - 1
    hits += uniform_index(rng, static_cast<std::size_t>(N - 1)) < static_cast<std::size_t>(nu[l] - 1);
  }
  const double p = static_cast<double>(hits) / static_cast<double>(trials);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials))};
}

struct MomentRow {
  int N = 0;
  std::string quantity;  // "phi1" (with k) or "phi2_22"
  int k = 0;
  double estimate = 0.0;
  double stderr_ = 0.0;
};

namespace detail {

inline double falling(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x - i;
  return r;
}

}  // namespace detail

/// phi_1(k) = E[(nu_1)_k] / (N^{k-1} c^N) for k = 2..k_max and
/// phi_2(2,2) = E[(nu_1)_2 (nu_2)_2] / (N^2 c^N), estimated from `draws`
/// offspring vectors per N (averaging over all exchangeable positions).
template <typename G>
std::vector<MomentRow> moment_diagnostics(const OffspringLaw& law, const std::vector<int>& Ns, int k_max,
                                          std::size_t draws, G& rng) {
  if (k_max < 2) throw std::invalid_argument("k_max must be >= 2");
  if (draws < 2) throw std::invalid_argument("need >= 2 draws");
  std::vector<MomentRow> rows;
  for (int N : Ns) {
    if (N < 2) throw std::invalid_argument("moment diagnostics need N >= 2");
    const double c = pair_coalescence_prob(law, N);
    const int K = k_max - 1;  // k = 2..k_max, then phi2
    std::vector<double> sum(static_cast<std::size_t>(K + 1), 0.0), sq(static_cast<std::size_t>(K + 1), 0.0);
    for (std::size_t d = 0; d < draws; ++d) {
      const auto nu = sample_offspring(law, N, rng);
      for (int k = 2; k <= k_max; ++k) {
        double s = 0.0;
        for (int v : nu) s += detail::falling(v, k);
        const double x = s / N / (std::pow(static_cast<double>(N), k - 1) * c);
        sum[k - 2] += x;
        sq[k - 2] += x * x;
      }
      // sum over ordered pairs l != m of (nu_l)_2 (nu_m)_2
      double s1 = 0.0, s2 = 0.0;
      for (int v : nu) {
        const double f = detail::falling(v, 2);
        s1 += f;
        s2 += f * f;
      }
      const double x = (s1 * s1 - s2) / (static_cast<double>(N) * (N - 1)) / (static_cast<double>(N) * N * c);
      sum[K] += x;
      sq[K] += x * x;
    }
    const double m = static_cast<double>(draws);
    auto se = [m](double s, double q) { return std::sqrt(std::max(0.0, q / m - (s / m) * (s / m)) / (m - 1.0)); };
    for (int k = 2; k <= k_max; ++k)
      rows.push_back({N, "phi1", k, sum[k - 2] / m, se(sum[k - 2], sq[k - 2])});
    rows.push_back({N, "phi2_22", 2, sum[K] / m, se(sum[K], sq[K])});
  }
  return rows;
}

/// Spatial Cannings model on the sites of a torus: colony sizes N_x, one
/// offspring law per site and a fixed number n_xy of offspring migrating
/// x -> y after each reproduction step.
class CanningsModel {
 public:
  CanningsModel(TorusSpec torus, std::vector<int> sizes, std::vector<OffspringLaw> laws,
                std::vector<std::vector<int>> migrants)
      : torus_(torus), sizes_(std::move(sizes)), laws_(std::move(laws)), migrants_(std::move(migrants)) {
    const std::size_t S = torus_.site_count();
    if (sizes_.size() != S || laws_.size() != S || migrants_.size() != S)
      throw std::invalid_argument("cannings model: one size, law and migration row per site required");
    for (std::size_t x = 0; x < S; ++x) {
      if (sizes_[x] < 1) throw std::invalid_argument("cannings model: colony sizes must be >= 1");
      if (migrants_[x].size() != S) throw std::invalid_argument("cannings model: migration matrix must be square");
      int out = 0;
      for (std::size_t y = 0; y < S; ++y) {
        if (migrants_[x][y] < 0) throw std::invalid_argument("cannings model: negative migrant count");
        if (y != x) out += migrants_[x][y];
      }
      if (out > sizes_[x])
        throw std::invalid_argument("cannings model: site " + std::to_string(x) + " sends more migrants than it holds");
    }
    for (std::size_t x = 0; x < S; ++x) {
      int out = 0, in = 0;
      for (std::size_t y = 0; y < S; ++y)
        if (y != x) {
          out += migrants_[x][y];
          in += migrants_[y][x];
        }
      if (out != in)
        throw std::invalid_argument("cannings model: migration not balanced at site " + std::to_string(x));
    }
  }

  /// One colony of size N, no migration.
  static CanningsModel single_site(int N, OffspringLaw law) { return {TorusSpec(0), {N}, {law}, {{0}}}; }

  /// Same colony size and law everywhere; `per_neighbour` offspring move to
  /// each of the four neighbours every generation.
  static CanningsModel on_torus(TorusSpec torus, int N, OffspringLaw law, int per_neighbour) {
    const std::size_t S = torus.site_count();
    std::vector<std::vector<int>> mig(S, std::vector<int>(S, 0));
    if (S > 1)
      for (std::size_t x = 0; x < S; ++x)
        for (Site y : neighbors(torus.site_at(x), torus)) mig[x][torus.index(y)] += per_neighbour;
    return {torus, std::vector<int>(S, N), std::vector<OffspringLaw>(S, law), std::move(mig)};
  }

  const TorusSpec& torus() const { return torus_; }
  std::size_t site_count() const { return sizes_.size(); }
  int size(std::size_t x) const { return sizes_.at(x); }
  const OffspringLaw& law(std::size_t x) const { return laws_.at(x); }
  int migrants(std::size_t x, std::size_t y) const { return migrants_.at(x).at(y); }

 private:
  TorusSpec torus_;
  std::vector<int> sizes_;
  std::vector<OffspringLaw> laws_;
  std::vector<std::vector<int>> migrants_;
};

struct Individual {
  std::uint32_t site = 0;
  std::uint32_t slot = 0;
  friend bool operator==(const Individual&, const Individual&) = default;
  friend auto operator<=>(const Individual&, const Individual&) = default;
};

/// parents[y][j]: the individual of the previous generation that gave birth
/// to the j-th individual now living at site y.
struct ParentMap {
  std::vector<std::vector<Individual>> parents;
};

/// Reproduction at every site, then n_xy offspring chosen uniformly without
/// replacement move from x to y.
template <typename G>
ParentMap step_generation(const CanningsModel& model, G& rng) {
  const std::size_t S = model.site_count();
  std::vector<std::vector<Individual>> offspring(S);
  for (std::size_t x = 0; x < S; ++x) {
    const auto nu = sample_offspring(model.law(x), model.size(x), rng);
    auto& kids = offspring[x];
    kids.reserve(static_cast<std::size_t>(model.size(x)));
    for (std::size_t l = 0; l < nu.size(); ++l)
      for (int c = 0; c < nu[l]; ++c) kids.push_back({static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(l)});
    std::shuffle(kids.begin(), kids.end(), rng);
  }
  ParentMap map;
  map.parents.resize(S);
  for (std::size_t x = 0; x < S; ++x) {
    // kids are in random order: the leading ones emigrate, the rest stay
    std::size_t pos = 0;
    for (std::size_t y = 0; y < S; ++y) {
      if (y == x) continue;
      for (int c = 0; c < model.migrants(x, y); ++c) map.parents[y].push_back(offspring[x][pos++]);
    }
    map.parents[x].insert(map.parents[x].end(), offspring[x].begin() + static_cast<std::ptrdiff_t>(pos),
                          offspring[x].end());
  }
  for (std::size_t y = 0; y < S; ++y) {
    if (map.parents[y].size() != static_cast<std::size_t>(model.size(y)))
      throw std::logic_error("colony size not conserved at site " + std::to_string(y));
    std::shuffle(map.parents[y].begin(), map.parents[y].end(), rng);
  }
  return map;
}

/// Forward population carrying an ancestry tag per individual.
struct Population {
  std::vector<std::vector<std::uint32_t>> tags;
};

inline Population initial_population(const CanningsModel& model) {
  Population p;
  std::uint32_t next = 0;
  for (std::size_t x = 0; x < model.site_count(); ++x) {
    p.tags.emplace_back();
    for (int j = 0; j < model.size(x); ++j) p.tags.back().push_back(next++);
  }
  return p;
}

/// Children inherit their parent's tag.
inline Population advance(const Population& p, const ParentMap& map) {
  Population next;
  next.tags.resize(map.parents.size());
  for (std::size_t y = 0; y < map.parents.size(); ++y)
    for (const auto& par : map.parents[y]) next.tags[y].push_back(p.tags.at(par.site).at(par.slot));
  return next;
}

template <typename G>
Population step_generation(const CanningsModel& model, const Population& p, G& rng) {
  return advance(p, step_generation(model, rng));
}

struct GenealogyRecord {
  std::size_t generation = 0;  // generations back from the sample
  LabeledPartition partition;
};

struct DiscreteGenealogy {
  LabeledPartition sample;
  /// Partition after every generation in which blocks merged or moved.
  std::vector<GenealogyRecord> changes;
  std::optional<std::size_t> mrca_generation;
  bool complete = false;  // false: max_generations reached first
  std::size_t generations = 0;

  /// Generation of the first merger and the number of blocks it joined.
  std::optional<std::pair<std::size_t, std::size_t>> first_merger() const {
    std::size_t prev = sample.block_count();
    for (const auto& r : changes) {
      if (r.partition.block_count() < prev) return std::make_pair(r.generation, prev - r.partition.block_count() + 1);
      prev = r.partition.block_count();
    }
    return std::nullopt;
  }
};

/// Genealogy of the sample traced back through i.i.d. generations. The
/// blocks of `sample` are distinct individuals of the present generation at
/// their labelled sites. Stops at the MRCA or after max_generations.
template <typename G>
DiscreteGenealogy trace_genealogy(const CanningsModel& model, const LabeledPartition& sample,
                                  std::size_t max_generations, G& rng) {
  validate_labels(sample, model.torus());
  struct Lineage {
    Individual who;
    std::vector<Element> elements;
  };
  std::vector<Lineage> lines;
  std::vector<std::uint32_t> used(model.site_count(), 0);
  for (const auto& b : sample.blocks()) {
    const auto x = static_cast<std::uint32_t>(model.torus().index(b.label));
    if (used[x] >= static_cast<std::uint32_t>(model.size(x)))
      throw std::invalid_argument("sample has more individuals at " + to_string(b.label) + " than the colony holds");
    lines.push_back({{x, used[x]++}, b.elements});
  }
  auto partition = [&] {
    std::vector<LabeledBlock> blocks;
    for (const auto& l : lines) blocks.push_back({l.elements, model.torus().site_at(l.who.site)});
    return LabeledPartition(sample.sample_size(), std::move(blocks));
  };

  DiscreteGenealogy g{sample, {}, std::nullopt, false, 0};
  if (lines.size() <= 1) {
    g.mrca_generation = 0;
    g.complete = true;
  }
  for (std::size_t gen = 1; gen <= max_generations && !g.complete; ++gen) {
    const auto map = step_generation(model, rng);
    bool moved = false;
    for (auto& l : lines) {
      const auto parent = map.parents[l.who.site][l.who.slot];
      moved |= parent.site != l.who.site;
      l.who = parent;
    }
    std::sort(lines.begin(), lines.end(), [](const Lineage& a, const Lineage& b) { return a.who < b.who; });
    std::vector<Lineage> merged;
    for (auto& l : lines) {
      if (!merged.empty() && merged.back().who == l.who) {
        auto& dst = merged.back().elements;
        dst.insert(dst.end(), l.elements.begin(), l.elements.end());
        std::sort(dst.begin(), dst.end());
      } else {
        merged.push_back(std::move(l));
      }
    }
    const bool coalesced = merged.size() < lines.size();
    lines = std::move(merged);
    g.generations = gen;
    if (coalesced || moved) g.changes.push_back({gen, partition()});
    if (lines.size() == 1) {
      g.mrca_generation = gen;
      g.complete = true;
    }
  }
  return g;
}

}  // namespace slc
