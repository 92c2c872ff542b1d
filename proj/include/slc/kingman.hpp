#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "slc/event_log.hpp"
#include "slc/mutation.hpp"
#include "slc/partition.hpp"
#include "slc/rng.hpp"
#include "slc/simulator.hpp"
#include "slc/torus.hpp"

namespace slc {

struct KingmanConfig {
  double pair_rate = 1.0;
  double mutation_rate = 0.0;  // per line

  void validate() const {
    if (!(pair_rate > 0.0) || !std::isfinite(pair_rate)) throw std::invalid_argument("pair rate must be > 0");
    if (!(mutation_rate >= 0.0)) throw std::invalid_argument("mutation rate must be >= 0");
  }
};

/// Non-spatial Kingman coalescent from `start` to a single block. All
/// blocks carry the label (0,0) in the returned log.
template <typename G>
EventLog simulate_kingman(const UnlabeledPartition& start, const KingmanConfig& cfg, G& rng) {
  cfg.validate();
  if (cfg.mutation_rate != 0.0) throw std::invalid_argument("event logs require mutation_rate == 0");
  std::vector<LabeledBlock> blocks;
  for (const auto& b : start.blocks()) blocks.push_back({b, Site{0, 0}});
  const LabeledPartition initial(start.sample_size(), blocks);
  EventLog log{initial, {}, initial};

  // ids are the minimal elements; the merged block keeps the smaller one
  std::vector<Element> ids;
  for (const auto& b : blocks) ids.push_back(b.min());
  double t = 0.0;
  while (ids.size() > 1) {
    const double b = static_cast<double>(ids.size());
    t += exponential(rng, cfg.pair_rate * b * (b - 1.0) / 2.0);
    const auto pair = sample_subset(static_cast<int>(ids.size()), 2, rng);
    Event e{t, EventKind::merge, {ids[pair[0]], ids[pair[1]]}, Site{0, 0}, Site{0, 0}};
    std::sort(e.blocks.begin(), e.blocks.end());
    ids.erase(std::find(ids.begin(), ids.end(), e.blocks[1]));
    log.events.push_back(std::move(e));
  }
  log.terminal = replay(log.initial, log.events);
  return log;
}

/// Kingman coalescent with killing, started from blocks of the given sizes;
/// killed block sizes are added to `out`. Used on its own (reference runs)
/// and as the second phase of the hybrid.
template <typename G>
void kingman_killing(std::vector<std::size_t> sizes, const KingmanConfig& cfg, G& rng, Spectrum& out) {
  cfg.validate();
  if (!(cfg.mutation_rate > 0.0)) throw std::invalid_argument("killing needs mutation_rate > 0");
  while (!sizes.empty()) {
    const double b = static_cast<double>(sizes.size());
    const double coal = cfg.pair_rate * b * (b - 1.0) / 2.0;
    const double kill = cfg.mutation_rate * b;
    if (uniform01(rng) * (coal + kill) < coal) {
      const auto pair = sample_subset(static_cast<int>(sizes.size()), 2, rng);
      sizes[pair[0]] += sizes[pair[1]];
      sizes.erase(sizes.begin() + pair[1]);
    } else {
      const auto i = uniform_index(rng, sizes.size());
      out.add(sizes[i]);
      sizes.erase(sizes.begin() + static_cast<std::ptrdiff_t>(i));
    }
  }
}

/// Spectrum of n singletons under Kingman + killing.
template <typename G>
Spectrum kingman_spectrum(std::size_t n, const KingmanConfig& cfg, G& rng) {
  Spectrum s(n);
  kingman_killing(std::vector<std::size_t>(n, 1), cfg, rng, s);
  check_conservation(s);
  return s;
}

/// Total tree length of the Kingman coalescent on n singletons: sum of k U_k.
template <typename G>
double kingman_tree_length(std::size_t n, double pair_rate, G& rng) {
  double len = 0.0;
  for (std::size_t k = n; k >= 2; --k) {
    const double b = static_cast<double>(k);
    len += b * exponential(rng, pair_rate * b * (b - 1.0) / 2.0);
  }
  return len;
}

enum class EwensMethod { formula, monte_carlo };

struct ExpectedSpectrum {
  std::vector<double> mean;    // E[a_k], k = 1..n
  std::vector<double> stderr_;  // zero for the formula
};

/// E[a_k] under infinite alleles with scaled rate theta (theta/2 per line,
/// pair rate 1):
///   E[a_k] = (theta/k) n!/(n-k)! Gamma(theta+n-k)/Gamma(theta+n).
template <typename G>
ExpectedSpectrum ewens_expected_spectrum(std::size_t n, double theta, EwensMethod method, G& rng,
                                         std::size_t replicates = 100000) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(theta > 0.0)) throw std::invalid_argument("theta must be > 0");
  ExpectedSpectrum out;
  if (method == EwensMethod::formula) {
    const double nd = static_cast<double>(n);
    for (std::size_t k = 1; k <= n; ++k) {
      const double kd = static_cast<double>(k);
      const double lg = std::lgamma(nd + 1.0) - std::lgamma(nd - kd + 1.0) + std::lgamma(theta + nd - kd) -
                        std::lgamma(theta + nd);
      out.mean.push_back(theta / kd * std::exp(lg));
    }
    out.stderr_.assign(n, 0.0);
    return out;
  }
  if (replicates < 2) throw std::invalid_argument("monte-carlo needs >= 2 replicates");
  const KingmanConfig cfg{1.0, theta / 2.0};
  std::vector<Spectrum> runs;
  runs.reserve(replicates);
  for (std::size_t r = 0; r < replicates; ++r) runs.push_back(kingman_spectrum(n, cfg, rng));
  auto m = mean_spectrum(runs);
  out.mean = std::move(m.mean);
  out.stderr_ = std::move(m.stderr_);
  return out;
}

struct HybridResult {
  Spectrum spectrum;
  /// Blocks alive when the spatial phase stopped (0 or 1: approximation unused).
  std::size_t handoff_blocks = 0;
  bool used_approximation = false;
  double handoff_clock = 0.0;
  std::uint64_t spatial_events = 0;
};

/// Spatial phase with killing until every pair of live blocks is at least
/// `threshold` apart (or at most one block is left), then a non-spatial
/// Kingman phase with pair rate pi/s_L and the same per-line mutation rate.
template <typename G, typename Sink = NullSink>
HybridResult hybrid_run(const TorusSpec& torus, const LabeledPartition& initial, const Mechanism& mechanism,
                        double threshold, const MutationConfig& mcfg, G& rng, Sink&& sink = {},
                        SimulatorOptions options = {}) {
  const double diameter = std::sqrt(2.0) * torus.half_side();
  if (!(threshold >= 0.0) || threshold > diameter)
    throw std::invalid_argument("hybrid threshold must lie in [0, sqrt(2) L]");
  if (!(mcfg.rate_per_line > 0.0)) throw std::invalid_argument("mutation rate must be > 0");
  options.mutation_rate = mcfg.rate_per_line;
  SpatialCoalescent sim(torus, mechanism, initial, options);
  auto handoff = [threshold](const SpatialCoalescent& s) {
    return s.block_count() <= 1 || s.all_pairwise_at_least(threshold);
  };
  sim.run_until(rng, handoff, sink);

  HybridResult out;
  out.handoff_blocks = sim.block_count();
  out.handoff_clock = sim.clock();
  out.spatial_events = sim.event_count();
  out.used_approximation = out.handoff_blocks >= 2;
  out.spectrum = Spectrum::from_killed(sim.killed_sizes());
  // a lone survivor is only ever killed; no need for either phase
  std::vector<std::size_t> sizes;
  for (const auto& b : sim.live_blocks()) sizes.push_back(b.elements.size());
  if (!sizes.empty()) {
    const KingmanConfig kcfg{std::numbers::pi / time_scale(torus), mcfg.rate_per_line};
    kingman_killing(std::move(sizes), kcfg, rng, out.spectrum);
  }
  check_conservation(out.spectrum);
  return out;
}

struct QQPoint {
  std::size_t index = 0;
  double a = 0.0;
  double b = 0.0;
};

namespace detail {

// Quantile at level p in (0,1) of a sorted sample, plotting position (i+0.5)/n.
inline double interpolated_quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size()) - 0.5;
  if (pos <= 0.0) return sorted.front();
  const auto last = static_cast<double>(sorted.size() - 1);
  if (pos >= last) return sorted.back();
  const auto i = static_cast<std::size_t>(pos);
  const double f = pos - static_cast<double>(i);
  return sorted[i] + f * (sorted[i + 1] - sorted[i]);
}

}  // namespace detail

/// Paired order statistics; the longer sample is interpolated at the
/// plotting positions of the shorter one.
inline std::vector<QQPoint> qq_data(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("q-q data needs two nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t m = std::min(a.size(), b.size());
  std::vector<QQPoint> out(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(m);
    out[i] = {i, a.size() == m ? a[i] : detail::interpolated_quantile(a, p),
              b.size() == m ? b[i] : detail::interpolated_quantile(b, p)};
  }
  return out;
}

}  // namespace slc
