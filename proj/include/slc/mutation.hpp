#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "slc/event_log.hpp"
#include "slc/simulator.hpp"

namespace slc {

/// Allele frequency spectrum (a_1, ..., a_n): a_k alleles carried by
/// exactly k sampled individuals.
class Spectrum {
 public:
  Spectrum() = default;
  explicit Spectrum(std::size_t n) : counts_(n, 0) {}
  explicit Spectrum(std::vector<std::uint32_t> a) : counts_(std::move(a)) {}

  /// From killed-size counts indexed by k (entry 0 ignored).
  static Spectrum from_killed(const std::vector<std::uint32_t>& by_size) {
    return Spectrum(std::vector<std::uint32_t>(by_size.begin() + 1, by_size.end()));
  }

  std::size_t n() const { return counts_.size(); }
  std::uint32_t a(std::size_t k) const { return counts_.at(k - 1); }
  void add(std::size_t k) { ++counts_.at(k - 1); }
  const std::vector<std::uint32_t>& counts() const { return counts_; }

  /// sum_k k a_k
  std::size_t weighted_total() const {
    std::size_t s = 0;
    for (std::size_t k = 1; k <= counts_.size(); ++k) s += k * counts_[k - 1];
    return s;
  }
  bool conserves_sample() const { return weighted_total() == n(); }

  friend bool operator==(const Spectrum&, const Spectrum&) = default;

 private:
  std::vector<std::uint32_t> counts_;
};

class conservation_violation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void check_conservation(const Spectrum& s) {
  if (!s.conserves_sample())
    throw conservation_violation("spectrum violates sum k a_k = n (got " + std::to_string(s.weighted_total()) +
                                 ", n = " + std::to_string(s.n()) + ")");
}

struct MutationConfig {
  /// Mutations per lineage per unit of unscaled model time.
  double rate_per_line = 0.0;
};

/// pi / s_L: the scaled mutation rate pi per lineage in rescaled time.
inline double default_mutation_rate(const TorusSpec& spec) {
  return std::numbers::pi / time_scale(spec);
}

/// Infinite-alleles spectrum by the killing scheme: a block hit by a
/// mutation contributes to a_{|block|} and is removed; runs until no block
/// is left. `sink` sees every event, including mutations.
template <typename G, typename Sink = NullSink>
Spectrum run_infinite_alleles(const TorusSpec& torus, const LabeledPartition& initial,
                              const Mechanism& mechanism, const MutationConfig& mcfg, G& rng,
                              Sink&& sink = {}, SimulatorOptions options = {}) {
  if (!(mcfg.rate_per_line > 0.0)) throw std::invalid_argument("mutation rate must be > 0");
  options.mutation_rate = mcfg.rate_per_line;
  SpatialCoalescent sim(torus, mechanism, initial, options);
  const auto st = sim.run_until(rng, [](const SpatialCoalescent&) { return false; }, sink);
  if (st != StepStatus::empty) throw std::logic_error("killing run stopped with live blocks");
  auto s = Spectrum::from_killed(sim.killed_sizes());
  check_conservation(s);
  return s;
}

class invalid_state : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Integral of the block count from 0 to the last event of the log.
inline double total_tree_length(const EventLog& log, bool run_to_mrca = true) {
  if (run_to_mrca && log.terminal.block_count() != 1)
    throw invalid_state("log is not absorbed in a single block");
  ReplayState s(log.initial);
  double prev = 0.0, length = 0.0;
  for (const auto& e : log.events) {
    length += static_cast<double>(s.block_count()) * (e.time - prev);
    prev = e.time;
    s.apply(e);
  }
  return length;
}

struct SpectrumSummary {
  std::vector<double> mean;
  std::vector<double> stderr_;  // standard error of each mean
  std::size_t replicates = 0;
  /// false for a single replicate (stderr reported as 0)
  bool stderr_defined = false;
};

/// Componentwise mean and standard error over replicate spectra.
inline SpectrumSummary mean_spectrum(const std::vector<Spectrum>& spectra) {
  if (spectra.empty()) throw std::invalid_argument("mean of zero spectra");
  const std::size_t n = spectra.front().n();
  for (const auto& s : spectra)
    if (s.n() != n) throw std::invalid_argument("spectra of different sample sizes");
  const auto m = static_cast<double>(spectra.size());
  SpectrumSummary out;
  out.replicates = spectra.size();
  out.mean.assign(n, 0.0);
  out.stderr_.assign(n, 0.0);
  for (const auto& s : spectra)
    for (std::size_t k = 0; k < n; ++k) out.mean[k] += s.counts()[k];
  for (auto& v : out.mean) v /= m;
  if (spectra.size() > 1) {
    out.stderr_defined = true;
    for (std::size_t k = 0; k < n; ++k) {
      double ss = 0.0;
      for (const auto& s : spectra) {
        const double d = s.counts()[k] - out.mean[k];
        ss += d * d;
      }
      out.stderr_[k] = std::sqrt(ss / (m - 1.0) / m);
    }
  }
  return out;
}

}  // namespace slc
