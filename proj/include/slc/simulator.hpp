#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "slc/event_log.hpp"
#include "slc/lambda.hpp"
#include "slc/partition.hpp"
#include "slc/rng.hpp"
#include "slc/torus.hpp"

namespace slc {

struct SimulatorOptions {
  /// Per-block kill rate (infinite-alleles mutation); 0 disables mutation.
  double mutation_rate = 0.0;
  /// Test harness switch: blocks never merge when false.
  bool merges_enabled = true;
  std::uint64_t max_events = 1'000'000'000;
  std::size_t max_sample_size = 64;
};

enum class StepStatus { event, absorbed, empty };

class RunawaySimulation : public std::runtime_error {
 public:
  explicit RunawaySimulation(const std::string& what, std::optional<EventLog> partial = std::nullopt)
      : std::runtime_error(what), partial_log(std::move(partial)) {}
  std::optional<EventLog> partial_log;
};

struct NullSink {
  void operator()(const Event&) const noexcept {}
};

struct RecordingSink {
  std::vector<Event>* events;
  void operator()(const Event& e) const { events->push_back(e); }
};

/// Exact-event simulation of the spatial Lambda-coalescent on a torus
/// (and of the instantaneously coalescing random walk).
///
/// Each block migrates at total rate 1 (1/4 per neighbour); blocks sharing
/// a site merge per the Lambda rates; with a mutation rate every block is
/// killed at that rate and its size recorded in the allele spectrum. The
/// clock is unscaled model time.
class SpatialCoalescent {
 public:
  SpatialCoalescent(const TorusSpec& torus, Mechanism mechanism, const LabeledPartition& initial,
                    SimulatorOptions options = {})
      : torus_(torus),
        mechanism_(std::move(mechanism)),
        options_(options),
        n_(initial.sample_size()),
        rates_(mechanism_.measure, static_cast<int>(std::max<std::size_t>(initial.block_count(), 2))),
        migration_rate_(migration_rate(torus)) {
    if (n_ > options_.max_sample_size)
      throw std::invalid_argument("sample size " + std::to_string(n_) + " exceeds limit " +
                                  std::to_string(options_.max_sample_size));
    if (!(options_.mutation_rate >= 0.0)) throw std::invalid_argument("mutation rate must be >= 0");
    validate_labels(initial, torus_);

    head_.assign(torus_.site_count(), -1);
    count_.assign(torus_.site_count(), 0);
    spectrum_.assign(n_ + 1, 0);
    slots_.reserve(initial.block_count());
    for (const auto& b : initial.blocks()) {
      const int id = static_cast<int>(slots_.size());
      slots_.push_back(Slot{b.elements, b.label, torus_.index(b.label), -1, -1, -1});
      live_add(id);
      site_insert(id);
    }
  }

  const TorusSpec& torus() const { return torus_; }
  const Mechanism& mechanism() const { return mechanism_; }
  const SimulatorOptions& options() const { return options_; }
  std::size_t sample_size() const { return n_; }
  double clock() const { return clock_; }
  std::size_t block_count() const { return live_.size(); }
  std::uint64_t event_count() const { return events_; }
  /// Integral of the block count over time so far.
  double lineage_time() const { return lineage_time_; }
  /// a_k counts of killed blocks, indexed by k (entry 0 unused).
  const std::vector<std::uint32_t>& killed_sizes() const { return spectrum_; }

  std::vector<LabeledBlock> live_blocks() const {
    std::vector<LabeledBlock> out;
    out.reserve(live_.size());
    for (int id : live_) out.push_back({slots_[id].members, slots_[id].site});
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.min() < b.min(); });
    return out;
  }

  LabeledPartition partition() const {
    if (killed_ > 0) throw std::logic_error("partition unavailable after mutation killed blocks");
    return LabeledPartition(n_, live_blocks());
  }

  double migration_total() const { return static_cast<double>(live_.size()) * migration_rate_; }
  double merge_total() const {
    if (mechanism_.instantaneous() || !options_.merges_enabled) return 0.0;
    double s = 0.0;
    for (std::uint32_t site : hot_) s += rates_.total(count_[site]);
    return s;
  }
  double mutation_total() const { return static_cast<double>(live_.size()) * options_.mutation_rate; }
  double total_rate() const { return migration_total() + merge_total() + mutation_total(); }

  /// Smallest squared torus distance between two live blocks (-1 if < 2 blocks).
  long long min_pairwise_distance_sq() const {
    long long best = -1;
    for (std::size_t i = 0; i < live_.size(); ++i)
      for (std::size_t j = i + 1; j < live_.size(); ++j) {
        const long long d = torus_distance_sq(slots_[live_[i]].site, slots_[live_[j]].site, torus_);
        if (best < 0 || d < best) best = d;
      }
    return best;
  }

  /// Every pair of live blocks is at torus distance >= d (vacuous for < 2 blocks).
  bool all_pairwise_at_least(double d) const {
    const long long m = min_pairwise_distance_sq();
    return m < 0 || static_cast<double>(m) >= d * d;
  }

  /// Apply the next transition and report it to `sink`. In instantaneous
  /// mode a migration onto an occupied site is followed by the merge of all
  /// blocks there at the same clock value (two sink calls).
  template <typename G, typename Sink = NullSink>
  StepStatus step(G& rng, Sink&& sink = {}) {
    if (live_.empty()) return StepStatus::empty;
    guard();

    if (mechanism_.instantaneous() && options_.merges_enabled && !hot_.empty()) {
      merge_site_all(hot_.front());
      sink(event_);
      return StepStatus::event;
    }

    const double mig = migration_total();
    const double mer = merge_total();
    const double mut = mutation_total();
    const double total = mig + mer + mut;
    if (!(total > 0.0)) return StepStatus::absorbed;

    const double dwell = exponential(rng, total);
    lineage_time_ += static_cast<double>(live_.size()) * dwell;
    clock_ += dwell;

    const double u = uniform01(rng) * total;
    if (u < mig || (mer == 0.0 && mut == 0.0)) {
      const int id = live_[uniform_index(rng, live_.size())];
      const auto to = neighbors(slots_[id].site, torus_)[uniform_index(rng, 4)];
      migrate(id, to);
      sink(event_);
      if (mechanism_.instantaneous() && options_.merges_enabled && count_[slots_[id].site_idx] >= 2) {
        merge_site_all(slots_[id].site_idx);
        sink(event_);
      }
    } else if (mer > 0.0 && (u < mig + mer || mut == 0.0)) {
      double v = u - mig;
      std::uint32_t site = hot_.back();
      for (std::uint32_t s : hot_) {
        const double r = rates_.total(count_[s]);
        if (v < r) {
          site = s;
          break;
        }
        v -= r;
      }
      const int b = count_[site];
      const int k = rates_.sample_size(b, rng).value_or(b);
      const auto subset = sample_subset(b, k, rng);
      const auto here = occupants(site);
      std::vector<int> chosen;
      chosen.reserve(subset.size());
      for (int i : subset) chosen.push_back(here[i]);
      merge_slots(chosen);
      sink(event_);
    } else {
      kill(live_[uniform_index(rng, live_.size())]);
      sink(event_);
    }
    return StepStatus::event;
  }

  /// Step until `stop(*this)` holds (checked before every step). Returns
  /// StepStatus::event when stopped by the predicate.
  template <typename G, typename Stop, typename Sink = NullSink>
  StepStatus run_until(G& rng, Stop&& stop, Sink&& sink = {}) {
    while (!stop(*this)) {
      const auto st = step(rng, sink);
      if (st != StepStatus::event) return st;
    }
    return StepStatus::event;
  }

 private:
  struct Slot {
    std::vector<Element> members;
    Site site;
    std::size_t site_idx;
    int prev;  // doubly linked list of blocks at the same site
    int next;
    int live_pos;
  };

  void guard() {
    if (events_ >= options_.max_events)
      throw RunawaySimulation("event cap of " + std::to_string(options_.max_events) + " exceeded");
  }

  void live_add(int id) {
    slots_[id].live_pos = static_cast<int>(live_.size());
    live_.push_back(id);
  }
  void live_remove(int id) {
    const int pos = slots_[id].live_pos;
    const int last = live_.back();
    live_[pos] = last;
    slots_[last].live_pos = pos;
    live_.pop_back();
    slots_[id].live_pos = -1;
  }

  void site_insert(int id) {
    auto& s = slots_[id];
    const auto idx = s.site_idx;
    s.prev = -1;
    s.next = head_[idx];
    if (s.next >= 0) slots_[s.next].prev = id;
    head_[idx] = id;
    if (++count_[idx] == 2) hot_.push_back(static_cast<std::uint32_t>(idx));
  }
  void site_remove(int id) {
    auto& s = slots_[id];
    const auto idx = s.site_idx;
    if (s.prev >= 0) slots_[s.prev].next = s.next;
    else head_[idx] = s.next;
    if (s.next >= 0) slots_[s.next].prev = s.prev;
    s.prev = s.next = -1;
    if (count_[idx]-- == 2) hot_.erase(std::find(hot_.begin(), hot_.end(), static_cast<std::uint32_t>(idx)));
  }

  std::vector<int> occupants(std::size_t site_idx) const {
    std::vector<int> out;
    for (int id = head_[site_idx]; id >= 0; id = slots_[id].next) out.push_back(id);
    return out;
  }

  void migrate(int id, Site to) {
    const Site from = slots_[id].site;
    site_remove(id);
    slots_[id].site = to;
    slots_[id].site_idx = torus_.index(to);
    site_insert(id);
    set_event(EventKind::migration, from, to);
    event_.blocks.push_back(slots_[id].members.front());
    ++events_;
  }

  void merge_site_all(std::size_t site_idx) { merge_slots(occupants(site_idx)); }

  // ids share one site; the survivor is the block with the smallest minimum
  void merge_slots(std::vector<int> ids) {
    std::sort(ids.begin(), ids.end(),
              [&](int a, int b) { return slots_[a].members.front() < slots_[b].members.front(); });
    const Site site = slots_[ids.front()].site;
    set_event(EventKind::merge, site, site);
    const int keep = ids.front();
    event_.blocks.push_back(slots_[keep].members.front());
    for (std::size_t i = 1; i < ids.size(); ++i) {
      const int id = ids[i];
      event_.blocks.push_back(slots_[id].members.front());
      auto& dst = slots_[keep].members;
      const auto mid = dst.size();
      dst.insert(dst.end(), slots_[id].members.begin(), slots_[id].members.end());
      std::inplace_merge(dst.begin(), dst.begin() + static_cast<std::ptrdiff_t>(mid), dst.end());
      site_remove(id);
      live_remove(id);
      slots_[id].members.clear();
    }
    ++events_;
  }

  void kill(int id) {
    const Site site = slots_[id].site;
    set_event(EventKind::mutation, site, site);
    event_.blocks.push_back(slots_[id].members.front());
    ++spectrum_[slots_[id].members.size()];
    ++killed_;
    site_remove(id);
    live_remove(id);
    ++events_;
  }

  void set_event(EventKind kind, Site from, Site to) {
    event_.time = clock_;
    event_.kind = kind;
    event_.blocks.clear();
    event_.from = from;
    event_.to = to;
  }

  TorusSpec torus_;
  Mechanism mechanism_;
  SimulatorOptions options_;
  std::size_t n_;
  MergeRateTable rates_;
  double migration_rate_;

  std::vector<Slot> slots_;
  std::vector<int> live_;
  std::vector<int> head_;
  std::vector<int> count_;
  std::vector<std::uint32_t> hot_;  // sites holding >= 2 blocks

  double clock_ = 0.0;
  double lineage_time_ = 0.0;
  std::uint64_t events_ = 0;
  std::size_t killed_ = 0;
  std::vector<std::uint32_t> spectrum_;
  Event event_;
};

// Stop predicates.

inline auto stop_when_blocks_at_most(std::size_t k) {
  return [k](const SpatialCoalescent& s) { return s.block_count() <= k; };
}

inline auto stop_at_clock(double t) {
  return [t](const SpatialCoalescent& s) { return s.clock() >= t; };
}

/// Hybrid handoff condition: all live blocks mutually at distance >= d.
inline auto stop_when_dispersed(double d) {
  return [d](const SpatialCoalescent& s) { return s.all_pairwise_at_least(d); };
}

/// Run to `stop` and return the full event log. Mutation must be disabled
/// (the terminal state of a log is a partition of the whole sample).
template <typename G, typename Stop>
EventLog run_until(SpatialCoalescent& sim, Stop&& stop, G& rng) {
  if (sim.options().mutation_rate > 0.0)
    throw std::invalid_argument("event logs require mutation_rate == 0");
  EventLog log{sim.partition(), {}, {}};
  try {
    sim.run_until(rng, stop, RecordingSink{&log.events});
  } catch (const RunawaySimulation& e) {
    log.terminal = sim.partition();
    throw RunawaySimulation(e.what(), std::move(log));
  }
  log.terminal = sim.partition();
  return log;
}

}  // namespace slc
