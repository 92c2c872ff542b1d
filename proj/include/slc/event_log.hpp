#pragma once

#include <algorithm>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "slc/partition.hpp"

namespace slc {

enum class EventKind { migration, merge, mutation };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::migration: return "migration";
    case EventKind::merge: return "merge";
    case EventKind::mutation: return "mutation";
  }
  return "?";
}

/// One timed transition. Blocks are identified by their minimal element.
/// migration: blocks = {mover}, from -> to.
/// merge:     blocks = merged blocks (>= 2), all at from == to.
/// mutation:  blocks = {killed block}, from == to == its site.
struct Event {
  double time = 0.0;
  EventKind kind = EventKind::migration;
  std::vector<Element> blocks;
  Site from;
  Site to;

  friend bool operator==(const Event&, const Event&) = default;
};

struct EventLog {
  LabeledPartition initial;
  std::vector<Event> events;
  LabeledPartition terminal;
};

/// Live block set driven by events; supports killed blocks.
class ReplayState {
 public:
  explicit ReplayState(const LabeledPartition& initial) : n_(initial.sample_size()) {
    for (const auto& b : initial.blocks()) live_.emplace(b.min(), b);
    rebuild_owner();
  }

  void apply(const Event& e) {
    switch (e.kind) {
      case EventKind::migration: {
        auto& b = find(e.blocks.at(0));
        if (b.label != e.from) throw std::invalid_argument("migration source does not match block label");
        b.label = e.to;
        break;
      }
      case EventKind::merge: {
        if (e.blocks.size() < 2) throw std::invalid_argument("merge event with fewer than 2 blocks");
        LabeledBlock merged{{}, e.from};
        for (Element id : e.blocks) {
          auto& b = find(id);
          if (b.label != e.from) throw std::invalid_argument("merged block not at merge site");
          merged.elements.insert(merged.elements.end(), b.elements.begin(), b.elements.end());
          live_.erase(id);
        }
        std::sort(merged.elements.begin(), merged.elements.end());
        for (Element x : merged.elements) owner_[x] = merged.min();
        live_.emplace(merged.min(), std::move(merged));
        break;
      }
      case EventKind::mutation: {
        auto& b = find(e.blocks.at(0));
        for (Element x : b.elements) owner_[x] = 0;
        killed_.push_back(b);
        live_.erase(e.blocks[0]);
        break;
      }
    }
  }

  std::size_t sample_size() const { return n_; }
  std::size_t block_count() const { return live_.size(); }

  /// Minimal element of the live block holding x, or 0 if x was killed.
  Element block_id(Element x) const { return owner_.at(static_cast<std::size_t>(x)); }
  std::optional<Site> label_of(Element x) const {
    const Element id = block_id(x);
    if (id == 0) return std::nullopt;
    return live_.at(id).label;
  }

  std::vector<LabeledBlock> live_blocks() const {
    std::vector<LabeledBlock> out;
    for (const auto& [id, b] : live_) out.push_back(b);
    return out;
  }
  const std::vector<LabeledBlock>& killed_blocks() const { return killed_; }

  /// Full partition; throws if any block has been killed.
  LabeledPartition partition() const {
    if (!killed_.empty()) throw std::logic_error("partition unavailable after killing");
    return LabeledPartition(n_, live_blocks());
  }

 private:
  LabeledBlock& find(Element id) {
    auto it = live_.find(id);
    if (it == live_.end()) throw std::invalid_argument("event references unknown block " + std::to_string(id));
    return it->second;
  }
  void rebuild_owner() {
    owner_.assign(n_ + 1, 0);
    for (const auto& [id, b] : live_)
      for (Element x : b.elements) owner_[x] = id;
  }

  std::size_t n_;
  std::map<Element, LabeledBlock> live_;
  std::vector<LabeledBlock> killed_;
  std::vector<Element> owner_;
};

inline LabeledPartition replay(const LabeledPartition& initial, const std::vector<Event>& events) {
  ReplayState s(initial);
  for (const auto& e : events) s.apply(e);
  return s.partition();
}

namespace detail {

template <typename Pred>
std::optional<double> first_time(const EventLog& log, Pred pred) {
  ReplayState s(log.initial);
  if (pred(s)) return 0.0;
  for (const auto& e : log.events) {
    s.apply(e);
    if (pred(s)) return e.time;
  }
  return std::nullopt;
}

inline void check_pair(const EventLog& log, Element i, Element j) {
  const auto n = static_cast<Element>(log.initial.sample_size());
  if (i < 1 || j < 1 || i > n || j > n) throw std::invalid_argument("sample index out of range");
}

}  // namespace detail

/// tau(i,j): first time the blocks holding i and j share a site.
inline std::optional<double> first_meeting_time(const EventLog& log, Element i, Element j) {
  detail::check_pair(log, i, j);
  return detail::first_time(log, [i, j](const ReplayState& s) {
    const auto a = s.label_of(i), b = s.label_of(j);
    return a && b && *a == *b;
  });
}

/// tau_c(i,j): first time i and j lie in the same block.
inline std::optional<double> first_coalescence_time(const EventLog& log, Element i, Element j) {
  detail::check_pair(log, i, j);
  return detail::first_time(
      log, [i, j](const ReplayState& s) { return s.block_id(i) != 0 && s.block_id(i) == s.block_id(j); });
}

struct JumpTimes {
  std::vector<double> meeting;        // tau_1 < tau_2 < ...
  std::vector<double> coalescence;    // tau_{c,1} < tau_{c,2} < ...
  std::vector<double> meeting_waits;  // sigma_k
  std::vector<double> coalescence_waits;
};

/// Jump times: successive first meetings / first coalescences of pairs that
/// had not met / coalesced before.
inline JumpTimes jump_time_sequences(const EventLog& log) {
  const std::size_t n = log.initial.sample_size();
  ReplayState s(log.initial);
  std::vector<char> met(n * n, 0), coal(n * n, 0);
  auto mark = [&](std::optional<double> t, JumpTimes& out) {
    bool new_meet = false, new_coal = false;
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t j = i + 1; j <= n; ++j) {
        const std::size_t idx = (i - 1) * n + (j - 1);
        const auto ei = static_cast<Element>(i), ej = static_cast<Element>(j);
        if (!met[idx] && s.block_id(ei) != 0 && s.block_id(ej) != 0 && s.label_of(ei) == s.label_of(ej)) {
          met[idx] = 1;
          new_meet = true;
        }
        if (!coal[idx] && s.block_id(ei) != 0 && s.block_id(ei) == s.block_id(ej)) {
          coal[idx] = 1;
          new_coal = true;
        }
      }
    // strictly increasing from tau_0 = 0
    auto push = [&](std::vector<double>& v) {
      if (*t > (v.empty() ? 0.0 : v.back())) v.push_back(*t);
    };
    if (t) {
      if (new_meet) push(out.meeting);
      if (new_coal) push(out.coalescence);
    }
  };
  JumpTimes out;
  mark(std::nullopt, out);  // pairs met / coalesced at time 0 do not count
  for (const auto& e : log.events) {
    s.apply(e);
    mark(e.time, out);
  }
  auto waits = [](const std::vector<double>& t) {
    std::vector<double> w;
    double prev = 0.0;
    for (double x : t) {
      w.push_back(x - prev);
      prev = x;
    }
    return w;
  };
  out.meeting_waits = waits(out.meeting);
  out.coalescence_waits = waits(out.coalescence);
  return out;
}

// Line-delimited JSON: {"t":..,"kind":..,"blocks":[..],"from":[x,y],"to":[x,y]}.
// The initial configuration is written as one "sample" record per block.

inline nlohmann::json to_json(const Event& e) {
  return {{"t", e.time},
          {"kind", to_string(e.kind)},
          {"blocks", e.blocks},
          {"from", {e.from.x, e.from.y}},
          {"to", {e.to.x, e.to.y}}};
}

inline void write_sample_records(std::ostream& os, const LabeledPartition& initial) {
  for (const auto& b : initial.blocks()) {
    nlohmann::json j = {{"t", 0.0},
                        {"kind", "sample"},
                        {"blocks", b.elements},
                        {"from", {b.label.x, b.label.y}},
                        {"to", {b.label.x, b.label.y}}};
    os << j.dump() << '\n';
  }
}

inline void write_event(std::ostream& os, const Event& e) { os << to_json(e).dump() << '\n'; }

struct EventStream {
  LabeledPartition initial;
  std::vector<Event> events;
};

inline EventStream read_event_stream(std::istream& is) {
  std::vector<LabeledBlock> blocks;
  std::vector<Event> events;
  std::string line;
  std::size_t lineno = 0;
  Element max_el = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      const std::string kind = j.at("kind");
      auto site = [](const nlohmann::json& a) { return Site{a.at(0).get<int>(), a.at(1).get<int>()}; };
      if (kind == "sample") {
        LabeledBlock b{j.at("blocks").get<std::vector<Element>>(), site(j.at("from"))};
        for (Element x : b.elements) max_el = std::max(max_el, x);
        blocks.push_back(std::move(b));
        continue;
      }
      Event e;
      e.time = j.at("t").get<double>();
      if (kind == "migration") e.kind = EventKind::migration;
      else if (kind == "merge") e.kind = EventKind::merge;
      else if (kind == "mutation") e.kind = EventKind::mutation;
      else throw std::invalid_argument("unknown kind '" + kind + "'");
      e.blocks = j.at("blocks").get<std::vector<Element>>();
      e.from = site(j.at("from"));
      e.to = site(j.at("to"));
      events.push_back(std::move(e));
    } catch (const std::exception& ex) {
      throw std::invalid_argument("events line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  if (blocks.empty()) throw std::invalid_argument("event stream has no sample records");
  return {LabeledPartition(static_cast<std::size_t>(max_el), std::move(blocks)), std::move(events)};
}

}  // namespace slc
