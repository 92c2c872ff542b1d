#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "slc/check/oracles.hpp"
#include "slc/simulator.hpp"
#include "slc/stats.hpp"

using namespace slc;

namespace {

LabeledPartition P(const std::string& s) { return parse_labeled_partition(s); }

auto never() {
  return [](const SpatialCoalescent&) { return false; };
}

}  // namespace

TEST(Simulator, SingleBlockOnlyMigrates) {
  Rng rng(1);
  SpatialCoalescent sim(TorusSpec(3), parse_mechanism("bs"), P("{1}@(0,0)"));
  const auto log = run_until(sim, stop_at_clock(50.0), rng);
  EXPECT_FALSE(log.events.empty());
  for (const auto& e : log.events) {
    EXPECT_EQ(e.kind, EventKind::migration);
    EXPECT_EQ(e.blocks, std::vector<Element>{1});
  }
  EXPECT_EQ(sim.block_count(), 1u);
}

TEST(Simulator, AbsorbsWhenSingleBlockOnPoint) {
  Rng rng(1);
  SpatialCoalescent sim(TorusSpec(0), parse_mechanism("kingman"), P("{1}@(0,0)|{2}@(0,0)"));
  EXPECT_EQ(sim.step(rng), StepStatus::event);
  EXPECT_EQ(sim.block_count(), 1u);
  EXPECT_EQ(sim.step(rng), StepStatus::absorbed);
}

TEST(Simulator, ColocatedKingmanMergesWithProbabilityOneThird) {
  Rng rng(2);
  const TorusSpec t = TorusSpec::from_side_length(99);
  const int reps = 60000;
  int merges = 0;
  std::vector<double> dwell;
  for (int i = 0; i < reps; ++i) {
    SpatialCoalescent sim(t, parse_mechanism("kingman"), P("{1}@(0,0)|{2}@(0,0)"));
    Event seen;
    sim.step(rng, [&](const Event& e) { seen = e; });
    merges += seen.kind == EventKind::merge;
    dwell.push_back(sim.clock());
  }
  EXPECT_LE(std::abs(stats::binomial_z(merges, reps, 1.0 / 3.0)), 4.0);
  // first event of a co-located pair: rate 2 migration + rate 1 merge
  EXPECT_LT(stats::ks_exponential(dwell, 3.0), 0.02);
}

TEST(Simulator, DistinctSitesNeverMergeFirst) {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    SpatialCoalescent sim(TorusSpec(49), parse_mechanism("bs"), P("{1}@(0,0)|{2}@(1,0)"));
    Event seen;
    sim.step(rng, [&](const Event& e) { seen = e; });
    EXPECT_EQ(seen.kind, EventKind::migration);
  }
}

TEST(Simulator, RunUntilZeroIsEmpty) {
  Rng rng(4);
  SpatialCoalescent sim(TorusSpec(2), parse_mechanism("kingman"), P("{1}@(0,0)|{2}@(1,0)"));
  const auto log = run_until(sim, stop_at_clock(0.0), rng);
  EXPECT_TRUE(log.events.empty());
  EXPECT_EQ(log.initial, log.terminal);
}

TEST(Simulator, StopWhenDispersed) {
  Rng rng(5);
  SpatialCoalescent sim(TorusSpec(49), parse_mechanism("bs"), P("{1}@(0,0)|{2}@(0,0)|{3}@(0,0)|{4}@(0,0)"));
  run_until(sim, stop_when_dispersed(5.0), rng);
  EXPECT_TRUE(sim.block_count() <= 1 || sim.all_pairwise_at_least(5.0));
  const auto blocks = sim.live_blocks();
  for (std::size_t i = 0; i < blocks.size(); ++i)
    for (std::size_t j = i + 1; j < blocks.size(); ++j)
      EXPECT_GE(torus_distance(blocks[i].label, blocks[j].label, sim.torus()), 5.0);
}

TEST(Simulator, InvalidInitialState) {
  EXPECT_THROW(SpatialCoalescent(TorusSpec(1), parse_mechanism("bs"), P("{1}@(2,0)")), std::invalid_argument);
  SimulatorOptions o;
  o.max_sample_size = 2;
  EXPECT_THROW(SpatialCoalescent(TorusSpec(1), parse_mechanism("bs"), P("{1}@(0,0)|{2}@(0,0)|{3}@(0,0)"), o),
               std::invalid_argument);
}

TEST(Simulator, RunawayGuardKeepsPartialLog) {
  Rng rng(6);
  SimulatorOptions o;
  o.max_events = 5;
  SpatialCoalescent sim(TorusSpec(3), parse_mechanism("kingman"), P("{1}@(0,0)|{2}@(3,3)"), o);
  try {
    run_until(sim, never(), rng);
    FAIL() << "expected runaway";
  } catch (const RunawaySimulation& e) {
    ASSERT_TRUE(e.partial_log);
    EXPECT_EQ(e.partial_log->events.size(), 5u);
    EXPECT_EQ(replay(e.partial_log->initial, e.partial_log->events), e.partial_log->terminal);
  }
}

TEST(EventLog, ReplayReproducesTerminal) {
  for (const char* mech : {"kingman", "bs", "beta:0.5:1.5", "crw"}) {
    Rng a(7), b(7);
    const auto init = P("{1}@(0,0)|{2}@(1,0)|{3}@(0,1)|{4}@(0,0)|{5}@(-1,-1)");
    SpatialCoalescent s1(TorusSpec(2), parse_mechanism(mech), init);
    SpatialCoalescent s2(TorusSpec(2), parse_mechanism(mech), init);
    const auto l1 = run_until(s1, stop_when_blocks_at_most(1), a);
    const auto l2 = run_until(s2, stop_when_blocks_at_most(1), b);
    EXPECT_EQ(l1.events, l2.events) << mech;
    EXPECT_EQ(replay(l1.initial, l1.events), l1.terminal) << mech;
    EXPECT_EQ(l1.terminal.block_count(), 1u);
    for (std::size_t i = 1; i < l1.events.size(); ++i) EXPECT_LE(l1.events[i - 1].time, l1.events[i].time);
  }
}

TEST(EventLog, FirstMeetingAndCoalescence) {
  const auto init = P("{1}@(0,0)|{2}@(1,0)");
  EventLog log{init, {}, init};
  log.events.push_back({0.5, EventKind::migration, {2}, {1, 0}, {0, 0}});
  log.events.push_back({0.8, EventKind::migration, {1}, {0, 0}, {0, 1}});
  log.events.push_back({1.1, EventKind::migration, {1}, {0, 1}, {0, 0}});
  log.events.push_back({1.7, EventKind::merge, {1, 2}, {0, 0}, {0, 0}});
  log.terminal = replay(init, log.events);
  EXPECT_DOUBLE_EQ(*first_meeting_time(log, 1, 2), 0.5);
  EXPECT_DOUBLE_EQ(*first_coalescence_time(log, 1, 2), 1.7);
  EXPECT_EQ(*first_meeting_time(log, 1, 1), 0.0);
  EXPECT_THROW(first_meeting_time(log, 1, 3), std::invalid_argument);

  EventLog never_met{init, {}, init};
  EXPECT_FALSE(first_meeting_time(never_met, 1, 2));
  EXPECT_FALSE(first_coalescence_time(never_met, 1, 2));

  const auto colocated = P("{1}@(0,0)|{2}@(0,0)");
  EXPECT_EQ(*first_meeting_time(EventLog{colocated, {}, colocated}, 1, 2), 0.0);
}

TEST(EventLog, InstantaneousMeetingIsCoalescence) {
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    SpatialCoalescent sim(TorusSpec(2), parse_mechanism("crw"), P("{1}@(0,0)|{2}@(2,1)|{3}@(-1,2)"));
    const auto log = run_until(sim, stop_when_blocks_at_most(1), rng);
    for (Element a = 1; a <= 3; ++a)
      for (Element b = a + 1; b <= 3; ++b) EXPECT_EQ(first_meeting_time(log, a, b), first_coalescence_time(log, a, b));
  }
}

TEST(EventLog, JumpTimes) {
  Rng rng(9);
  for (int i = 0; i < 200; ++i) {
    SpatialCoalescent sim(TorusSpec(2), parse_mechanism("crw"), P("{1}@(0,0)|{2}@(2,1)|{3}@(-1,2)|{4}@(1,-2)"));
    const auto log = run_until(sim, stop_when_blocks_at_most(1), rng);
    const auto j = jump_time_sequences(log);
    // each crw coalescence removes exactly one block (a migration hits one occupied site)
    EXPECT_EQ(j.coalescence.size(), 3u);
    EXPECT_EQ(j.meeting, j.coalescence);
    double sum = 0;
    for (double w : j.coalescence_waits) {
      EXPECT_GT(w, 0.0);
      sum += w;
    }
    EXPECT_NEAR(sum, j.coalescence.back(), 1e-9);
  }
}

TEST(EventLog, JsonlRoundTrip) {
  Rng rng(10);
  const auto init = P("{1}@(0,0)|{2}@(1,0)|{3}@(0,0)");
  SpatialCoalescent sim(TorusSpec(2), parse_mechanism("bs"), init);
  const auto log = run_until(sim, stop_when_blocks_at_most(1), rng);
  std::stringstream ss;
  write_sample_records(ss, init);
  for (const auto& e : log.events) write_event(ss, e);
  const auto back = read_event_stream(ss);
  EXPECT_EQ(back.initial, init);
  ASSERT_EQ(back.events.size(), log.events.size());
  for (std::size_t i = 0; i < log.events.size(); ++i) {
    EXPECT_EQ(back.events[i].kind, log.events[i].kind);
    EXPECT_EQ(back.events[i].blocks, log.events[i].blocks);
    EXPECT_DOUBLE_EQ(back.events[i].time, log.events[i].time);
  }
  std::stringstream bad("{\"t\":0,\"kind\":\"sample\",\"blocks\":[1],\"from\":[0,0],\"to\":[0,0]}\n{\"kind\":\"jump\"}\n");
  try {
    read_event_stream(bad);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Oracle, PairChainOnSmallTorus) {
  // E[tau_c] and P(tau_c <= t) against the exact pair chain on T^1
  const TorusSpec t(1);
  const oracle::PairChain chain(t, 1.0);
  Rng rng(11);
  for (Site b : {Site{0, 0}, Site{1, 0}, Site{1, 1}}) {
    const int reps = 20000;
    std::vector<double> tc;
    int by2 = 0;
    for (int i = 0; i < reps; ++i) {
      SpatialCoalescent sim(t, parse_mechanism("kingman"), singletons(2, {Site{0, 0}, b}));
      sim.run_until(rng, stop_when_blocks_at_most(1));
      tc.push_back(sim.clock());
      by2 += sim.clock() <= 2.0;
    }
    const auto m = stats::mean_se(tc);
    EXPECT_LE(std::abs(m.mean - chain.expected_coalescence_time({0, 0}, b)), 3 * m.se);
    EXPECT_LE(std::abs(stats::binomial_z(by2, reps, chain.absorbed_by({0, 0}, b, 2.0))), 3.0);
  }
}

TEST(Oracle, ColocatedTimeBeforeCoalescenceIsExponential) {
  // total time spent co-located before merging is Exp(lambda_22)
  const TorusSpec t(1);
  for (const char* mech : {"kingman", "beta:2:2:3"}) {
    const double rate = merge_rate(parse_mechanism(mech).measure, 2, 2);
    Rng rng(12);
    std::vector<double> together;
    for (int i = 0; i < 20000; ++i) {
      SpatialCoalescent sim(t, parse_mechanism(mech), P("{1}@(0,0)|{2}@(1,1)"));
      double acc = 0.0;
      while (sim.block_count() > 1) {
        const auto blocks = sim.live_blocks();
        const bool co = blocks[0].label == blocks[1].label;
        const double before = sim.clock();
        sim.step(rng);
        if (co) acc += sim.clock() - before;
      }
      together.push_back(acc);
    }
    EXPECT_LT(stats::ks_exponential(together, rate), 0.02) << mech;
  }
}

TEST(Oracle, MarginalLineageIsRateOneWalk) {
  // the block carrying element 1 migrates at rate 1 whatever merges happen
  const TorusSpec t(2);
  const double time = 2.0;
  const auto p = exact_transient_distribution(t, {0, 0}, time);
  Rng rng(13);
  const int reps = 100000;
  std::vector<double> count(t.site_count(), 0.0);
  for (int i = 0; i < reps; ++i) {
    SpatialCoalescent sim(t, parse_mechanism("bs"), P("{1}@(0,0)|{2}@(0,0)|{3}@(1,0)"));
    SpatialCoalescent* s = &sim;
    Site last{0, 0};
    // record the label of element 1 just before the clock passes `time`
    while (true) {
      last = *[&] {
        for (const auto& b : s->live_blocks())
          if (std::find(b.elements.begin(), b.elements.end(), 1) != b.elements.end()) return std::optional<Site>(b.label);
        return std::optional<Site>();
      }();
      if (s->step(rng) != StepStatus::event || s->clock() > time) break;
    }
    count[t.index(last)] += 1.0;
  }
  for (std::size_t i = 0; i < p.size(); ++i)
    EXPECT_LE(std::abs(count[i] / reps - p[i]), 4 * std::sqrt(p[i] * (1 - p[i]) / reps)) << i;
}

TEST(Oracle, DifferenceWalkIsRateTwo) {
  const TorusSpec t(2);
  const double time = 1.5;
  const auto p = exact_transient_distribution(t, {1, 0}, time, 2.0);
  SimulatorOptions o;
  o.merges_enabled = false;
  Rng rng(14);
  const int reps = 100000;
  std::vector<double> count(t.site_count(), 0.0);
  for (int i = 0; i < reps; ++i) {
    SpatialCoalescent sim(t, parse_mechanism("crw"), P("{1}@(1,0)|{2}@(0,0)"), o);
    auto blocks = sim.live_blocks();
    while (true) {
      blocks = sim.live_blocks();
      sim.step(rng);
      if (sim.clock() > time) break;
    }
    ASSERT_EQ(blocks.size(), 2u);
    const Site d = t.wrap(blocks[0].label.x - blocks[1].label.x, blocks[0].label.y - blocks[1].label.y);
    count[t.index(d)] += 1.0;
  }
  for (std::size_t i = 0; i < p.size(); ++i)
    EXPECT_LE(std::abs(count[i] / reps - p[i]), 4 * std::sqrt(p[i] * (1 - p[i]) / reps)) << i;
}

TEST(Simulator, LineageTimeIsIntegratedBlockCount) {
  Rng rng(15);
  SpatialCoalescent sim(TorusSpec(2), parse_mechanism("bs"), P("{1}@(0,0)|{2}@(1,0)|{3}@(0,0)"));
  std::vector<Event> ev;
  sim.run_until(rng, stop_when_blocks_at_most(1), RecordingSink{&ev});
  double len = 0, prev = 0;
  std::size_t blocks = 3;
  for (const auto& e : ev) {
    len += static_cast<double>(blocks) * (e.time - prev);
    prev = e.time;
    if (e.kind == EventKind::merge) blocks -= e.blocks.size() - 1;
  }
  EXPECT_NEAR(sim.lineage_time(), len, 1e-9 * std::max(1.0, len));
}
