// Copyright 2026 The pale Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "pale/sim.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "pale/checkers.hpp"
#include "pale/scenarios.hpp"

namespace pale {
namespace {

std::vector<TraceEvent> events_of(const Trace& t, TraceKind kind) {
  std::vector<TraceEvent> out;
  for (const auto& e : t.events)
    if (e.kind == kind) out.push_back(e);
  return out;
}

TEST(Sim, SingleNodeElectsItselfAtTimerNumberMaxRound) {
  Trace t = run_sim(static_region(1, 1));
  auto timers = events_of(t, TraceKind::Timer);
  auto leads = events_of(t, TraceKind::BecameLeader);
  ASSERT_EQ(leads.size(), 1u);
  ASSERT_GE(timers.size(), 4u);
  // maxRatio 1 -> maxRound 4: promoted while handling the fourth timer.
  EXPECT_EQ(leads[0].t, timers[3].t);
  EXPECT_EQ(leads[0].rounds_as_leading, 4u);
  EXPECT_EQ(t.events.back().note, "quiescence");
}

TEST(Sim, StaticRegionElectsTheStrongestAndEveryoneBinds) {
  const int n = 6;
  Trace t = run_sim(static_region(n, 3));
  auto leads = events_of(t, TraceKind::BecameLeader);
  ASSERT_EQ(leads.size(), 1u);
  EXPECT_EQ(leads[0].node, static_cast<NodeId>(n));  // highest physScore
  auto shakes = events_of(t, TraceKind::Handshake);
  std::set<NodeId> bound;
  for (const auto& s : shakes) {
    EXPECT_EQ(s.target, static_cast<NodeId>(n));
    bound.insert(s.node);
  }
  EXPECT_EQ(bound.size(), static_cast<std::size_t>(n - 1));

  // Everyone binds within ceil(maxRatio) + maxRound of its own rounds.
  std::map<NodeId, std::uint64_t> rounds;
  std::map<NodeId, std::uint64_t> rounds_at_shake;
  for (const auto& e : t.events) {
    if (e.kind == TraceKind::Timer) ++rounds[e.node];
    if (e.kind == TraceKind::Handshake) rounds_at_shake[e.node] = rounds[e.node];
  }
  for (const auto& [id, r] : rounds_at_shake)
    EXPECT_LE(r, t.cfg.max_ratio_ceil() + t.cfg.max_round()) << "node " << id;
}

TEST(Sim, IdenticalConfigsProduceByteIdenticalTraces) {
  for (std::uint64_t seed : {1ull, 9ull}) {
    Trace a = run_sim(random_churn(6, seed));
    Trace b = run_sim(random_churn(6, seed));
    EXPECT_EQ(trace_to_string(a), trace_to_string(b));
  }
}

TEST(Sim, DifferentSeedsDiverge) {
  Trace a = run_sim(random_churn(6, 1));
  Trace b = run_sim(random_churn(6, 2));
  EXPECT_NE(trace_to_string(a), trace_to_string(b));
}

TEST(Sim, EveryDeliveryLandsWithinTheBoundAndToLiveNodes) {
  Trace t = run_sim(random_churn(8, 5));
  EXPECT_TRUE(check_delivery_bound(t).pass);
  const VirtualTime limit = t.cfg.msg_delay * t.cfg.delay_multiplier;
  for (const auto& e : events_of(t, TraceKind::Deliver)) {
    EXPECT_GT(e.arrived_at, e.sent_at);
    EXPECT_LE(e.arrived_at - e.sent_at, limit);
  }
}

TEST(Sim, WorstCaseDelayPinsEveryFlightToTheBound) {
  SimConfig cfg = static_region(4, 2);
  cfg.worst_case_delay = true;
  Trace t = run_sim(cfg);
  const VirtualTime limit = cfg.msg_delay * cfg.delay_multiplier;
  auto delivers = events_of(t, TraceKind::Deliver);
  ASSERT_FALSE(delivers.empty());
  for (const auto& e : delivers) EXPECT_EQ(e.arrived_at - e.sent_at, limit);
}

TEST(Sim, DelayMultiplierStretchesFlights) {
  SimConfig cfg = static_region(4, 2);
  cfg.delay_multiplier = 3;
  cfg.worst_case_delay = true;
  for (auto& n : cfg.nodes) n.clock.round_length = 10000;
  // round length must respect D*msgDelay = 6000
  Trace t = run_sim(cfg);
  auto delivers = events_of(t, TraceKind::Deliver);
  ASSERT_FALSE(delivers.empty());
  for (const auto& e : delivers)
    EXPECT_EQ(e.arrived_at - e.sent_at, 3 * cfg.msg_delay);
  EXPECT_TRUE(check_delivery_bound(t).pass);
  EXPECT_TRUE(check_handling_delay_bound(t).pass);
  EXPECT_TRUE(check_beep_gap_bound(t).pass);
  EXPECT_TRUE(oracle_replay(t).pass);
  EXPECT_FALSE(events_of(t, TraceKind::BecameLeader).empty());
}

TEST(Sim, DeadNodesReceiveNothingAndReviveFresh) {
  // One node dies for a few rounds in a static region.
  SimConfig cfg = static_region(3, 4);
  cfg.nodes[0].churn.transitions = {{25000, false}, {95000, true}};
  cfg.max_virtual_time = 400000;
  Trace t = run_sim(cfg);
  EXPECT_TRUE(check_delivery_bound(t).pass);

  bool down_seen = false, revived = false;
  for (const auto& e : t.events) {
    if (e.kind == TraceKind::Down && e.node == 1) down_seen = true;
    if (e.kind == TraceKind::Deliver && e.node == 1 && down_seen && !revived)
      FAIL() << "delivery to a dead node at t=" << e.t;
    if (e.kind == TraceKind::Up && e.node == 1 && down_seen) {
      revived = true;
      // No persistent memory: fresh state with zeroed counters.
      ASSERT_TRUE(e.state.has_value());
      EXPECT_EQ(e.state->pl0_del_cnt, 0u);
      EXPECT_EQ(e.state->cnt_rounds, 0u);
      EXPECT_EQ(e.state->pl_size, 1u);
      EXPECT_FALSE(e.state->leader);
    }
  }
  EXPECT_TRUE(down_seen);
  EXPECT_TRUE(revived);
}

TEST(Sim, SameTickOrderingFavorsTheAdversary) {
  // Node 2 (the strongest) dies exactly on its second timer tick: the death
  // is processed first, so that round never happens.
  SimConfig cfg = static_region(2, 1);
  cfg.nodes[1].churn.transitions = {{20000, false}};
  cfg.max_virtual_time = 200000;
  Trace t = run_sim(cfg);
  for (const auto& e : t.events) {
    if (e.node != 2) continue;
    EXPECT_TRUE(e.t < 20000 || e.kind == TraceKind::Down ||
                e.kind == TraceKind::Drop)
        << "node 2 acted at t=" << e.t << " kind " << to_cstr(e.kind);
  }
  // A beep sent at t cannot reach a node that only came up at t.
  SimConfig cfg2 = static_region(2, 2);
  cfg2.nodes[0].churn.transitions = {{10000, false}, {20000, true}};
  cfg2.max_virtual_time = 200000;
  Trace t2 = run_sim(cfg2);
  for (const auto& e : t2.events) {
    if (e.kind == TraceKind::Deliver && e.node == 1 && e.t >= 20000) {
      EXPECT_GE(e.sent_at, 20000);
    }
  }
}

TEST(Sim, LocalClocksFollowRateAndOffset) {
  SimConfig cfg = static_region(2, 5);
  cfg.max_ratio = 2.0;
  cfg.nodes[0].clock.rate_num = 2;  // local runs twice as fast
  cfg.nodes[0].clock.round_length = 10000;  // effective 5000
  cfg.nodes[0].local_offset = 500;
  cfg.nodes[1].clock.round_length = 10000;
  Trace t = run_sim(cfg);
  for (const auto& e : t.events) {
    if (e.node != 1) continue;
    if (e.kind == TraceKind::Timer || e.kind == TraceKind::Up ||
        e.kind == TraceKind::Deliver) {
      EXPECT_EQ(e.local, 500 + 2 * e.t);
    }
  }
  EXPECT_TRUE(check_drift_bound(t).pass);
  // Node 1 completes about twice as many rounds as node 2.
  std::map<NodeId, int> rounds;
  for (const auto& e : events_of(t, TraceKind::Timer)) ++rounds[e.node];
  if (rounds[2] >= 4) {
    EXPECT_GE(rounds[1], 2 * rounds[2] - 2);
    EXPECT_LE(rounds[1], 2 * rounds[2] + 2);
  }
}

TEST(Sim, SenderTimestampsStrictlyIncreasePerIncarnation) {
  Trace t = run_sim(random_churn(6, 11));
  std::map<NodeId, LocalTime> last;
  for (const auto& e : t.events) {
    if (e.kind == TraceKind::Up) last.erase(e.node);
    if (e.kind == TraceKind::Broadcast) {
      auto it = last.find(e.node);
      if (it != last.end()) {
        EXPECT_GT(e.msg.time, it->second);
      }
      last[e.node] = e.msg.time;
    }
  }
}

TEST(Sim, ProcessingCostsDelayButStayWithinAssumptions) {
  SimConfig cfg = static_region(4, 6);
  cfg.on_timer_cost = 300;
  cfg.on_msg_cost = 100;
  // round 10000 >= 300 + 2000 + 100*4*1 = 2700: valid.
  ASSERT_TRUE(validate_config(cfg).empty());
  Trace t = run_sim(cfg);
  auto leads = events_of(t, TraceKind::BecameLeader);
  ASSERT_EQ(leads.size(), 1u);
  EXPECT_TRUE(check_handling_delay_bound(t).pass);
  EXPECT_TRUE(check_beep_gap_bound(t).pass);
  EXPECT_TRUE(oracle_replay(t).pass);
}

TEST(Sim, LossyModeDropsCopiesAndMultipleCopiesCompensate) {
  SimConfig cfg = static_region(3, 7);
  cfg.lossy = true;
  cfg.loss_prob = 0.9;
  cfg.num_of_copies = 1;
  cfg.max_virtual_time = 60 * 10000;
  Trace sparse = run_sim(cfg);
  cfg.num_of_copies = 8;
  Trace dense = run_sim(cfg);
  auto count = [](const Trace& t) {
    std::size_t k = 0;
    for (const auto& e : t.events)
      if (e.kind == TraceKind::Deliver) ++k;
    return k;
  };
  EXPECT_GT(count(dense), count(sparse));
  // Verdicts on lossy traces are informational.
  EXPECT_TRUE(check_uniqueness(sparse).downgraded);
}

TEST(Sim, RefusesToRunInvalidConfigs) {
  SimConfig cfg = static_region(3, 8);
  cfg.msg_delay = 50000;  // bigger than the round length
  EXPECT_THROW(run_sim(cfg), ConfigError);
}

TEST(Sim, MergeBeforeElectionIsAScenarioError) {
  SimConfig merged = merge_pair(3, 3, 9);
  merged.merge_time = 10000;  // one round in: nobody elected yet
  EXPECT_THROW(run_sim(merged), ScenarioError);
}

TEST(Sim, MergedRegionsConvergeOnTheTieWinner) {
  Trace t = run_sim(merge_pair(3, 4, 10));
  auto merges = events_of(t, TraceKind::Merge);
  ASSERT_EQ(merges.size(), 1u);
  auto leads = events_of(t, TraceKind::BecameLeader);
  ASSERT_EQ(leads.size(), 2u);  // one per region, none afterwards
  EXPECT_TRUE(check_merge_convergence(t).pass);

  // Region A's field is stronger, so its leader's tie record wins; after the
  // merge every handshake goes to it.
  NodeId winner = leads[0].tie.acc_rank >= leads[1].tie.acc_rank
                      ? leads[0].node
                      : leads[1].node;
  bool post = false;
  std::size_t post_shakes = 0;
  for (const auto& e : t.events) {
    if (e.kind == TraceKind::Merge) post = true;
    if (post && e.kind == TraceKind::Handshake) {
      ++post_shakes;
      EXPECT_EQ(e.target, winner);
    }
  }
  EXPECT_GT(post_shakes, 0u);
}

TEST(Sim, QuiescentRunsStopEarly) {
  Trace t = run_sim(static_region(5, 11));
  EXPECT_EQ(t.events.back().note, "quiescence");
  EXPECT_LT(t.events.back().t, t.cfg.max_virtual_time);
}

TEST(Sim, TraceSerializationRoundTrips) {
  Trace t = run_sim(late_join(4, 12));
  std::string text = trace_to_string(t);
  std::istringstream is(text);
  Trace back = read_trace(is);
  EXPECT_EQ(back.cfg, t.cfg);
  ASSERT_EQ(back.events.size(), t.events.size());
  for (std::size_t i = 0; i < t.events.size(); ++i)
    EXPECT_EQ(back.events[i], t.events[i]) << "record " << i;
  EXPECT_EQ(trace_to_string(back), text);
}

}  // namespace
}  // namespace pale
