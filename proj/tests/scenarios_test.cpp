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

#include "pale/scenarios.hpp"

#include <gtest/gtest.h>

#include "pale/checkers.hpp"
#include "pale/sim.hpp"

namespace pale {
namespace {

std::vector<TraceEvent> events_of(const Trace& t, TraceKind kind) {
  std::vector<TraceEvent> out;
  for (const auto& e : t.events)
    if (e.kind == kind) out.push_back(e);
  return out;
}

TEST(AdversarialJitter, ScriptEncodesTheWorstCase) {
  SimConfig cfg = adversarial_jitter(0.5, 1.0, 3);
  // k = ceil((1.0 - 0.5) / 0.05) = 10 fail cycles before the ranks meet.
  const NodeSpec* jitter = cfg.find(1);
  ASSERT_NE(jitter, nullptr);
  int downs = 0;
  for (const auto& tr : jitter->churn.transitions)
    if (!tr.up) ++downs;
  EXPECT_GE(downs, 10);
  // Every up stretch is one round short of the promotion threshold.
  const VirtualTime d = jitter->clock.round_length;
  VirtualTime up_at = 0;
  for (const auto& tr : jitter->churn.transitions) {
    if (tr.up) {
      up_at = tr.at;
    } else {
      VirtualTime alive = tr.at - up_at;
      EXPECT_GE(alive, (cfg.max_round() - 1) * d);
      EXPECT_LT(alive, cfg.max_round() * d);
    }
  }
}

TEST(AdversarialJitter, StableNodeWinsDespiteTenCycles) {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    Trace t = run_sim(adversarial_jitter(0.5, 1.0, seed));
    auto leads = events_of(t, TraceKind::BecameLeader);
    ASSERT_FALSE(leads.empty()) << "seed " << seed;
    EXPECT_EQ(leads[0].node, 2u) << "seed " << seed;  // the stable node
    Verdict v = check_termination_bound(t, t.cfg);
    EXPECT_TRUE(v.pass) << summary_line(v);
    // n*k*2*(ceil(maxRatio)+1)^2 = 2*10*2*4 = 160 rounds of the stable node.
    EXPECT_LE(*v.measured, 160.0);
    // The jitterer observed at least k failures' worth of rank growth.
    bool saw_crossing = false;
    for (const auto& e : t.events)
      if (e.kind == TraceKind::Timer && e.node == 2 && e.state &&
          !e.state->rank.inf && e.state->rank.value >= 1.0)
        saw_crossing = true;
    EXPECT_TRUE(saw_crossing);
  }
}

TEST(AdversarialJitter, SingleCycleWhenOneIncrementClosesTheGap) {
  // gap 0.1 with w = 0.1: one observed failure is enough.
  SimConfig base = adversarial_jitter(0.5, 1.0, 5);  // template for params
  base.w = 0.1;
  SimConfig cfg = adversarial_jitter_scenario(0.9, 1.0, base);
  Trace t = run_sim(cfg);
  auto leads = events_of(t, TraceKind::BecameLeader);
  ASSERT_FALSE(leads.empty());
  EXPECT_EQ(leads[0].node, 2u);
  // Elected soon after the first failure cycle: one cycle is at most
  // maxRound jitterer rounds plus the short downtime, then maxRound more.
  Verdict v = check_termination_bound(t, t.cfg);
  EXPECT_TRUE(v.pass);
  EXPECT_LE(*v.measured, 3.0 * t.cfg.max_round());
}

TEST(AdversarialJitter, LongDowntimeHandsOverInTheFirstWindow) {
  JitterOptions opt;
  opt.long_downtime = true;  // stays down past maxRound stable rounds
  Trace t = run_sim(adversarial_jitter(0.5, 1.0, 4, opt));
  auto leads = events_of(t, TraceKind::BecameLeader);
  ASSERT_FALSE(leads.empty());
  EXPECT_EQ(leads[0].node, 2u);
  // Stable node is elected inside the very first down window: staleness
  // timeout plus maxRound of its own rounds.
  std::uint64_t rounds = 0;
  for (const auto& e : t.events) {
    if (e.kind == TraceKind::Timer && e.node == 2) ++rounds;
    if (e.kind == TraceKind::BecameLeader) break;
  }
  EXPECT_LE(rounds,
            static_cast<std::uint64_t>(2 * t.cfg.max_ratio_ceil() +
                                       2 * t.cfg.max_round()));
}

TEST(AdversarialJitter, JittererNeverPromotes) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Trace t = run_sim(adversarial_jitter(0.5, 1.0, seed));
    for (const auto& e : events_of(t, TraceKind::BecameLeader))
      EXPECT_NE(e.node, 1u) << "seed " << seed;
  }
}

TEST(AdversarialJitterMulti, ElectsWithinTheBoundForSmallN) {
  for (int n : {3, 5}) {
    Trace t = run_sim(adversarial_jitter_multi(n, 2));
    Verdict v = check_termination_bound(t, t.cfg);
    EXPECT_TRUE(v.pass) << "n=" << n << " " << summary_line(v);
    EXPECT_TRUE(check_uniqueness(t).pass);
    EXPECT_TRUE(check_leader_threshold(t).pass);
  }
}

TEST(MonotonicScenarios, TotalsStayUnderNMaxRound) {
  std::vector<double> join_totals, leave_totals;
  for (int n : {4, 8, 16}) {
    Trace tj = run_sim(monotonic_join(n, 1));
    Verdict vj = measure_messages(tj, Regime::Monotonic);
    EXPECT_TRUE(vj.pass) << "join n=" << n;
    join_totals.push_back(*vj.measured);

    Trace tl = run_sim(monotonic_leave(n, 1));
    Verdict vl = measure_messages(tl, Regime::Monotonic);
    EXPECT_TRUE(vl.pass) << "leave n=" << n;
    leave_totals.push_back(*vl.measured);

    // Exactly one election each.
    EXPECT_EQ(events_of(tj, TraceKind::BecameLeader).size(), 1u);
    EXPECT_EQ(events_of(tl, TraceKind::BecameLeader).size(), 1u);
    // The last joiner wins the join; the weakest survivor wins the leave.
    EXPECT_EQ(events_of(tj, TraceKind::BecameLeader)[0].node,
              static_cast<NodeId>(n));
    EXPECT_EQ(events_of(tl, TraceKind::BecameLeader)[0].node, 1u);
  }
  for (std::size_t i = 1; i < join_totals.size(); ++i) {
    EXPECT_GT(join_totals[i], join_totals[i - 1]);
    EXPECT_GT(leave_totals[i], leave_totals[i - 1]);
  }
}

TEST(MildScenario, RecoveryCostIsMaxRoundRegardlessOfSize) {
  std::vector<double> totals;
  for (int n : {4, 8, 16}) {
    Trace t = run_sim(mild_leader_failure(n, 1));
    Verdict v = measure_messages(t, Regime::Mild);
    EXPECT_TRUE(v.pass) << "n=" << n;
    totals.push_back(*v.measured);
    // The failed leader is replaced by the second-strongest node.
    auto leads = events_of(t, TraceKind::BecameLeader);
    ASSERT_EQ(leads.size(), 2u);
    EXPECT_EQ(leads[0].node, static_cast<NodeId>(n));
    EXPECT_EQ(leads[1].node, static_cast<NodeId>(n - 1));
  }
  for (double total : totals) {
    EXPECT_EQ(total, totals.front());
    EXPECT_LE(total, 4.0);  // maxRound at maxRatio 1
  }
}

TEST(WorstCaseChurn, PerRoundTrafficNeverExceedsN) {
  for (int n : {4, 8}) {
    Trace t = run_sim(worst_case_churn(n, 1));
    Verdict v = measure_messages(t, Regime::Worst);
    EXPECT_TRUE(v.pass) << "n=" << n << " measured " << *v.measured;
    EXPECT_LE(*v.measured, static_cast<double>(n));
    EXPECT_TRUE(check_uniqueness(t).pass);
    EXPECT_FALSE(events_of(t, TraceKind::BecameLeader).empty());
  }
}

TEST(MergePair, StrongerRegionWinsAndSlavesConverge) {
  Trace t = run_sim(merge_pair(3, 3, 5));
  auto leads = events_of(t, TraceKind::BecameLeader);
  ASSERT_EQ(leads.size(), 2u);
  // Region A tops out at 0.9, region B at 0.7: A's leader wins the tie.
  NodeId a_leader = leads[0].node <= 100 ? leads[0].node : leads[1].node;
  Verdict v = check_merge_convergence(t);
  EXPECT_TRUE(v.pass) << summary_line(v);
  EXPECT_NE(v.note.find("winner " + std::to_string(a_leader)),
            std::string::npos);
}

TEST(MergePair, IdenticalRegionsFallBackToTheLargerLeaderId) {
  // Same score, same promotion history on both sides: only the id is left
  // to break the tie, and the larger one wins.
  SimConfig a = static_region(1, 4);
  SimConfig b = static_region(1, 4);
  b.nodes[0].id = 101;
  b.stable_node = 101;
  SimConfig merged = merge_scenario(a, b, 200000);
  Trace t = run_sim(merged);
  auto leads_tie = [&](NodeId id) {
    for (const auto& e : t.events)
      if (e.kind == TraceKind::BecameLeader && e.node == id) return e.tie;
    return LeaderTie{};
  };
  ASSERT_EQ(leads_tie(1).acc_rank, leads_tie(101).acc_rank);
  ASSERT_EQ(leads_tie(1).rounds_active, leads_tie(101).rounds_active);
  Verdict v = check_merge_convergence(t);
  EXPECT_TRUE(v.pass) << summary_line(v);
  EXPECT_NE(v.note.find("winner 101"), std::string::npos) << v.note;
}

TEST(MergePair, LosingLeaderAlsoBindsToTheWinner) {
  Trace t = run_sim(merge_pair(2, 2, 6));
  auto leads = events_of(t, TraceKind::BecameLeader);
  ASSERT_EQ(leads.size(), 2u);
  NodeId winner = leads[0].tie.acc_rank >= leads[1].tie.acc_rank
                      ? leads[0].node
                      : leads[1].node;
  NodeId loser = winner == leads[0].node ? leads[1].node : leads[0].node;
  bool loser_bound = false;
  for (const auto& e : events_of(t, TraceKind::Handshake))
    if (e.node == loser && e.target == winner) loser_bound = true;
  EXPECT_TRUE(loser_bound);
}

TEST(LateJoin, JoinerBindsWithinTheLatencyBound) {
  Trace t = run_sim(late_join(5, 3));
  Verdict v = check_joiner_latency(t);
  EXPECT_TRUE(v.pass) << summary_line(v);
  EXPECT_NE(v.note.find("1 applicable joins"), std::string::npos);
  ASSERT_TRUE(v.measured.has_value());
  EXPECT_LE(*v.measured,
            static_cast<double>(t.cfg.max_ratio_ceil() + t.cfg.max_round()));
}

}  // namespace
}  // namespace pale
