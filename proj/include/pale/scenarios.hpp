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

#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "pale/config.hpp"
#include "pale/sim.hpp"

namespace pale {

// Canned worlds used by the CLI, the test suites and the complexity tables.
// Every builder returns a config that passes validate_config as-is.

namespace scenario_detail {

inline constexpr VirtualTime kRound = 10000;
inline constexpr VirtualTime kDelay = 2000;

inline SimConfig base(std::string name, std::uint64_t seed) {
  SimConfig cfg;
  cfg.name = std::move(name);
  cfg.max_ratio = 1.0;
  cfg.msg_delay = kDelay;
  cfg.w = 0.05;
  cfg.seed = seed;
  return cfg;
}

inline NodeSpec plain_node(NodeId id, double phys,
                           VirtualTime round_len = kRound) {
  NodeSpec n;
  n.id = id;
  n.phys_score = phys;
  n.clock.round_length = round_len;
  return n;
}

}  // namespace scenario_detail

// Fixed population, no churn, distinct scores: the strongest node wins and
// everyone else binds to it.
inline SimConfig static_region(int n, std::uint64_t seed) {
  using namespace scenario_detail;
  SimConfig cfg = base("static-" + std::to_string(n), seed);
  for (int i = 1; i <= n; ++i) {
    double phys =
        n == 1 ? 0.5 : 0.2 + 0.75 * static_cast<double>(i - 1) / (n - 1);
    cfg.nodes.push_back(plain_node(static_cast<NodeId>(i), phys));
  }
  cfg.stable_node = static_cast<NodeId>(n);
  cfg.max_virtual_time = 40 * kRound;
  return cfg;
}

// A stable region that has already elected, joined late by one weak node.
inline SimConfig late_join(int n, std::uint64_t seed) {
  using namespace scenario_detail;
  SimConfig cfg = static_region(n - 1, seed);
  cfg.name = "late-join-" + std::to_string(n);
  NodeSpec joiner = plain_node(static_cast<NodeId>(n), 0.25);
  joiner.churn.transitions.push_back({12 * kRound, true});
  cfg.nodes.push_back(joiner);
  cfg.max_virtual_time = 60 * kRound;
  return cfg;
}

struct JitterOptions {
  bool long_downtime = false;  // stay down past maxRound stable rounds
  VirtualTime round_len = scenario_detail::kRound;
};

// The termination-proof worst case: a stronger node keeps failing one round
// short of promotion and returning almost immediately, so the stable node
// wins only through its accumulating rank. The jitterer takes id 1 and the
// stable node id 2: once the ranks meet exactly, the id order favors the
// survivor.
inline SimConfig adversarial_jitter_scenario(double stable_phys,
                                             double jitter_phys,
                                             SimConfig base_cfg,
                                             const JitterOptions& opt = {}) {
  if (!(jitter_phys > stable_phys))
    throw ConfigError("adversarial jitter: jitterer must out-score the stable node");
  using namespace scenario_detail;
  SimConfig cfg = std::move(base_cfg);
  cfg.name = "adversarial-jitter";
  cfg.nodes.clear();

  const VirtualTime d = opt.round_len;
  const std::uint32_t max_round = cfg.max_round();
  const std::uint32_t ratio_ceil = cfg.max_ratio_ceil();
  const int k =
      static_cast<int>(std::ceil((jitter_phys - stable_phys) / cfg.w));

  NodeSpec jitter = plain_node(1, jitter_phys, d);
  NodeSpec stable = plain_node(2, stable_phys, d);

  std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ULL + 1);
  std::uniform_int_distribution<VirtualTime> die_after(d / 5, (4 * d) / 5);
  VirtualTime psi_max = static_cast<VirtualTime>(ratio_ceil) * d -
                        cfg.msg_delay * cfg.delay_multiplier - 1000;
  std::uniform_int_distribution<VirtualTime> down_for(1000,
                                                      std::max<VirtualTime>(
                                                          1000, psi_max));
  VirtualTime t = 0;
  for (int cycle = 0; cycle < k + 4; ++cycle) {
    VirtualTime down_at =
        t + static_cast<VirtualTime>(max_round - 1) * d + die_after(rng);
    VirtualTime up_at =
        down_at + (opt.long_downtime
                       ? static_cast<VirtualTime>(max_round + 1) * d
                       : down_for(rng));
    jitter.churn.transitions.push_back({down_at, false});
    jitter.churn.transitions.push_back({up_at, true});
    t = up_at;
  }

  cfg.nodes.push_back(jitter);
  cfg.nodes.push_back(stable);
  cfg.stable_node = 2;
  cfg.max_virtual_time =
      std::max<VirtualTime>(t + 40 * d, 200 * d);
  return cfg;
}

inline SimConfig adversarial_jitter(double stable_phys, double jitter_phys,
                                    std::uint64_t seed,
                                    const JitterOptions& opt = {}) {
  return adversarial_jitter_scenario(stable_phys, jitter_phys,
                                     scenario_detail::base("", seed), opt);
}

// Several strong jitterers with staggered fail cycles against one stable
// node. None of them ever survives maxRound rounds in the lead.
inline SimConfig adversarial_jitter_multi(int n, std::uint64_t seed) {
  using namespace scenario_detail;
  SimConfig cfg = base("adversarial-jitter-" + std::to_string(n), seed);
  const VirtualTime d = kRound;
  const std::uint32_t max_round = cfg.max_round();

  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 7);
  std::uniform_int_distribution<VirtualTime> die_after(d / 5, (4 * d) / 5);
  std::uniform_int_distribution<VirtualTime> down_for(d / 2, 2 * d);
  std::uniform_int_distribution<VirtualTime> phase(0, 2 * d);

  const double stable_phys = 0.5;
  double k = 1.0;
  VirtualTime horizon = 0;
  for (int i = 1; i < n; ++i) {
    double phys = 1.0 - 0.02 * (i - 1);
    k = std::max(k, std::ceil((phys - stable_phys) / cfg.w));
  }
  double ratio_term = static_cast<double>(cfg.max_ratio_ceil()) + 1.0;
  double bound_rounds = n * k * 2.0 * ratio_term * ratio_term;
  horizon = static_cast<VirtualTime>((bound_rounds + 50.0) * d);

  for (int i = 1; i < n; ++i) {
    NodeSpec jitter = plain_node(static_cast<NodeId>(i), 1.0 - 0.02 * (i - 1), d);
    VirtualTime t = phase(rng);
    if (t > 0) {
      // Staggered entry: starts down, joins at its phase offset.
      jitter.churn.transitions.push_back({t, true});
    }
    while (t < horizon) {
      VirtualTime down_at =
          t + static_cast<VirtualTime>(max_round - 1) * d + die_after(rng);
      VirtualTime up_at = down_at + down_for(rng);
      jitter.churn.transitions.push_back({down_at, false});
      if (up_at >= horizon) break;
      jitter.churn.transitions.push_back({up_at, true});
      t = up_at;
    }
    cfg.nodes.push_back(jitter);
  }
  cfg.nodes.push_back(plain_node(static_cast<NodeId>(n), stable_phys, d));
  cfg.stable_node = static_cast<NodeId>(n);
  cfg.max_virtual_time = horizon;
  return cfg;
}

// One never-failing node among peers that fail at random round boundaries
// and return after a random pause. Round lengths are drawn within the
// configured ratio bound.
inline SimConfig random_churn(int n, std::uint64_t seed,
                              double fail_per_round = 0.08) {
  using namespace scenario_detail;
  SimConfig cfg = base("random-churn-" + std::to_string(n), seed);
  cfg.max_ratio = 1.25;
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 13);
  std::uniform_int_distribution<VirtualTime> round_len(kRound,
                                                       (kRound * 5) / 4);
  std::uniform_int_distribution<int> phys_step(6, 19);  // 0.30 .. 0.95

  NodeSpec stable = plain_node(1, 0.55, kRound);
  cfg.nodes.push_back(stable);
  for (int i = 2; i <= n; ++i) {
    NodeSpec node = plain_node(static_cast<NodeId>(i), 0.05 * phys_step(rng),
                               round_len(rng));
    StochasticChurn churn;
    churn.fail_per_round = fail_per_round;
    churn.down_min = kRound / 2;
    churn.down_max = 10 * kRound;
    node.churn.random = churn;
    cfg.nodes.push_back(node);
  }
  cfg.stable_node = 1;
  cfg.max_virtual_time = 300 * kRound;
  return cfg;
}

// Nodes join one by one in ascending rank order, two rounds apart, so each
// newcomer takes over the lead until the strongest joins last and wins.
inline SimConfig monotonic_join(int n, std::uint64_t seed) {
  using namespace scenario_detail;
  SimConfig cfg = base("monotonic-join-" + std::to_string(n), seed);
  cfg.w = 0.004;
  for (int i = 1; i <= n; ++i) {
    double phys =
        n == 1 ? 0.5 : 0.15 + 0.8 * static_cast<double>(i - 1) / (n - 1);
    NodeSpec node = plain_node(static_cast<NodeId>(i), phys);
    if (i > 1)
      node.churn.transitions.push_back(
          {static_cast<VirtualTime>(i - 1) * 2 * kRound, true});
    cfg.nodes.push_back(node);
  }
  cfg.stable_node = 1;
  cfg.max_virtual_time = (2 * n + 20) * kRound;
  return cfg;
}

// Nodes leave one by one in descending rank order, each after two rounds in
// the lead, until the weakest survivor inherits the region.
inline SimConfig monotonic_leave(int n, std::uint64_t seed) {
  using namespace scenario_detail;
  SimConfig cfg = base("monotonic-leave-" + std::to_string(n), seed);
  // Small enough that a survivor's accumulated rank never outgrows the next
  // departer's stored score across all n reigns.
  cfg.w = 0.0005;
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 21);
  std::uniform_int_distribution<VirtualTime> within(kRound / 10,
                                                    (9 * kRound) / 10);
  // Reign i (1-based, strongest first) beeps at rounds 3i-2 and 3i-1 and its
  // owner leaves mid-round after the second beep.
  for (int i = 1; i <= n; ++i) {
    double phys =
        n == 1 ? 0.5 : 0.15 + 0.8 * static_cast<double>(i - 1) / (n - 1);
    NodeSpec node = plain_node(static_cast<NodeId>(i), phys);
    int reign = n - i + 1;  // node n reigns first
    if (i != 1) {
      VirtualTime leave_at =
          static_cast<VirtualTime>(3 * reign - 1) * kRound + within(rng);
      node.churn.transitions.push_back({leave_at, false});
    }
    cfg.nodes.push_back(node);
  }
  cfg.stable_node = 1;
  cfg.max_virtual_time = (3 * n + 10) * kRound;
  return cfg;
}

// A settled region whose leader dies once: only the next-best node speaks
// afterwards, and the recovery cost does not depend on the region size.
inline SimConfig mild_leader_failure(int n, std::uint64_t seed) {
  using namespace scenario_detail;
  SimConfig cfg = base("mild-leader-failure-" + std::to_string(n), seed);
  cfg.w = 0.004;
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 31);
  std::uniform_int_distribution<VirtualTime> within(kRound / 10,
                                                    (9 * kRound) / 10);
  for (int i = 1; i <= n; ++i) {
    double phys =
        n == 1 ? 0.5 : 0.15 + 0.8 * static_cast<double>(i - 1) / (n - 1);
    NodeSpec node = plain_node(static_cast<NodeId>(i), phys);
    if (i == n) node.churn.transitions.push_back({9 * kRound + within(rng), false});
    cfg.nodes.push_back(node);
  }
  cfg.stable_node = 1;
  cfg.max_virtual_time = 30 * kRound;
  return cfg;
}

// A quarter of the population dies and rejoins every round while one stable
// mid-score node outlasts the strong jitterers.
inline SimConfig worst_case_churn(int n, std::uint64_t seed,
                                  double p_join = 0.25) {
  using namespace scenario_detail;
  if (n < 2) throw ConfigError("worst-case churn needs at least 2 nodes");
  SimConfig cfg = base("worst-churn-" + std::to_string(n), seed);
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + 41);
  std::uniform_int_distribution<VirtualTime> down_at(kRound / 5,
                                                     (2 * kRound) / 5);
  std::uniform_int_distribution<VirtualTime> up_at((11 * kRound) / 20,
                                                   (9 * kRound) / 10);

  const int pool = n - 1;
  const int churners_per_round =
      std::max(1, static_cast<int>(std::lround(p_join * pool)));
  const int churn_rounds = 70;
  const int horizon_rounds = churn_rounds + 20;

  cfg.nodes.push_back(plain_node(1, 0.62));
  for (int i = 2; i <= n; ++i) {
    double phys =
        pool == 1 ? 1.0 : 0.30 + 0.70 * static_cast<double>(i - 2) / (pool - 1);
    cfg.nodes.push_back(plain_node(static_cast<NodeId>(i), phys));
  }

  // Deterministic rotation: round r churns `churners_per_round` pool members.
  int cursor = 0;
  std::vector<std::vector<std::pair<VirtualTime, VirtualTime>>> plans(n + 1);
  for (int r = 1; r <= churn_rounds; ++r) {
    for (int c = 0; c < churners_per_round; ++c) {
      int node_index = 2 + (cursor % pool);
      ++cursor;
      VirtualTime base_t = static_cast<VirtualTime>(r) * kRound;
      plans[node_index].push_back({base_t + down_at(rng), base_t + up_at(rng)});
    }
  }
  for (int i = 2; i <= n; ++i)
    for (const auto& [down, up] : plans[i]) {
      cfg.nodes[i - 1].churn.transitions.push_back({down, false});
      cfg.nodes[i - 1].churn.transitions.push_back({up, true});
    }

  cfg.stable_node = 1;
  cfg.max_virtual_time = horizon_rounds * kRound;
  return cfg;
}

// Two regions with differently scored populations, merged after both have
// settled. Region A's stronger field should win the tie order.
inline SimConfig merge_pair(int na, int nb, std::uint64_t seed) {
  using namespace scenario_detail;
  SimConfig a = base("merge-a", seed);
  for (int i = 1; i <= na; ++i)
    a.nodes.push_back(plain_node(
        static_cast<NodeId>(i),
        na == 1 ? 0.9 : 0.4 + 0.5 * static_cast<double>(i - 1) / (na - 1)));
  a.max_virtual_time = 60 * kRound;
  SimConfig b = base("merge-b", seed);
  for (int i = 1; i <= nb; ++i)
    b.nodes.push_back(plain_node(
        static_cast<NodeId>(100 + i),
        nb == 1 ? 0.7 : 0.3 + 0.4 * static_cast<double>(i - 1) / (nb - 1)));
  b.max_virtual_time = 60 * kRound;
  SimConfig merged = merge_scenario(a, b, 30 * kRound);
  merged.stable_node = static_cast<NodeId>(na);
  return merged;
}

}  // namespace pale
