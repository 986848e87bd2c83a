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

#include <cmath>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pale/clock.hpp"
#include "pale/errors.hpp"
#include "pale/types.hpp"

namespace pale {

struct ChurnTransition {
  VirtualTime at = 0;
  bool up = false;

  friend bool operator==(const ChurnTransition&, const ChurnTransition&) =
      default;
};

// Seed-driven churn: at each of the node's round boundaries while up, fail
// with probability fail_per_round; stay down for a uniform duration in
// [down_min, down_max] virtual ticks.
struct StochasticChurn {
  double fail_per_round = 0.0;
  VirtualTime down_min = 0;
  VirtualTime down_max = 0;

  friend bool operator==(const StochasticChurn&, const StochasticChurn&) =
      default;
};

// Either an explicit transition list or a stochastic model. An empty script
// means the node is up for the whole run. A node whose first transition is
// Up starts the run down (a late joiner); otherwise it starts up.
struct ChurnScript {
  std::vector<ChurnTransition> transitions;
  std::optional<StochasticChurn> random;

  bool starts_up() const {
    return transitions.empty() || !transitions.front().up;
  }

  friend bool operator==(const ChurnScript&, const ChurnScript&) = default;
};

struct NodeSpec {
  NodeId id = kNoNode;
  double phys_score = 0.0;
  ClockModel clock;
  ChurnScript churn;
  int region = 0;
  LocalTime local_offset = 0;

  friend bool operator==(const NodeSpec&, const NodeSpec&) = default;
};

// The whole world description for one deterministic run.
struct SimConfig {
  std::string name;
  std::vector<NodeSpec> nodes;
  double max_ratio = 1.0;
  VirtualTime msg_delay = 2000;   // delta_d
  int delay_multiplier = 1;       // D; delays are drawn from (0, D*delta_d]
  VirtualTime on_timer_cost = 0;
  VirtualTime on_msg_cost = 0;
  double w = 1.0 / 16.0;
  std::uint32_t num_of_copies = 1;
  std::uint64_t seed = 1;
  VirtualTime max_virtual_time = 1000000;
  bool lossy = false;             // reliable delivery unless set
  double loss_prob = 0.0;         // per-copy drop probability in lossy mode
  bool worst_case_delay = false;  // pin every delay to D*delta_d
  std::optional<NodeId> stable_node;
  std::optional<VirtualTime> merge_time;

  std::uint32_t max_round() const {
    return 2 * static_cast<std::uint32_t>(std::ceil(max_ratio)) + 2;
  }
  std::uint32_t max_ratio_ceil() const {
    return static_cast<std::uint32_t>(std::ceil(max_ratio));
  }

  const NodeSpec* find(NodeId id) const {
    for (const auto& n : nodes)
      if (n.id == id) return &n;
    return nullptr;
  }

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

inline NodeParams node_params_for(const SimConfig& cfg, const NodeSpec& spec) {
  return make_node_params(cfg.w, cfg.max_ratio,
                          cfg.msg_delay * cfg.delay_multiplier,
                          cfg.num_of_copies, spec.phys_score);
}

// One broken rule, with enough context to point at the offending inequality.
struct Violation {
  std::string rule;
  NodeId node_a = kNoNode;
  NodeId node_b = kNoNode;
  long double margin = 0.0;  // how far past the bound (positive = violated by)
  std::string detail;
};

namespace detail {

inline std::string format_margin(long double m) {
  std::ostringstream os;
  os << static_cast<double>(m);
  return os.str();
}

}  // namespace detail

// Expands a stochastic churn model into a concrete transition list over
// [0, max_virtual_time]; explicit scripts come back unchanged. Deterministic
// in (seed, node id).
inline ChurnScript materialize_churn(const NodeSpec& spec, const SimConfig& cfg,
                                     std::uint64_t seed) {
  if (!spec.churn.random) return spec.churn;
  const StochasticChurn& m = *spec.churn.random;
  std::mt19937_64 rng(seed ^ (spec.id * 0x9E3779B97F4A7C15ULL));
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<VirtualTime> down_for(m.down_min, m.down_max);
  ChurnScript out;
  VirtualTime t = 0;
  std::uint64_t round = 0;
  while (true) {
    ++round;
    VirtualTime next = t + kth_round_delay(spec.clock, 1);
    if (next > cfg.max_virtual_time) break;
    if (coin(rng) < m.fail_per_round) {
      VirtualTime down_at = next;
      VirtualTime up_at = down_at + std::max<VirtualTime>(1, down_for(rng));
      out.transitions.push_back({down_at, false});
      if (up_at > cfg.max_virtual_time) break;
      out.transitions.push_back({up_at, true});
      t = up_at;
    } else {
      t = next;
    }
  }
  return out;
}

// Checks every standing assumption of a config and returns all violations
// (empty result = valid): positive parameter domains, unique ids, churn
// script shape, the bounded clock-ratio rule, the round-length rule
//   round(v) >= onTimerCost + D*msgDelay + onMsgCost * n * maxRatio,
// and the requirement that at least one node stays up for the whole run.
inline std::vector<Violation> validate_config(const SimConfig& cfg) {
  std::vector<Violation> out;
  auto fail = [&](std::string rule, NodeId a, NodeId b, long double margin,
                  std::string detail) {
    out.push_back({std::move(rule), a, b, margin, std::move(detail)});
  };

  if (cfg.nodes.empty())
    fail("nodes", kNoNode, kNoNode, 0, "config has no nodes");
  if (!(cfg.w > 0.0)) fail("w", kNoNode, kNoNode, 0, "w must be > 0");
  if (!(cfg.max_ratio >= 1.0))
    fail("maxRatio", kNoNode, kNoNode, 0, "maxRatio must be >= 1");
  if (cfg.msg_delay <= 0)
    fail("msgDelay", kNoNode, kNoNode, 0, "msgDelay must be > 0");
  if (cfg.delay_multiplier < 1)
    fail("delayMultiplier", kNoNode, kNoNode, 0, "D must be >= 1");
  if (cfg.on_timer_cost < 0 || cfg.on_msg_cost < 0)
    fail("costs", kNoNode, kNoNode, 0, "processing costs must be >= 0");
  if (cfg.num_of_copies == 0)
    fail("numOfCopies", kNoNode, kNoNode, 0, "numOfCopies must be >= 1");
  if (cfg.max_virtual_time <= 0)
    fail("maxVirtualTime", kNoNode, kNoNode, 0, "maxVirtualTime must be > 0");
  if (cfg.lossy && !(cfg.loss_prob >= 0.0 && cfg.loss_prob < 1.0))
    fail("lossProb", kNoNode, kNoNode, 0, "lossProb must be in [0, 1)");

  for (const auto& n : cfg.nodes) {
    if (n.id == kNoNode)
      fail("nodeId", n.id, kNoNode, 0, "node id 0 is reserved");
    if (!(n.phys_score >= 0.0 && n.phys_score <= 1.0))
      fail("physScore", n.id, kNoNode, 0, "physScore must be in [0, 1]");
    if (n.clock.round_length <= 0 || n.clock.rate_num <= 0 ||
        n.clock.rate_den <= 0)
      fail("clock", n.id, kNoNode, 0, "round length and rate must be positive");
    if (n.churn.random) {
      const StochasticChurn& m = *n.churn.random;
      if (!(m.fail_per_round >= 0.0 && m.fail_per_round <= 1.0))
        fail("churn", n.id, kNoNode, 0, "failPerRound must be in [0, 1]");
      if (m.down_min < 0 || m.down_max < m.down_min)
        fail("churn", n.id, kNoNode, 0,
             "need 0 <= downMin <= downMax for random churn");
    }
    for (std::size_t i = 0; i < n.churn.transitions.size(); ++i) {
      const auto& tr = n.churn.transitions[i];
      if (i > 0) {
        const auto& prev = n.churn.transitions[i - 1];
        if (tr.at <= prev.at)
          fail("churn", n.id, kNoNode, 0,
               "churn transitions must be strictly increasing in time");
        if (tr.up == prev.up)
          fail("churn", n.id, kNoNode, 0,
               "churn transitions must alternate up/down");
      }
      if (tr.at < 0)
        fail("churn", n.id, kNoNode, 0, "churn transition before time 0");
    }
  }
  for (std::size_t i = 0; i < cfg.nodes.size(); ++i)
    for (std::size_t j = i + 1; j < cfg.nodes.size(); ++j)
      if (cfg.nodes[i].id == cfg.nodes[j].id)
        fail("nodeId", cfg.nodes[i].id, kNoNode, 0, "duplicate node id");

  if (!out.empty()) return out;  // shape errors mask the inequality checks

  // Bounded clock ratio: fastest round no shorter than slowest / maxRatio.
  for (const auto& u : cfg.nodes) {
    for (const auto& v : cfg.nodes) {
      long double ru = effective_round(u.clock);
      long double rv = effective_round(v.clock);
      if (ru > static_cast<long double>(cfg.max_ratio) * rv) {
        std::ostringstream os;
        os << "round(" << u.id << ")=" << static_cast<double>(ru)
           << " exceeds maxRatio*round(" << v.id
           << ")=" << static_cast<double>(cfg.max_ratio * (double)rv);
        fail("maxRatio-bound", u.id, v.id,
             ru - static_cast<long double>(cfg.max_ratio) * rv, os.str());
      }
    }
  }

  // Round length covers timer work, worst-case delivery, and handling one
  // message from every node at the worst rate skew.
  {
    long double n = static_cast<long double>(cfg.nodes.size());
    long double rhs = static_cast<long double>(cfg.on_timer_cost) +
                      static_cast<long double>(cfg.delay_multiplier) *
                          static_cast<long double>(cfg.msg_delay) +
                      static_cast<long double>(cfg.on_msg_cost) * n *
                          static_cast<long double>(cfg.max_ratio);
    for (const auto& v : cfg.nodes) {
      long double rv = effective_round(v.clock);
      if (rv < rhs) {
        std::ostringstream os;
        os << "round(" << v.id << ")=" << static_cast<double>(rv)
           << " < onTimerCost + D*msgDelay + onMsgCost*n*maxRatio = "
           << static_cast<double>(rhs);
        fail("round-length", v.id, kNoNode, rhs - rv, os.str());
      }
    }
  }

  // Someone must survive the whole run.
  {
    bool any_alive = false;
    for (const auto& n : cfg.nodes) {
      ChurnScript script = materialize_churn(n, cfg, cfg.seed);
      bool up = script.starts_up();
      bool dies = !up;
      for (const auto& tr : script.transitions)
        if (!tr.up && tr.at <= cfg.max_virtual_time) dies = true;
      if (!dies) {
        any_alive = true;
        break;
      }
    }
    if (!any_alive)
      fail("stable-node", kNoNode, kNoNode, 0,
           "no node stays up for the entire run");
  }

  if (cfg.stable_node && !cfg.find(*cfg.stable_node))
    fail("stable-node", *cfg.stable_node, kNoNode, 0,
         "designated stable node is not in the config");
  if (cfg.merge_time) {
    if (*cfg.merge_time <= 0 || *cfg.merge_time > cfg.max_virtual_time)
      fail("mergeTime", kNoNode, kNoNode, 0,
           "mergeTime must lie within (0, maxVirtualTime]");
    bool a = false, b = false;
    for (const auto& n : cfg.nodes) (n.region == 0 ? a : b) = true;
    if (!a || !b)
      fail("mergeTime", kNoNode, kNoNode, 0,
           "merge requires nodes in two regions");
  }
  return out;
}

inline std::string describe(const std::vector<Violation>& violations) {
  std::ostringstream os;
  for (const auto& v : violations) {
    os << v.rule;
    if (v.node_a != kNoNode) os << " node " << v.node_a;
    if (v.node_b != kNoNode) os << " vs " << v.node_b;
    os << ": " << v.detail;
    if (v.margin > 0)
      os << " (violated by " << detail::format_margin(v.margin) << ")";
    os << "\n";
  }
  return os.str();
}

}  // namespace pale
