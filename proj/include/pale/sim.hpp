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

#include <map>
#include <memory>
#include <queue>
#include <random>
#include <vector>

#include "pale/clock.hpp"
#include "pale/config.hpp"
#include "pale/node.hpp"
#include "pale/trace.hpp"

namespace pale {

// Deterministic discrete-event world: one global virtual clock, per-node
// drifting local clocks, reliable bounded-delay broadcast, scripted or
// seed-driven churn. Every run with the same config produces the identical
// trace, byte for byte.
//
// Same-tick ordering: merges, then deaths, then revivals, then deliveries,
// then timers. A node that dies at t cannot act at t.
class Simulator {
 public:
  explicit Simulator(SimConfig cfg) : cfg_(std::move(cfg)) {}

  Trace run() {
    auto violations = validate_config(cfg_);
    if (!violations.empty())
      throw ConfigError("config invalid:\n" + describe(violations));

    rng_.seed(cfg_.seed);
    trace_.cfg = cfg_;
    trace_.events.clear();
    emit_config();

    for (const auto& spec : cfg_.nodes) {
      NodeRt rt;
      rt.spec = spec;
      rt.script = materialize_churn(spec, cfg_, cfg_.seed);
      nodes_.emplace(spec.id, std::move(rt));
    }
    for (auto& [id, rt] : nodes_) {
      if (rt.script.starts_up()) schedule_churn(0, id, true);
      for (const auto& tr : rt.script.transitions)
        if (tr.at <= cfg_.max_virtual_time) schedule_churn(tr.at, id, tr.up);
    }
    if (cfg_.merge_time) {
      Pending ev;
      ev.at = *cfg_.merge_time;
      ev.prio = 0;
      ev.kind = Pending::Kind::Merge;
      push(ev);
    }

    VirtualTime last_t = 0;
    std::string end_reason = "idle";
    while (!queue_.empty()) {
      Pending ev = queue_.top();
      queue_.pop();
      if (ev.at > cfg_.max_virtual_time) {
        end_reason = "horizon";
        last_t = cfg_.max_virtual_time;
        break;
      }
      last_t = ev.at;
      dispatch(ev);
      if (quiescent()) {
        end_reason = "quiescence";
        break;
      }
    }

    TraceEvent end;
    end.t = last_t;
    end.seq = next_record_seq_++;
    end.kind = TraceKind::End;
    end.note = end_reason;
    trace_.events.push_back(end);
    return std::move(trace_);
  }

 private:
  struct Pending {
    VirtualTime at = 0;
    int prio = 0;  // merge 0, down 1, up 2, deliver 3, timer 4
    std::uint64_t seq = 0;
    enum class Kind { Merge, ChurnDown, ChurnUp, Deliver, TimerFire } kind =
        Kind::Merge;
    NodeId node = kNoNode;
    std::uint64_t incarnation = 0;   // timer validity
    std::uint64_t round_index = 0;   // timer
    BeepMsg msg;                     // deliver
    NodeId sender = kNoNode;         // deliver
    VirtualTime sent_at = 0;         // deliver
    VirtualTime arrived_at = 0;      // deliver: first scheduled arrival
  };

  struct PendingAfter {
    bool operator()(const Pending& a, const Pending& b) const {
      if (a.at != b.at) return a.at > b.at;
      if (a.prio != b.prio) return a.prio > b.prio;
      return a.seq > b.seq;
    }
  };

  struct NodeRt {
    NodeSpec spec;
    ChurnScript script;
    std::unique_ptr<Node> node;  // null while down
    std::uint64_t incarnation = 0;
    VirtualTime up_since = -1;
    VirtualTime next_free = 0;
    std::optional<NodeId> latest_handshake;
  };

  void push(Pending ev) {
    ev.seq = next_event_seq_++;
    queue_.push(ev);
  }

  void schedule_churn(VirtualTime at, NodeId id, bool up) {
    Pending ev;
    ev.at = at;
    ev.prio = up ? 2 : 1;
    ev.kind = up ? Pending::Kind::ChurnUp : Pending::Kind::ChurnDown;
    ev.node = id;
    ++churn_pending_;
    push(ev);
  }

  void dispatch(const Pending& ev) {
    switch (ev.kind) {
      case Pending::Kind::Merge:
        merged_ = true;
        check_merge_preconditions();
        emit_simple(ev.at, kNoNode, TraceKind::Merge);
        break;
      case Pending::Kind::ChurnDown: {
        --churn_pending_;
        NodeRt& rt = nodes_.at(ev.node);
        if (!rt.node) break;
        rt.node.reset();  // no persistent memory: the state dies with it
        rt.up_since = -1;
        rt.latest_handshake.reset();
        ++rt.incarnation;
        emit_simple(ev.at, ev.node, TraceKind::Down);
        break;
      }
      case Pending::Kind::ChurnUp: {
        --churn_pending_;
        NodeRt& rt = nodes_.at(ev.node);
        if (rt.node) break;
        ++rt.incarnation;
        rt.up_since = ev.at;
        rt.next_free = ev.at + cfg_.on_timer_cost;
        LocalTime local = node_local(rt, ev.at);
        auto init = Node::init(node_params_for(cfg_, rt.spec), rt.spec.id, local);
        rt.node = std::make_unique<Node>(std::move(init.node));
        TraceEvent rec = node_event(ev.at, rt, TraceKind::Up);
        rec.local = local;
        trace_.events.push_back(rec);
        handle_actions(ev.at, rt, init.actions, rec.digest);
        schedule_timer(rt, 1);
        break;
      }
      case Pending::Kind::TimerFire: {
        NodeRt& rt = nodes_.at(ev.node);
        if (!rt.node || rt.incarnation != ev.incarnation) break;  // stale
        if (ev.at < rt.next_free) {
          Pending later = ev;
          later.at = rt.next_free;
          push(later);
          break;
        }
        LocalTime local = node_local(rt, ev.at);
        auto actions = rt.node->on_round_timer(local);
        rt.next_free = ev.at + cfg_.on_timer_cost;
        TraceEvent rec = node_event(ev.at, rt, TraceKind::Timer);
        rec.local = local;
        rec.round_index = ev.round_index;
        trace_.events.push_back(rec);
        handle_actions(ev.at, rt, actions, rec.digest);
        schedule_timer(rt, ev.round_index + 1);
        break;
      }
      case Pending::Kind::Deliver: {
        NodeRt& rt = nodes_.at(ev.node);
        if (!rt.node) {
          emit_drop(ev, "target down");
          break;
        }
        if (rt.up_since > ev.sent_at) {
          emit_drop(ev, "target not up across the delivery window");
          break;
        }
        if (ev.at < rt.next_free) {
          Pending later = ev;
          later.at = rt.next_free;
          push(later);
          break;
        }
        LocalTime local = node_local(rt, ev.at);
        auto actions = rt.node->on_beep_received(ev.msg, local);
        rt.next_free = ev.at + cfg_.on_msg_cost;
        TraceEvent rec = node_event(ev.at, rt, TraceKind::Deliver);
        rec.local = local;
        rec.msg = ev.msg;
        rec.from = ev.sender;
        rec.sent_at = ev.sent_at;
        rec.arrived_at = ev.arrived_at;
        trace_.events.push_back(rec);
        handle_actions(ev.at, rt, actions, rec.digest);
        break;
      }
    }
  }

  void handle_actions(VirtualTime t, NodeRt& rt,
                      const std::vector<NodeAction>& actions,
                      std::uint64_t digest) {
    for (const auto& a : actions) {
      switch (a.kind) {
        case ActionKind::Broadcast: {
          TraceEvent rec;
          rec.t = t;
          rec.seq = next_record_seq_++;
          rec.node = rt.spec.id;
          rec.kind = TraceKind::Broadcast;
          rec.msg = a.msg;
          rec.copies = a.copies;
          rec.digest = digest;
          trace_.events.push_back(rec);
          broadcast(t, rt, a.msg, a.copies);
          break;
        }
        case ActionKind::Handshake: {
          rt.latest_handshake = a.target;
          TraceEvent rec;
          rec.t = t;
          rec.seq = next_record_seq_++;
          rec.node = rt.spec.id;
          rec.kind = TraceKind::Handshake;
          rec.target = a.target;
          rec.digest = digest;
          trace_.events.push_back(rec);
          break;
        }
        case ActionKind::BecameLeader: {
          TraceEvent rec;
          rec.t = t;
          rec.seq = next_record_seq_++;
          rec.node = rt.spec.id;
          rec.kind = TraceKind::BecameLeader;
          rec.rounds_as_leading = rt.node->rounds_as_leading();
          rec.tie = rt.node->rank().tie.value_or(LeaderTie{});
          rec.digest = digest;
          trace_.events.push_back(rec);
          break;
        }
        case ActionKind::SteppedDown:
          break;  // no step-down path in the protocol as implemented
      }
    }
  }

  void broadcast(VirtualTime t, const NodeRt& sender, const BeepMsg& msg,
                 std::uint32_t copies) {
    const VirtualTime max_delay =
        static_cast<VirtualTime>(cfg_.delay_multiplier) * cfg_.msg_delay;
    std::uniform_int_distribution<VirtualTime> delay(1, max_delay);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (const auto& spec : cfg_.nodes) {
      if (spec.id == sender.spec.id) continue;
      if (!merged_ && spec.region != sender.spec.region) continue;
      for (std::uint32_t c = 0; c < copies; ++c) {
        if (cfg_.lossy && coin(rng_) < cfg_.loss_prob) continue;
        VirtualTime d = cfg_.worst_case_delay ? max_delay : delay(rng_);
        Pending ev;
        ev.at = t + d;
        ev.prio = 3;
        ev.kind = Pending::Kind::Deliver;
        ev.node = spec.id;
        ev.msg = msg;
        ev.sender = sender.spec.id;
        ev.sent_at = t;
        ev.arrived_at = t + d;
        push(ev);
      }
    }
  }

  void schedule_timer(const NodeRt& rt, std::uint64_t k) {
    Pending ev;
    ev.at = rt.up_since + kth_round_delay(rt.spec.clock, k);
    ev.prio = 4;
    ev.kind = Pending::Kind::TimerFire;
    ev.node = rt.spec.id;
    ev.incarnation = rt.incarnation;
    ev.round_index = k;
    if (ev.at <= cfg_.max_virtual_time) push(ev);
  }

  LocalTime node_local(const NodeRt& rt, VirtualTime t) const {
    return local_time(rt.spec.clock, rt.spec.local_offset, t);
  }

  TraceEvent node_event(VirtualTime t, const NodeRt& rt, TraceKind kind) {
    TraceEvent rec;
    rec.t = t;
    rec.seq = next_record_seq_++;
    rec.node = rt.spec.id;
    rec.kind = kind;
    StateSummary st;
    st.cnt_rounds = rt.node->cnt_rounds();
    st.rounds_as_leading = rt.node->rounds_as_leading();
    st.pl0_del_cnt = rt.node->pl0_del_cnt();
    st.last_lead_msg = rt.node->last_lead_msg();
    st.rank = rt.node->rank();
    st.leader = rt.node->is_leader();
    st.best = rt.node->pl().empty() ? kNoNode : rt.node->pl().peek_best().id;
    st.pl_size = static_cast<std::uint32_t>(rt.node->pl().size());
    rec.state = st;
    rec.digest = rt.node->state_digest();
    return rec;
  }

  void emit_simple(VirtualTime t, NodeId node, TraceKind kind) {
    TraceEvent rec;
    rec.t = t;
    rec.seq = next_record_seq_++;
    rec.node = node;
    rec.kind = kind;
    trace_.events.push_back(rec);
  }

  void emit_drop(const Pending& ev, const std::string& why) {
    TraceEvent rec;
    rec.t = ev.at;
    rec.seq = next_record_seq_++;
    rec.node = ev.node;
    rec.kind = TraceKind::Drop;
    rec.msg = ev.msg;
    rec.from = ev.sender;
    rec.sent_at = ev.sent_at;
    rec.note = why;
    trace_.events.push_back(rec);
  }

  void emit_config() {
    TraceEvent rec;
    rec.t = 0;
    rec.seq = next_record_seq_++;
    rec.kind = TraceKind::Config;
    trace_.events.push_back(rec);
  }

  void check_merge_preconditions() {
    std::map<int, bool> region_has_leader;
    for (const auto& spec : cfg_.nodes) region_has_leader[spec.region];
    for (const auto& [id, rt] : nodes_)
      if (rt.node && rt.node->is_leader())
        region_has_leader[rt.spec.region] = true;
    for (const auto& [region, has] : region_has_leader)
      if (!has)
        throw ScenarioError(
            "merge at t=" + std::to_string(*cfg_.merge_time) + ": region " +
            std::to_string(region) + " has no elected leader yet");
  }

  // The run has settled once no churn or merge is pending, someone leads,
  // and every other live node's latest handshake points at the strongest
  // leader in the tie order.
  bool quiescent() const {
    if (churn_pending_ > 0) return false;
    if (cfg_.merge_time && !merged_) return false;
    const NodeRt* winner = nullptr;
    for (const auto& [id, rt] : nodes_) {
      if (!rt.node || !rt.node->is_leader()) continue;
      if (!winner ||
          compare_ranked(rt.node->rank(), id, winner->node->rank(),
                         winner->spec.id) > 0)
        winner = &rt;
    }
    if (!winner) return false;
    for (const auto& [id, rt] : nodes_) {
      if (!rt.node || id == winner->spec.id) continue;
      if (rt.latest_handshake != winner->spec.id) return false;
    }
    return true;
  }

  SimConfig cfg_;
  std::mt19937_64 rng_;
  std::map<NodeId, NodeRt> nodes_;
  std::priority_queue<Pending, std::vector<Pending>, PendingAfter> queue_;
  Trace trace_;
  std::uint64_t next_event_seq_ = 0;
  std::uint64_t next_record_seq_ = 0;
  int churn_pending_ = 0;
  bool merged_ = false;
};

inline Trace run_sim(SimConfig cfg) { return Simulator(std::move(cfg)).run(); }

// Builds a config whose trace records two isolated regions electing
// independently and then becoming one broadcast domain at merge_time. Node
// ids must not collide across the two inputs; timing parameters must agree.
inline SimConfig merge_scenario(const SimConfig& a, const SimConfig& b,
                                VirtualTime merge_time) {
  for (const auto& na : a.nodes)
    for (const auto& nb : b.nodes)
      if (na.id == nb.id)
        throw ConfigError("merge: node id " + std::to_string(na.id) +
                          " present in both regions");
  auto check = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("merge: regions disagree on ") + what);
  };
  check(a.max_ratio == b.max_ratio, "maxRatio");
  check(a.msg_delay == b.msg_delay, "msgDelay");
  check(a.delay_multiplier == b.delay_multiplier, "delayMultiplier");
  check(a.w == b.w, "w");
  check(a.num_of_copies == b.num_of_copies, "numOfCopies");
  SimConfig out = a;
  out.name = a.name + "+" + b.name + "-merge";
  for (NodeSpec& n : out.nodes) n.region = 0;
  for (NodeSpec n : b.nodes) {
    n.region = 1;
    out.nodes.push_back(n);
  }
  out.merge_time = merge_time;
  out.max_virtual_time = std::max(a.max_virtual_time, b.max_virtual_time);
  return out;
}

}  // namespace pale
