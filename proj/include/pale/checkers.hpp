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
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pale/naive_node.hpp"
#include "pale/trace.hpp"

namespace pale {

// Trace-level verdicts. Every checker is a pure function over an immutable
// trace and re-derives what it asserts instead of trusting engine internals.

struct Witness {
  VirtualTime from = 0;
  VirtualTime to = 0;
  std::vector<NodeId> nodes;
  std::string detail;
};

struct Verdict {
  std::string property;
  bool pass = false;
  bool downgraded = false;  // lossy run: delivery is not guaranteed there
  std::optional<double> measured;
  std::optional<Witness> witness;  // present iff !pass
  std::string note;
};

enum class Regime { Worst, Monotonic, Mild };

inline const char* to_cstr(Regime r) {
  switch (r) {
    case Regime::Worst: return "worst";
    case Regime::Monotonic: return "monotonic";
    case Regime::Mild: return "mild";
  }
  return "?";
}

namespace detail {

inline Verdict make_pass(const Trace& trace, std::string property,
                         std::string note = {}) {
  Verdict v;
  v.property = std::move(property);
  v.pass = true;
  v.downgraded = trace.cfg.lossy;
  v.note = std::move(note);
  return v;
}

inline Verdict make_fail(const Trace& trace, std::string property, Witness w,
                         std::string note = {}) {
  Verdict v;
  v.property = std::move(property);
  v.pass = false;
  v.downgraded = trace.cfg.lossy;
  v.witness = std::move(w);
  v.note = std::move(note);
  return v;
}

// Live/leader/handshake state rebuilt record by record.
struct Liveness {
  struct St {
    bool up = false;
    bool leader = false;
    std::uint64_t incarnation = 0;
    VirtualTime up_since = -1;
    LeaderTie tie;
  };
  std::map<NodeId, St> nodes;

  void apply(const TraceEvent& ev) {
    switch (ev.kind) {
      case TraceKind::Up: {
        St& s = nodes[ev.node];
        s.up = true;
        s.leader = false;
        s.up_since = ev.t;
        ++s.incarnation;
        break;
      }
      case TraceKind::Down: {
        St& s = nodes[ev.node];
        s.up = false;
        s.leader = false;
        break;
      }
      case TraceKind::BecameLeader: {
        St& s = nodes[ev.node];
        s.leader = true;
        s.tie = ev.tie;
        break;
      }
      default:
        break;
    }
  }
};

}  // namespace detail

// At any instant, at most one live node per broadcast domain may consider
// itself a leader. For merge traces only the pre-merge (per-region) part is
// checked: keeping both old leaders alive after a merge is the documented
// behavior, slaves converge by re-handshaking instead.
inline Verdict check_uniqueness(const Trace& trace) {
  detail::Liveness live;
  std::map<NodeId, int> region;
  for (const auto& n : trace.cfg.nodes) region[n.id] = n.region;
  for (const auto& ev : trace.events) {
    if (ev.kind == TraceKind::Merge)
      return detail::make_pass(trace, "uniqueness",
                               "checked up to the merge point only");
    live.apply(ev);
    std::map<int, std::vector<NodeId>> leaders;
    for (const auto& [id, st] : live.nodes)
      if (st.up && st.leader) leaders[region[id]].push_back(id);
    for (const auto& [reg, ids] : leaders) {
      if (ids.size() > 1) {
        Witness w;
        w.from = ev.t;
        w.to = ev.t;
        w.nodes = ids;
        std::ostringstream os;
        os << ids.size() << " concurrent leaders in region " << reg;
        w.detail = os.str();
        return detail::make_fail(trace, "uniqueness", std::move(w));
      }
    }
  }
  return detail::make_pass(trace, "uniqueness");
}

// All live nodes that hold a still-valid handshake hold it with the same
// node. A handshake claim stays valid while its target is up, in the same
// incarnation, and a leader.
inline Verdict check_agreement(const Trace& trace) {
  detail::Liveness live;
  std::map<NodeId, int> region;
  for (const auto& n : trace.cfg.nodes) region[n.id] = n.region;
  struct Claim {
    NodeId target = kNoNode;
    std::uint64_t target_incarnation = 0;
  };
  std::map<NodeId, std::optional<Claim>> claims;
  for (const auto& ev : trace.events) {
    if (ev.kind == TraceKind::Merge)
      return detail::make_pass(trace, "agreement",
                               "checked up to the merge point only");
    live.apply(ev);
    if (ev.kind == TraceKind::Up || ev.kind == TraceKind::Down)
      claims[ev.node].reset();  // state (and the bond) dies with the node
    if (ev.kind == TraceKind::Handshake)
      claims[ev.node] = Claim{ev.target, live.nodes[ev.target].incarnation};

    std::map<int, std::pair<NodeId, NodeId>> seen;  // region -> (claimant, target)
    for (const auto& [id, claim] : claims) {
      if (!claim || !live.nodes[id].up) continue;
      const auto& target_state = live.nodes[claim->target];
      bool valid = target_state.up && target_state.leader &&
                   target_state.incarnation == claim->target_incarnation;
      if (!valid) continue;
      auto [it, inserted] =
          seen.emplace(region[id], std::make_pair(id, claim->target));
      if (!inserted && it->second.second != claim->target) {
        Witness w;
        w.from = ev.t;
        w.to = ev.t;
        w.nodes = {it->second.first, id};
        std::ostringstream os;
        os << "node " << it->second.first << " is bound to "
           << it->second.second << " while node " << id << " is bound to "
           << claim->target;
        w.detail = os.str();
        return detail::make_fail(trace, "agreement", std::move(w));
      }
    }
  }
  return detail::make_pass(trace, "agreement");
}

// Election must land within n * k * 2 * (ceil(maxRatio)+1)^2 rounds of the
// designated stable node, where k is the largest physScore deficit divided
// by w (at least 1).
inline Verdict check_termination_bound(const Trace& trace,
                                       const SimConfig& cfg) {
  if (!cfg.stable_node)
    throw ConfigError("termination check needs a designated stable node");
  const NodeSpec* s = cfg.find(*cfg.stable_node);
  if (!s) throw ConfigError("designated stable node is not in the config");

  double k = 1.0;
  for (const auto& v : cfg.nodes)
    if (v.id != s->id)
      k = std::max(k, std::ceil((v.phys_score - s->phys_score) / cfg.w));
  double ratio_term = static_cast<double>(cfg.max_ratio_ceil()) + 1.0;
  double bound = static_cast<double>(cfg.nodes.size()) * k * 2.0 * ratio_term *
                 ratio_term;

  std::uint64_t s_rounds = 0;
  for (const auto& ev : trace.events) {
    if (ev.kind == TraceKind::Timer && ev.node == s->id) ++s_rounds;
    if (ev.kind == TraceKind::BecameLeader) {
      Verdict v = detail::make_pass(trace, "termination-bound");
      v.measured = static_cast<double>(s_rounds);
      if (static_cast<double>(s_rounds) > bound) {
        Witness w;
        w.from = 0;
        w.to = ev.t;
        w.nodes = {ev.node};
        std::ostringstream os;
        os << "elected after " << s_rounds << " stable-node rounds, bound "
           << bound;
        w.detail = os.str();
        v = detail::make_fail(trace, "termination-bound", std::move(w));
        v.measured = static_cast<double>(s_rounds);
      }
      std::ostringstream os;
      os << "bound " << bound << " rounds of node " << s->id;
      v.note = os.str();
      return v;
    }
  }
  Witness w;
  w.from = 0;
  w.to = trace.events.empty() ? 0 : trace.events.back().t;
  w.detail = "no election in the whole trace";
  Verdict v = detail::make_fail(trace, "termination-bound", std::move(w));
  v.measured = static_cast<double>(s_rounds);
  return v;
}

// Message-complexity measurements for the three regimes.
//   worst:     per-round broadcast count never exceeds n
//   monotonic: total broadcasts never exceed n * maxRound
//   mild:      broadcasts between a leader failure and the next election
//              never exceed maxRound
inline Verdict measure_messages(const Trace& trace, Regime regime) {
  const std::size_t n = trace.cfg.nodes.size();
  const std::uint32_t max_round = trace.cfg.max_round();
  switch (regime) {
    case Regime::Worst: {
      VirtualTime window = 0;
      for (const auto& node : trace.cfg.nodes)
        window = std::max(
            window, static_cast<VirtualTime>(effective_round(node.clock)));
      if (window <= 0) throw ConfigError("worst regime: bad round length");
      std::map<VirtualTime, std::size_t> per_round;
      for (const auto& ev : trace.events)
        if (ev.kind == TraceKind::Broadcast) ++per_round[ev.t / window];
      std::size_t worst = 0;
      VirtualTime worst_at = 0;
      for (const auto& [slot, count] : per_round)
        if (count > worst) {
          worst = count;
          worst_at = slot * window;
        }
      Verdict v = detail::make_pass(trace, "messages-worst");
      v.measured = static_cast<double>(worst);
      if (worst > n) {
        Witness w;
        w.from = worst_at;
        w.to = worst_at + window;
        std::ostringstream os;
        os << worst << " broadcasts in one round window, n = " << n;
        w.detail = os.str();
        v = detail::make_fail(trace, "messages-worst", std::move(w));
        v.measured = static_cast<double>(worst);
      }
      return v;
    }
    case Regime::Monotonic: {
      std::size_t total = 0;
      for (const auto& ev : trace.events)
        if (ev.kind == TraceKind::Broadcast) ++total;
      Verdict v = detail::make_pass(trace, "messages-monotonic");
      v.measured = static_cast<double>(total);
      if (total > n * max_round) {
        Witness w;
        w.from = 0;
        w.to = trace.events.back().t;
        std::ostringstream os;
        os << total << " broadcasts, bound n*maxRound = " << n * max_round;
        w.detail = os.str();
        v = detail::make_fail(trace, "messages-monotonic", std::move(w));
        v.measured = static_cast<double>(total);
      }
      return v;
    }
    case Regime::Mild: {
      detail::Liveness live;
      std::optional<VirtualTime> failure_at;
      std::optional<std::uint64_t> failure_seq;
      for (const auto& ev : trace.events) {
        bool was_leader =
            ev.kind == TraceKind::Down && live.nodes[ev.node].leader;
        live.apply(ev);
        if (was_leader) {
          failure_at = ev.t;
          failure_seq = ev.seq;
          break;
        }
      }
      if (!failure_seq)
        throw ConfigError("mild regime: trace contains no leader failure");
      // Broadcasts after the failure, up to and including the new leader's
      // promotion beep (which is recorded right after its BecameLeader).
      std::size_t count = 0;
      bool closed = false;
      bool lead_seen = false;
      for (const auto& ev : trace.events) {
        if (ev.seq <= *failure_seq) continue;
        if (closed) break;
        if (ev.kind == TraceKind::Broadcast) {
          ++count;
          if (lead_seen) closed = true;  // promotion beep follows the event
        }
        if (ev.kind == TraceKind::BecameLeader) lead_seen = true;
      }
      if (!lead_seen)
        throw ConfigError("mild regime: no re-election after leader failure");
      Verdict v = detail::make_pass(trace, "messages-mild");
      v.measured = static_cast<double>(count);
      if (count > max_round) {
        Witness w;
        w.from = *failure_at;
        w.to = trace.events.back().t;
        std::ostringstream os;
        os << count << " broadcasts after leader failure, bound maxRound = "
           << max_round;
        w.detail = os.str();
        v = detail::make_fail(trace, "messages-mild", std::move(w));
        v.measured = static_cast<double>(count);
      }
      return v;
    }
  }
  throw ConfigError("unknown regime");
}

// Sender-side handling-delay bound: between broadcasting a message and the
// receiver finishing handling it, the sender runs at most ceil(maxRatio)+1
// of its own rounds.
inline Verdict check_handling_delay_bound(const Trace& trace) {
  const std::uint64_t bound = trace.cfg.max_ratio_ceil() + 1;
  std::map<NodeId, std::vector<std::pair<std::uint64_t, VirtualTime>>> timers;
  for (const auto& ev : trace.events)
    if (ev.kind == TraceKind::Timer)
      timers[ev.node].push_back({ev.seq, ev.t});
  for (const auto& ev : trace.events) {
    if (ev.kind != TraceKind::Deliver) continue;
    const auto& ts = timers[ev.from];
    std::uint64_t count = 0;
    for (const auto& [seq, t] : ts)
      if (t > ev.sent_at && seq < ev.seq) ++count;
    if (count > bound) {
      Witness w;
      w.from = ev.sent_at;
      w.to = ev.t;
      w.nodes = {ev.from, ev.node};
      std::ostringstream os;
      os << "sender " << ev.from << " ran " << count
         << " rounds while its beep was in flight to " << ev.node
         << ", bound " << bound;
      w.detail = os.str();
      return detail::make_fail(trace, "handling-delay-bound", std::move(w));
    }
  }
  return detail::make_pass(trace, "handling-delay-bound");
}

// Receiver-side gap bound: between handling two beeps a sender emitted in
// consecutive rounds of its own, a receiver runs at most 2*maxRatio+1 rounds.
inline Verdict check_beep_gap_bound(const Trace& trace) {
  const double bound = 2.0 * trace.cfg.max_ratio + 1.0;

  // Assign each broadcast a per-incarnation send slot: the init beep is slot
  // 0 and each timer round advances the slot by one. Slots carry the sender
  // incarnation so pairs never span a failure.
  struct Slot {
    std::uint64_t incarnation = 0;
    std::uint64_t index = 0;
  };
  std::map<NodeId, std::map<VirtualTime, Slot>> send_slot;
  {
    std::map<NodeId, Slot> slot;
    for (const auto& ev : trace.events) {
      if (ev.kind == TraceKind::Up) {
        ++slot[ev.node].incarnation;
        slot[ev.node].index = 0;
      }
      if (ev.kind == TraceKind::Timer) ++slot[ev.node].index;
      if (ev.kind == TraceKind::Broadcast)
        send_slot[ev.node][ev.t] = slot[ev.node];
    }
  }

  // Per (receiver, sender): deliveries in record order.
  struct Delivery {
    std::uint64_t seq;
    Slot slot;
    VirtualTime t;
  };
  std::map<std::pair<NodeId, NodeId>, std::vector<Delivery>> deliveries;
  std::map<NodeId, std::vector<std::pair<std::uint64_t, TraceKind>>> node_marks;
  for (const auto& ev : trace.events) {
    if (ev.kind == TraceKind::Deliver) {
      auto it = send_slot[ev.from].find(ev.sent_at);
      if (it == send_slot[ev.from].end()) continue;
      deliveries[{ev.node, ev.from}].push_back({ev.seq, it->second, ev.t});
    }
    if (ev.kind == TraceKind::Timer || ev.kind == TraceKind::Up ||
        ev.kind == TraceKind::Down)
      node_marks[ev.node].push_back({ev.seq, ev.kind});
  }

  for (const auto& [pair, list] : deliveries) {
    const auto& [receiver, sender] = pair;
    const auto& marks = node_marks[receiver];
    for (std::size_t i = 0; i + 1 < list.size(); ++i) {
      const Delivery& d1 = list[i];
      const Delivery& d2 = list[i + 1];
      if (d2.slot.incarnation != d1.slot.incarnation ||
          d2.slot.index != d1.slot.index + 1)
        continue;  // not consecutive sends of one incarnation
      std::uint64_t lo = std::min(d1.seq, d2.seq);
      std::uint64_t hi = std::max(d1.seq, d2.seq);
      std::uint64_t rounds = 0;
      bool interrupted = false;
      for (const auto& [seq, kind] : marks) {
        if (seq <= lo || seq >= hi) continue;
        if (kind == TraceKind::Timer)
          ++rounds;
        else
          interrupted = true;  // receiver churned in between
      }
      if (interrupted) continue;
      if (static_cast<double>(rounds) > bound) {
        Witness w;
        w.from = std::min(d1.t, d2.t);
        w.to = std::max(d1.t, d2.t);
        w.nodes = {receiver, sender};
        std::ostringstream os;
        os << "receiver " << receiver << " ran " << rounds
           << " rounds between consecutive beeps of " << sender << ", bound "
           << bound;
        w.detail = os.str();
        return detail::make_fail(trace, "beep-gap-bound", std::move(w));
      }
    }
  }
  return detail::make_pass(trace, "beep-gap-bound");
}

// Transport sanity re-derived from the trace alone: every delivery arrives
// within D*msgDelay of its send, and only to nodes that were up for the whole
// flight.
inline Verdict check_delivery_bound(const Trace& trace) {
  const VirtualTime limit =
      static_cast<VirtualTime>(trace.cfg.delay_multiplier) *
      trace.cfg.msg_delay;
  detail::Liveness live;
  for (const auto& ev : trace.events) {
    live.apply(ev);
    if (ev.kind != TraceKind::Deliver) continue;
    VirtualTime flight = ev.arrived_at - ev.sent_at;
    const auto& st = live.nodes[ev.node];
    bool ok = flight > 0 && flight <= limit && st.up &&
              st.up_since <= ev.sent_at;
    if (!ok) {
      Witness w;
      w.from = ev.sent_at;
      w.to = ev.t;
      w.nodes = {ev.from, ev.node};
      std::ostringstream os;
      os << "delivery flight " << flight << " (limit " << limit
         << "), receiver up_since " << st.up_since;
      w.detail = os.str();
      return detail::make_fail(trace, "delivery-bound", std::move(w));
    }
  }
  return detail::make_pass(trace, "delivery-bound");
}

// Per-incarnation round counts match the configured clock rate within one
// round.
inline Verdict check_drift_bound(const Trace& trace) {
  struct Window {
    VirtualTime up = -1;
    std::uint64_t rounds = 0;
  };
  std::map<NodeId, Window> open;
  VirtualTime last_t = 0;
  auto close = [&](NodeId id, VirtualTime end,
                   const Window& win) -> std::optional<Witness> {
    const NodeSpec* spec = trace.cfg.find(id);
    if (!spec || win.up < 0) return std::nullopt;
    long double expect = static_cast<long double>(end - win.up) /
                         effective_round(spec->clock);
    if (std::fabs(static_cast<double>(win.rounds) -
                  static_cast<double>(expect)) > 1.000001) {
      Witness w;
      w.from = win.up;
      w.to = end;
      w.nodes = {id};
      std::ostringstream os;
      os << "node " << id << " fired " << win.rounds << " rounds over "
         << (end - win.up) << " ticks, expected about "
         << static_cast<double>(expect);
      w.detail = os.str();
      return w;
    }
    return std::nullopt;
  };
  for (const auto& ev : trace.events) {
    last_t = std::max(last_t, ev.t);
    if (ev.kind == TraceKind::Up) open[ev.node] = {ev.t, 0};
    if (ev.kind == TraceKind::Timer) ++open[ev.node].rounds;
    if (ev.kind == TraceKind::Down) {
      if (auto w = close(ev.node, ev.t, open[ev.node]))
        return detail::make_fail(trace, "drift-bound", std::move(*w));
      open.erase(ev.node);
    }
  }
  for (const auto& [id, win] : open)
    if (auto w = close(id, last_t, win))
      return detail::make_fail(trace, "drift-bound", std::move(*w));
  return detail::make_pass(trace, "drift-bound");
}

// Every node that joins an already-elected region must bind to the leader
// within ceil(maxRatio) + maxRound of its own rounds, provided both it and
// the leader stay up that long.
inline Verdict check_joiner_latency(const Trace& trace) {
  const std::uint64_t bound =
      trace.cfg.max_ratio_ceil() + trace.cfg.max_round();
  detail::Liveness live;
  struct Obligation {
    NodeId leader = kNoNode;
    std::uint64_t leader_incarnation = 0;
    std::uint64_t rounds = 0;
    VirtualTime up_at = 0;
  };
  std::map<NodeId, Obligation> open;
  std::uint64_t applicable = 0;
  std::uint64_t worst = 0;
  for (const auto& ev : trace.events) {
    bool leader_present_before = false;
    NodeId leader_id = kNoNode;
    std::uint64_t leader_inc = 0;
    for (const auto& [id, st] : live.nodes)
      if (st.up && st.leader) {
        leader_present_before = true;
        leader_id = id;
        leader_inc = st.incarnation;
      }
    live.apply(ev);
    switch (ev.kind) {
      case TraceKind::Up:
        if (leader_present_before) {
          open[ev.node] = Obligation{leader_id, leader_inc, 0, ev.t};
          ++applicable;
        }
        break;
      case TraceKind::Down: {
        open.erase(ev.node);  // joiner died: not applicable
        for (auto it = open.begin(); it != open.end();) {
          if (it->second.leader == ev.node)
            it = open.erase(it);  // leader died: window void
          else
            ++it;
        }
        break;
      }
      case TraceKind::Timer: {
        auto it = open.find(ev.node);
        if (it == open.end()) break;
        ++it->second.rounds;
        if (it->second.rounds > bound) {
          Witness w;
          w.from = it->second.up_at;
          w.to = ev.t;
          w.nodes = {ev.node, it->second.leader};
          std::ostringstream os;
          os << "joiner " << ev.node << " ran " << it->second.rounds
             << " rounds without a handshake, bound " << bound;
          w.detail = os.str();
          return detail::make_fail(trace, "joiner-latency", std::move(w));
        }
        break;
      }
      case TraceKind::Handshake: {
        auto it = open.find(ev.node);
        if (it != open.end() && ev.target == it->second.leader) {
          worst = std::max(worst, it->second.rounds);
          open.erase(it);
        }
        break;
      }
      default:
        break;
    }
  }
  Verdict v = detail::make_pass(trace, "joiner-latency");
  v.measured = static_cast<double>(worst);
  std::ostringstream os;
  os << applicable << " applicable joins, worst latency " << worst
     << " rounds, bound " << bound;
  v.note = os.str();
  return v;
}

// Every promotion happens at exactly roundsAsLeading == 2*ceil(maxRatio)+2.
inline Verdict check_leader_threshold(const Trace& trace) {
  const std::uint32_t want = trace.cfg.max_round();
  for (const auto& ev : trace.events) {
    if (ev.kind != TraceKind::BecameLeader) continue;
    if (ev.rounds_as_leading != want) {
      Witness w;
      w.from = ev.t;
      w.to = ev.t;
      w.nodes = {ev.node};
      std::ostringstream os;
      os << "node " << ev.node << " promoted at roundsAsLeading "
         << ev.rounds_as_leading << ", threshold " << want;
      w.detail = os.str();
      return detail::make_fail(trace, "leader-threshold", std::move(w));
    }
  }
  return detail::make_pass(trace, "leader-threshold");
}

// Replays the recorded event sequence through the plain reference
// transcription and demands the identical state digest after every event and
// the identical emitted actions.
inline Verdict oracle_replay(const Trace& trace) {
  std::map<NodeId, NaiveNode> nodes;
  auto fail_at = [&](const TraceEvent& ev, const std::string& what) {
    Witness w;
    w.from = ev.t;
    w.to = ev.t;
    w.nodes = {ev.node};
    w.detail = what + " at record " + std::to_string(ev.seq);
    return detail::make_fail(trace, "oracle-replay", std::move(w));
  };

  std::vector<NodeAction> pending;
  NodeId pending_node = kNoNode;
  std::size_t pending_used = 0;
  auto flush_pending = [&]() -> std::optional<std::string> {
    if (pending_used != pending.size())
      return "reference emitted " + std::to_string(pending.size()) +
             " actions but the trace recorded " + std::to_string(pending_used);
    pending.clear();
    pending_used = 0;
    pending_node = kNoNode;
    return std::nullopt;
  };

  for (const auto& ev : trace.events) {
    switch (ev.kind) {
      case TraceKind::Up: {
        if (auto err = flush_pending()) return fail_at(ev, *err);
        const NodeSpec* spec = trace.cfg.find(ev.node);
        if (!spec) return fail_at(ev, "unknown node");
        auto init = NaiveNode::init(node_params_for(trace.cfg, *spec), ev.node,
                                    ev.local);
        nodes.erase(ev.node);
        nodes.emplace(ev.node, init.node);
        if (nodes.at(ev.node).state_digest() != ev.digest)
          return fail_at(ev, "state digest diverged");
        pending = init.actions;
        pending_node = ev.node;
        break;
      }
      case TraceKind::Down:
        if (auto err = flush_pending()) return fail_at(ev, *err);
        nodes.erase(ev.node);
        break;
      case TraceKind::Timer: {
        if (auto err = flush_pending()) return fail_at(ev, *err);
        auto it = nodes.find(ev.node);
        if (it == nodes.end()) return fail_at(ev, "timer for a down node");
        pending = it->second.on_round_timer(ev.local);
        pending_node = ev.node;
        if (it->second.state_digest() != ev.digest)
          return fail_at(ev, "state digest diverged");
        break;
      }
      case TraceKind::Deliver: {
        if (auto err = flush_pending()) return fail_at(ev, *err);
        auto it = nodes.find(ev.node);
        if (it == nodes.end()) return fail_at(ev, "delivery to a down node");
        pending = it->second.on_beep_received(ev.msg, ev.local);
        pending_node = ev.node;
        if (it->second.state_digest() != ev.digest)
          return fail_at(ev, "state digest diverged");
        break;
      }
      case TraceKind::Broadcast: {
        if (ev.node != pending_node || pending_used >= pending.size())
          return fail_at(ev, "unexpected broadcast record");
        const NodeAction& a = pending[pending_used++];
        if (a.kind != ActionKind::Broadcast || a.msg != ev.msg ||
            a.copies != ev.copies)
          return fail_at(ev, "broadcast action diverged");
        break;
      }
      case TraceKind::Handshake: {
        if (ev.node != pending_node || pending_used >= pending.size())
          return fail_at(ev, "unexpected handshake record");
        const NodeAction& a = pending[pending_used++];
        if (a.kind != ActionKind::Handshake || a.target != ev.target)
          return fail_at(ev, "handshake action diverged");
        break;
      }
      case TraceKind::BecameLeader: {
        if (ev.node != pending_node || pending_used >= pending.size())
          return fail_at(ev, "unexpected promotion record");
        const NodeAction& a = pending[pending_used++];
        if (a.kind != ActionKind::BecameLeader)
          return fail_at(ev, "promotion action diverged");
        break;
      }
      case TraceKind::Config:
      case TraceKind::Drop:
      case TraceKind::Merge:
      case TraceKind::End:
        break;
    }
  }
  if (auto err = flush_pending()) {
    Witness w;
    w.detail = *err;
    return detail::make_fail(trace, "oracle-replay", std::move(w));
  }
  return detail::make_pass(trace, "oracle-replay");
}

// After a merge, all slaves must converge on the tie-order winner within
// 2*maxRound rounds of the slowest node.
inline Verdict check_merge_convergence(const Trace& trace) {
  detail::Liveness live;
  std::optional<VirtualTime> merge_at;
  NodeId winner = kNoNode;
  LeaderTie winner_tie;
  std::map<NodeId, NodeId> latest;
  std::uint64_t slow_rounds = 0;
  NodeId slowest = kNoNode;
  long double slowest_len = 0;
  for (const auto& n : trace.cfg.nodes) {
    long double len = effective_round(n.clock);
    if (len > slowest_len) {
      slowest_len = len;
      slowest = n.id;
    }
  }
  const std::uint64_t bound = 2ull * trace.cfg.max_round();

  auto all_converged = [&]() {
    for (const auto& [id, st] : live.nodes) {
      if (!st.up || id == winner) continue;
      auto it = latest.find(id);
      if (it == latest.end() || it->second != winner) return false;
    }
    return true;
  };

  for (const auto& ev : trace.events) {
    live.apply(ev);
    if (ev.kind == TraceKind::Handshake) latest[ev.node] = ev.target;
    if (ev.kind == TraceKind::Up || ev.kind == TraceKind::Down)
      latest.erase(ev.node);
    if (ev.kind == TraceKind::Merge) {
      merge_at = ev.t;
      bool any = false;
      for (const auto& [id, st] : live.nodes) {
        if (!st.up || !st.leader) continue;
        if (!any || compare(st.tie, winner_tie) > 0) {
          winner = id;
          winner_tie = st.tie;
          any = true;
        }
      }
      if (!any) {
        Witness w;
        w.from = ev.t;
        w.to = ev.t;
        w.detail = "merge with no live leaders";
        return detail::make_fail(trace, "merge-convergence", std::move(w));
      }
    }
    if (!merge_at) continue;
    if (ev.kind == TraceKind::Handshake && ev.target != winner) {
      Witness w;
      w.from = *merge_at;
      w.to = ev.t;
      w.nodes = {ev.node, ev.target};
      std::ostringstream os;
      os << "post-merge handshake to " << ev.target << " instead of winner "
         << winner;
      w.detail = os.str();
      return detail::make_fail(trace, "merge-convergence", std::move(w));
    }
    if (ev.kind == TraceKind::Timer && ev.node == slowest) {
      ++slow_rounds;
      if (slow_rounds > bound && !all_converged()) {
        Witness w;
        w.from = *merge_at;
        w.to = ev.t;
        std::ostringstream os;
        os << "not converged after " << slow_rounds
           << " rounds of the slowest node, bound " << bound;
        w.detail = os.str();
        return detail::make_fail(trace, "merge-convergence", std::move(w));
      }
      if (all_converged()) break;
    }
  }
  if (!merge_at) {
    Witness w;
    w.detail = "trace has no merge record";
    return detail::make_fail(trace, "merge-convergence", std::move(w));
  }
  if (!all_converged()) {
    Witness w;
    w.from = *merge_at;
    w.to = trace.events.back().t;
    w.detail = "run ended before all slaves converged";
    return detail::make_fail(trace, "merge-convergence", std::move(w));
  }
  Verdict v = detail::make_pass(trace, "merge-convergence");
  v.measured = static_cast<double>(slow_rounds);
  std::ostringstream os;
  os << "winner " << winner << ", converged within " << slow_rounds
     << " slowest-node rounds (bound " << bound << ")";
  v.note = os.str();
  return v;
}

inline json to_json(const Verdict& v) {
  json j;
  j["property"] = v.property;
  j["pass"] = v.pass;
  j["downgraded"] = v.downgraded;
  if (v.measured) j["measured"] = *v.measured;
  if (v.witness) {
    json w;
    w["from"] = v.witness->from;
    w["to"] = v.witness->to;
    w["nodes"] = v.witness->nodes;
    w["detail"] = v.witness->detail;
    j["witness"] = w;
  }
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

inline std::string summary_line(const Verdict& v) {
  std::ostringstream os;
  os << (v.pass ? (v.downgraded ? "pass (lossy)" : "pass") : "FAIL") << "  "
     << v.property;
  if (v.measured) os << "  measured=" << *v.measured;
  if (!v.note.empty()) os << "  (" << v.note << ")";
  if (v.witness)
    os << "  witness=[" << v.witness->from << ", " << v.witness->to << "] "
       << v.witness->detail;
  return os.str();
}

}  // namespace pale
