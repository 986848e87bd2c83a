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
#include <cstdint>
#include <cstring>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pale/errors.hpp"

namespace pale {

// Opaque totally ordered node identity (stands in for an IP/MAC address).
// 0 is reserved to mean "no node".
using NodeId = std::uint64_t;
inline constexpr NodeId kNoNode = 0;

// Global simulation time, integer ticks. All durations are tick counts.
using VirtualTime = std::int64_t;
// A node's own wall-clock reading, also integer ticks. Continues across
// failures of the same node.
using LocalTime = std::int64_t;

// Tie-break record a leader attaches to its beeps: the finite rank it held
// just before promotion, its round counter at promotion, and its id.
// Compared lexicographically, larger wins.
struct LeaderTie {
  double acc_rank = 0.0;
  std::uint64_t rounds_active = 0;
  NodeId id = kNoNode;

  friend bool operator==(const LeaderTie&, const LeaderTie&) = default;
};

inline int compare(const LeaderTie& a, const LeaderTie& b) {
  if (a.acc_rank != b.acc_rank) return a.acc_rank < b.acc_rank ? -1 : 1;
  if (a.rounds_active != b.rounds_active)
    return a.rounds_active < b.rounds_active ? -1 : 1;
  if (a.id != b.id) return a.id < b.id ? -1 : 1;
  return 0;
}

// Election rank: either a finite value or the distinguished Infinity held by
// leaders. Infinity compares greater than every finite rank; two infinities
// are ordered by their leader tie records.
struct Rank {
  double value = 0.0;  // meaningful only when !inf
  bool inf = false;
  std::optional<LeaderTie> tie;  // present iff inf

  static Rank finite(double v) { return Rank{v, false, std::nullopt}; }
  static Rank infinity(LeaderTie t) { return Rank{0.0, true, t}; }

  friend bool operator==(const Rank&, const Rank&) = default;
};

inline int compare(const Rank& a, const Rank& b) {
  if (a.inf != b.inf) return a.inf ? 1 : -1;
  if (a.inf) {
    // An infinite rank without a tie record orders below any with one.
    if (a.tie.has_value() != b.tie.has_value()) return a.tie ? 1 : -1;
    if (!a.tie) return 0;
    return compare(*a.tie, *b.tie);
  }
  if (a.value != b.value) return a.value < b.value ? -1 : 1;
  return 0;
}

// The region-wide total order used everywhere ranks are compared: rank
// first, then the larger node id wins.
inline int compare_ranked(const Rank& ra, NodeId ia, const Rank& rb,
                          NodeId ib) {
  if (int c = compare(ra, rb); c != 0) return c;
  if (ia != ib) return ia < ib ? -1 : 1;
  return 0;
}

inline std::string to_string(const Rank& r) {
  if (r.inf) {
    std::ostringstream os;
    os << "inf";
    if (r.tie)
      os << "(" << r.tie->acc_rank << "," << r.tie->rounds_active << ","
         << r.tie->id << ")";
    return os.str();
  }
  std::ostringstream os;
  os << r.value;
  return os.str();
}

// The single wire message of the protocol.
struct BeepMsg {
  LocalTime time = 0;  // sender's clock reading at send
  Rank rank;
  NodeId id = kNoNode;
  std::uint32_t round = 0;  // sender's roundsAsLeading at send

  friend bool operator==(const BeepMsg&, const BeepMsg&) = default;
};

// Static per-node protocol parameters. max_round is always derived from
// max_ratio; use make_node_params.
struct NodeParams {
  double w = 1.0 / 16.0;
  double max_ratio = 1.0;
  std::uint32_t max_round = 4;  // 2 * ceil(max_ratio) + 2
  VirtualTime msg_delivery_time = 0;
  std::uint32_t num_of_copies = 1;
  double phys_score = 0.0;

  std::uint32_t max_ratio_ceil() const {
    return static_cast<std::uint32_t>(std::ceil(max_ratio));
  }
};

inline NodeParams make_node_params(double w, double max_ratio,
                                   VirtualTime msg_delivery_time,
                                   std::uint32_t num_of_copies,
                                   double phys_score) {
  if (!(w > 0.0)) throw ConfigError("node params: w must be > 0");
  if (!(max_ratio >= 1.0))
    throw ConfigError("node params: maxRatio must be >= 1");
  if (num_of_copies == 0)
    throw ConfigError("node params: numOfCopies must be >= 1");
  if (!(phys_score >= 0.0 && phys_score <= 1.0))
    throw ConfigError("node params: physScore must be in [0, 1]");
  NodeParams p;
  p.w = w;
  p.max_ratio = max_ratio;
  p.max_round =
      2 * static_cast<std::uint32_t>(std::ceil(max_ratio)) + 2;
  p.msg_delivery_time = msg_delivery_time;
  p.num_of_copies = num_of_copies;
  p.phys_score = phys_score;
  return p;
}

// Actions a node hands back to its environment. The state machine never
// touches the network itself.
enum class ActionKind { Broadcast, Handshake, BecameLeader, SteppedDown };

struct NodeAction {
  ActionKind kind = ActionKind::Broadcast;
  BeepMsg msg;                   // Broadcast
  std::uint32_t copies = 0;      // Broadcast
  NodeId target = kNoNode;       // Handshake

  static NodeAction broadcast(const BeepMsg& m, std::uint32_t copies) {
    NodeAction a;
    a.kind = ActionKind::Broadcast;
    a.msg = m;
    a.copies = copies;
    return a;
  }
  static NodeAction handshake(NodeId target) {
    NodeAction a;
    a.kind = ActionKind::Handshake;
    a.target = target;
    return a;
  }
  static NodeAction became_leader() {
    NodeAction a;
    a.kind = ActionKind::BecameLeader;
    return a;
  }

  friend bool operator==(const NodeAction&, const NodeAction&) = default;
};

// Canonical, implementation-independent view of one node's protocol state.
// Both the production state machine and the reference transcription reduce
// to this form; digests are computed over its exact bytes.
struct SnapshotEntry {
  NodeId id = kNoNode;
  Rank rank;
  std::uint32_t round = 0;
  LocalTime time = 0;

  friend bool operator==(const SnapshotEntry&, const SnapshotEntry&) = default;
};

struct StateSnapshot {
  std::uint64_t cnt_rounds = 0;
  std::uint32_t rounds_as_leading = 0;
  std::uint64_t pl0_del_cnt = 0;
  std::uint64_t last_lead_msg = 0;
  bool leader = false;
  Rank rank;
  std::vector<SnapshotEntry> entries;   // descending (rank, id)
  std::vector<NodeId> handshaken;       // ascending

  friend bool operator==(const StateSnapshot&, const StateSnapshot&) = default;

  std::string to_string() const {
    std::ostringstream os;
    os << "cnt=" << cnt_rounds << " lead=" << rounds_as_leading
       << " del=" << pl0_del_cnt << " last=" << last_lead_msg
       << " leader=" << leader << " rank=" << pale::to_string(rank) << " pl=[";
    for (const auto& e : entries)
      os << "(" << e.id << "," << pale::to_string(e.rank) << ",r" << e.round
         << ",t" << e.time << ")";
    os << "] hs=[";
    for (NodeId h : handshaken) os << h << ",";
    os << "]";
    return os.str();
  }
};

namespace detail {

inline void fnv1a(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
}

template <typename T>
void fnv1a_value(std::uint64_t& h, const T& v) {
  static_assert(std::is_trivially_copyable_v<T>);
  fnv1a(h, &v, sizeof(v));
}

inline void fnv1a_rank(std::uint64_t& h, const Rank& r) {
  fnv1a_value(h, r.inf);
  double v = r.inf ? 0.0 : r.value;
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  fnv1a_value(h, bits);
  bool has_tie = r.tie.has_value();
  fnv1a_value(h, has_tie);
  if (has_tie) {
    std::memcpy(&bits, &r.tie->acc_rank, sizeof(bits));
    fnv1a_value(h, bits);
    fnv1a_value(h, r.tie->rounds_active);
    fnv1a_value(h, r.tie->id);
  }
}

}  // namespace detail

inline std::uint64_t digest(const StateSnapshot& s) {
  std::uint64_t h = 1469598103934665603ULL;
  detail::fnv1a_value(h, s.cnt_rounds);
  detail::fnv1a_value(h, s.rounds_as_leading);
  detail::fnv1a_value(h, s.pl0_del_cnt);
  detail::fnv1a_value(h, s.last_lead_msg);
  detail::fnv1a_value(h, s.leader);
  detail::fnv1a_rank(h, s.rank);
  detail::fnv1a_value(h, s.entries.size());
  for (const auto& e : s.entries) {
    detail::fnv1a_value(h, e.id);
    detail::fnv1a_rank(h, e.rank);
    detail::fnv1a_value(h, e.round);
    detail::fnv1a_value(h, e.time);
  }
  detail::fnv1a_value(h, s.handshaken.size());
  for (NodeId n : s.handshaken) detail::fnv1a_value(h, n);
  return h;
}

}  // namespace pale
