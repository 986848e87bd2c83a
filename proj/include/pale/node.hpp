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

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pale/participant_list.hpp"
#include "pale/rank.hpp"
#include "pale/types.hpp"

namespace pale {

// Wire-level sanity checks shared by any consumer of beeps.
inline std::optional<std::string> validate_beep(const BeepMsg& msg,
                                                const NodeParams& params,
                                                NodeId self) {
  if (msg.id == kNoNode) return "beep rejected: missing sender id";
  if (msg.id == self) return "beep rejected: self delivery";
  if (msg.rank.inf) {
    if (!msg.rank.tie) return "beep rejected: infinite rank without tie record";
  } else {
    if (msg.rank.tie) return "beep rejected: finite rank carries tie record";
    if (!(msg.rank.value >= 0.0))  // also rejects NaN
      return "beep rejected: negative or non-numeric rank";
    if (msg.round > params.max_round)
      return "beep rejected: finite rank with round beyond maxRound";
  }
  return std::nullopt;
}

// One protocol participant as a pure state machine. Events in (round timer
// fired, beep received), actions out (broadcast, handshake, leadership
// change). It owns no clock and no transport; `now` is always the caller's
// reading of this node's local clock.
//
// The two handlers are atomic with respect to each other: a node is driven
// from a single thread.
class Node {
 public:
  struct Init;

  // A node joining the region: empty counters, rank from its physical score
  // alone, itself as the only known participant, and one announcement beep.
  static Init init(const NodeParams& params, NodeId self, LocalTime now);

  std::vector<NodeAction> on_round_timer(LocalTime now) {
    std::vector<NodeAction> actions;
    if (i_am_leader_) {
      actions.push_back(
          NodeAction::broadcast(make_beep(now), params_.num_of_copies));
      return actions;
    }
    ++cnt_rounds_;
    if (!best_is_self() &&
        cnt_rounds_ - last_lead_msg_ > params_.max_ratio_ceil()) {
      // No beep from the leading participant for over ceil(maxRatio) rounds:
      // it is gone, count the loss and step back into contention.
      drop_best_as_stale(now);
    }
    if (best_is_self()) {
      ++rounds_as_leading_;
      if (rounds_as_leading_ == params_.max_round) {
        rank_ = Rank::infinity(LeaderTie{rank_.value, cnt_rounds_, self_});
        i_am_leader_ = true;
        pl_.insert_or_update({self_, rank_, rounds_as_leading_, now});
        actions.push_back(NodeAction::became_leader());
      }
      actions.push_back(
          NodeAction::broadcast(make_beep(now), params_.num_of_copies));
    }
    return actions;
  }

  std::vector<NodeAction> on_beep_received(const BeepMsg& msg, LocalTime now) {
    std::vector<NodeAction> actions;
    if (auto err = validate_beep(msg, params_, self_)) {
      diagnostics_.push_back(*err);
      return actions;
    }
    // The previous best failed and recovered between our own rounds: its
    // fresh beep has a reset round counter but a newer timestamp.
    if (!pl_.empty()) {
      const PLEntry& best = pl_.peek_best();
      if (best.id == msg.id && best.round > msg.round && best.time < msg.time)
        drop_best_as_stale(now);
    }
    // Someone above us in the rank order is active: the leading streak ends.
    if (best_is_self() && compare_ranked(msg.rank, msg.id, rank_, self_) > 0)
      rounds_as_leading_ = 0;
    pl_.insert_or_update({msg.id, msg.rank, msg.round, msg.time});
    bool sender_is_best = pl_.peek_best().id == msg.id;
    if (sender_is_best && msg.round >= params_.max_round &&
        handshaken_.count(msg.id) == 0) {
      handshaken_.insert(msg.id);
      actions.push_back(NodeAction::handshake(msg.id));
    }
    if (sender_is_best) last_lead_msg_ = cnt_rounds_;
    return actions;
  }

  NodeId id() const { return self_; }
  const NodeParams& params() const { return params_; }
  bool is_leader() const { return i_am_leader_; }
  const Rank& rank() const { return rank_; }
  std::uint64_t cnt_rounds() const { return cnt_rounds_; }
  std::uint32_t rounds_as_leading() const { return rounds_as_leading_; }
  std::uint64_t pl0_del_cnt() const { return pl0_del_cnt_; }
  std::uint64_t last_lead_msg() const { return last_lead_msg_; }
  const ParticipantList& pl() const { return pl_; }
  const std::vector<std::string>& diagnostics() const { return diagnostics_; }

  StateSnapshot snapshot() const {
    StateSnapshot s;
    s.cnt_rounds = cnt_rounds_;
    s.rounds_as_leading = rounds_as_leading_;
    s.pl0_del_cnt = pl0_del_cnt_;
    s.last_lead_msg = last_lead_msg_;
    s.leader = i_am_leader_;
    s.rank = rank_;
    for (const PLEntry& e : pl_.snapshot())
      s.entries.push_back({e.id, e.rank, e.round, e.time});
    s.handshaken.assign(handshaken_.begin(), handshaken_.end());
    return s;
  }

  std::uint64_t state_digest() const { return digest(snapshot()); }

 private:
  Node(const NodeParams& params, NodeId self) : params_(params), self_(self) {}

  BeepMsg make_beep(LocalTime now) const {
    return BeepMsg{now, rank_, self_, rounds_as_leading_};
  }

  bool best_is_self() const {
    return !pl_.empty() && pl_.peek_best().id == self_;
  }

  void drop_best_as_stale(LocalTime now) {
    PLEntry removed = pl_.delete_best();
    handshaken_.erase(removed.id);  // any bond to it is void now
    ++pl0_del_cnt_;
    rank_ = compute_rank(params_.w, pl0_del_cnt_, params_.phys_score);
    pl_.insert_or_update({self_, rank_, 0, now});
  }

  NodeParams params_;
  NodeId self_;
  ParticipantList pl_;
  std::uint64_t cnt_rounds_ = 0;
  std::uint32_t rounds_as_leading_ = 0;
  std::uint64_t pl0_del_cnt_ = 0;
  std::uint64_t last_lead_msg_ = 0;
  bool i_am_leader_ = false;
  Rank rank_;
  std::set<NodeId> handshaken_;
  std::vector<std::string> diagnostics_;
};

struct Node::Init {
  Node node;
  std::vector<NodeAction> actions;
};

inline Node::Init Node::init(const NodeParams& params, NodeId self,
                             LocalTime now) {
  if (!(params.w > 0.0)) throw ConfigError("node params: w must be > 0");
  if (!(params.max_ratio >= 1.0))
    throw ConfigError("node params: maxRatio must be >= 1");
  Node n(params, self);
  n.rank_ = compute_rank(params.w, 0, params.phys_score);
  n.pl_.insert_or_update({self, n.rank_, 0, now});
  std::vector<NodeAction> actions;
  actions.push_back(
      NodeAction::broadcast(n.make_beep(now), params.num_of_copies));
  return Init{std::move(n), std::move(actions)};
}

}  // namespace pale
