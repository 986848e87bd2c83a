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
#include <set>
#include <string>
#include <vector>

#include "pale/node.hpp"
#include "pale/types.hpp"

namespace pale {

// Reference transcription of the election state machine, kept independent of
// the production implementation on purpose: the participant list is a plain
// vector re-sorted after every change and every branch follows the handler
// descriptions line by line. Used only to cross-check Node; never optimized.
class NaiveNode {
 public:
  struct Entry {
    NodeId id = kNoNode;
    Rank rank;
    std::uint32_t round = 0;
    LocalTime time = 0;
  };

  struct Init;

  static Init init(const NodeParams& params, NodeId self, LocalTime now);

  std::vector<NodeAction> on_round_timer(LocalTime now) {
    std::vector<NodeAction> actions;
    if (i_am_leader_) {
      actions.push_back(NodeAction::broadcast(
          BeepMsg{now, rank_, self_, rounds_as_leading_},
          params_.num_of_copies));
      return actions;
    }
    cnt_rounds_ += 1;
    std::uint64_t ratio = params_.max_ratio_ceil();
    if (!(pl_.front().id == self_) && cnt_rounds_ - last_lead_msg_ > ratio) {
      Entry dead = pl_.front();
      pl_.erase(pl_.begin());
      handshaken_.erase(dead.id);
      pl0_del_cnt_ += 1;
      rank_ = Rank::finite(params_.w * static_cast<double>(pl0_del_cnt_) +
                           params_.phys_score);
      upsert(Entry{self_, rank_, 0, now});
    }
    if (pl_.front().id == self_) {
      rounds_as_leading_ += 1;
      if (rounds_as_leading_ == params_.max_round) {
        rank_ = Rank::infinity(LeaderTie{rank_.value, cnt_rounds_, self_});
        i_am_leader_ = true;
        upsert(Entry{self_, rank_, rounds_as_leading_, now});
        actions.push_back(NodeAction::became_leader());
      }
      actions.push_back(NodeAction::broadcast(
          BeepMsg{now, rank_, self_, rounds_as_leading_},
          params_.num_of_copies));
    }
    return actions;
  }

  std::vector<NodeAction> on_beep_received(const BeepMsg& msg, LocalTime now) {
    std::vector<NodeAction> actions;
    if (validate_beep(msg, params_, self_)) return actions;
    if (pl_.front().id == msg.id && pl_.front().round > msg.round &&
        pl_.front().time < msg.time) {
      Entry dead = pl_.front();
      pl_.erase(pl_.begin());
      handshaken_.erase(dead.id);
      pl0_del_cnt_ += 1;
      rank_ = Rank::finite(params_.w * static_cast<double>(pl0_del_cnt_) +
                           params_.phys_score);
      upsert(Entry{self_, rank_, 0, now});
    }
    if (pl_.front().id == self_ &&
        compare_ranked(msg.rank, msg.id, rank_, self_) > 0) {
      rounds_as_leading_ = 0;
    }
    upsert(Entry{msg.id, msg.rank, msg.round, msg.time});
    if (pl_.front().id == msg.id && msg.round >= params_.max_round &&
        handshaken_.count(msg.id) == 0) {
      handshaken_.insert(msg.id);
      actions.push_back(NodeAction::handshake(msg.id));
    }
    if (pl_.front().id == msg.id) last_lead_msg_ = cnt_rounds_;
    return actions;
  }

  StateSnapshot snapshot() const {
    StateSnapshot s;
    s.cnt_rounds = cnt_rounds_;
    s.rounds_as_leading = rounds_as_leading_;
    s.pl0_del_cnt = pl0_del_cnt_;
    s.last_lead_msg = last_lead_msg_;
    s.leader = i_am_leader_;
    s.rank = rank_;
    for (const Entry& e : pl_)
      s.entries.push_back({e.id, e.rank, e.round, e.time});
    s.handshaken.assign(handshaken_.begin(), handshaken_.end());
    return s;
  }

  std::uint64_t state_digest() const { return digest(snapshot()); }

 private:
  void upsert(const Entry& e) {
    auto it = std::find_if(pl_.begin(), pl_.end(),
                           [&](const Entry& x) { return x.id == e.id; });
    if (it == pl_.end())
      pl_.push_back(e);
    else
      *it = e;
    resort();
  }

  void resort() {
    std::stable_sort(pl_.begin(), pl_.end(), [](const Entry& a, const Entry& b) {
      return compare_ranked(a.rank, a.id, b.rank, b.id) > 0;
    });
  }

  NodeParams params_;
  NodeId self_ = kNoNode;
  std::vector<Entry> pl_;
  std::uint64_t cnt_rounds_ = 0;
  std::uint32_t rounds_as_leading_ = 0;
  std::uint64_t pl0_del_cnt_ = 0;
  std::uint64_t last_lead_msg_ = 0;
  bool i_am_leader_ = false;
  Rank rank_;
  std::set<NodeId> handshaken_;
};

struct NaiveNode::Init {
  NaiveNode node;
  std::vector<NodeAction> actions;
};

inline NaiveNode::Init NaiveNode::init(const NodeParams& params, NodeId self,
                                       LocalTime now) {
  NaiveNode n;
  n.params_ = params;
  n.self_ = self;
  n.cnt_rounds_ = 0;
  n.rounds_as_leading_ = 0;
  n.pl0_del_cnt_ = 0;
  n.last_lead_msg_ = 0;
  n.i_am_leader_ = false;
  n.rank_ = Rank::finite(params.w * 0.0 + params.phys_score);
  n.pl_.push_back(Entry{self, n.rank_, 0, now});
  n.resort();
  std::vector<NodeAction> actions;
  actions.push_back(NodeAction::broadcast(
      BeepMsg{now, n.rank_, self, n.rounds_as_leading_},
      params.num_of_copies));
  return Init{n, actions};
}

}  // namespace pale
