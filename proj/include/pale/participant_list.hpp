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
#include <memory>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "pale/types.hpp"

namespace pale {

// One competitor known to a node: the content of its latest beep.
struct PLEntry {
  NodeId id = kNoNode;
  Rank rank;
  std::uint32_t round = 0;  // sender's roundsAsLeading in that beep
  LocalTime time = 0;       // sender-local timestamp of that beep

  friend bool operator==(const PLEntry&, const PLEntry&) = default;
};

inline int compare(const PLEntry& a, const PLEntry& b) {
  return compare_ranked(a.rank, a.id, b.rank, b.id);
}

// Rank-ordered registry of known participants, keyed by node id.
//
// Max pairing heap plus a hash index, giving constant-time best lookup and
// insert, constant-time keyed reads, amortized O(1) rank increases and
// O(log n) amortized deletes and rank decreases. At most one entry per id.
class ParticipantList {
 public:
  ParticipantList() = default;
  ParticipantList(ParticipantList&& other) noexcept
      : index_(std::move(other.index_)), root_(other.root_) {
    other.root_ = nullptr;
  }
  ParticipantList& operator=(ParticipantList&& other) noexcept {
    index_ = std::move(other.index_);
    root_ = other.root_;
    other.root_ = nullptr;
    return *this;
  }
  ParticipantList(const ParticipantList&) = delete;
  ParticipantList& operator=(const ParticipantList&) = delete;

  bool empty() const { return index_.empty(); }
  std::size_t size() const { return index_.size(); }

  const PLEntry& peek_best() const {
    if (!root_) throw std::logic_error("peek_best on empty participant list");
    return root_->entry;
  }

  bool contains(NodeId id) const { return index_.count(id) != 0; }

  std::optional<PLEntry> get(NodeId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second->entry;
  }

  void insert_or_update(const PLEntry& e) {
    auto it = index_.find(e.id);
    if (it == index_.end()) {
      auto owned = std::make_unique<HeapNode>();
      HeapNode* n = owned.get();
      n->entry = e;
      index_.emplace(e.id, std::move(owned));
      root_ = root_ ? meld(root_, n) : n;
      return;
    }
    HeapNode* n = it->second.get();
    int c = compare(e, n->entry);
    if (c == 0) {
      // Same position in the order; only round/time change.
      n->entry = e;
      return;
    }
    if (c > 0) {
      // Key increased: the subtree below stays valid, re-meld it at the top.
      n->entry = e;
      if (n == root_) return;
      detach(n);
      root_ = meld(root_, n);
      return;
    }
    // Key decreased: pull the node out, hand its children back to the heap,
    // then reinsert it childless.
    if (n == root_) {
      root_ = merge_children(n);
    } else {
      detach(n);
      if (HeapNode* sub = merge_children(n)) root_ = meld(root_, sub);
    }
    n->child = nullptr;
    n->parent = n->prev = n->next = nullptr;
    n->entry = e;
    root_ = root_ ? meld(root_, n) : n;
  }

  PLEntry delete_best() {
    if (!root_) throw std::logic_error("delete_best on empty participant list");
    HeapNode* old = root_;
    PLEntry removed = old->entry;
    root_ = merge_children(old);
    index_.erase(removed.id);
    return removed;
  }

  // Entries in descending (rank, id) order.
  std::vector<PLEntry> snapshot() const {
    std::vector<PLEntry> out;
    out.reserve(index_.size());
    for (const auto& [id, node] : index_) out.push_back(node->entry);
    std::sort(out.begin(), out.end(),
              [](const PLEntry& a, const PLEntry& b) { return compare(a, b) > 0; });
    return out;
  }

 private:
  struct HeapNode {
    PLEntry entry;
    HeapNode* parent = nullptr;
    HeapNode* child = nullptr;  // first child
    HeapNode* prev = nullptr;   // previous sibling
    HeapNode* next = nullptr;   // next sibling
  };

  static HeapNode* meld(HeapNode* a, HeapNode* b) {
    if (compare(a->entry, b->entry) >= 0) {
      add_child(a, b);
      return a;
    }
    add_child(b, a);
    return b;
  }

  static void add_child(HeapNode* parent, HeapNode* kid) {
    kid->parent = parent;
    kid->prev = nullptr;
    kid->next = parent->child;
    if (parent->child) parent->child->prev = kid;
    parent->child = kid;
  }

  // Unlink a non-root node from its parent's child list; keeps its subtree.
  static void detach(HeapNode* n) {
    if (n->prev)
      n->prev->next = n->next;
    else
      n->parent->child = n->next;
    if (n->next) n->next->prev = n->prev;
    n->parent = n->prev = n->next = nullptr;
  }

  // Two-pass pairing of n's children; returns the merged tree or null.
  HeapNode* merge_children(HeapNode* n) {
    scratch_.clear();
    for (HeapNode* c = n->child; c;) {
      HeapNode* nxt = c->next;
      c->parent = c->prev = c->next = nullptr;
      scratch_.push_back(c);
      c = nxt;
    }
    n->child = nullptr;
    if (scratch_.empty()) return nullptr;
    std::size_t m = 0;
    for (std::size_t i = 0; i + 1 < scratch_.size(); i += 2)
      scratch_[m++] = meld(scratch_[i], scratch_[i + 1]);
    if (scratch_.size() % 2 == 1) scratch_[m++] = scratch_.back();
    HeapNode* acc = scratch_[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) acc = meld(scratch_[i], acc);
    return acc;
  }

  std::unordered_map<NodeId, std::unique_ptr<HeapNode>> index_;
  HeapNode* root_ = nullptr;
  std::vector<HeapNode*> scratch_;
};

}  // namespace pale
