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

#include "pale/participant_list.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <random>
#include <vector>

namespace pale {
namespace {

PLEntry entry(NodeId id, double rank, std::uint32_t round = 0,
              LocalTime time = 0) {
  return PLEntry{id, Rank::finite(rank), round, time};
}

TEST(ParticipantList, PeekBestReturnsMaximum) {
  ParticipantList pl;
  pl.insert_or_update(entry(1, 0.2));
  pl.insert_or_update(entry(2, 0.9));
  pl.insert_or_update(entry(3, 0.5));
  EXPECT_EQ(pl.peek_best().id, 2u);
  EXPECT_EQ(pl.size(), 3u);
}

TEST(ParticipantList, EqualRanksLargerIdWins) {
  ParticipantList pl;
  pl.insert_or_update(entry(1, 0.5));
  pl.insert_or_update(entry(2, 0.5));
  EXPECT_EQ(pl.peek_best().id, 2u);
}

TEST(ParticipantList, SingletonIsItsOwnBest) {
  ParticipantList pl;
  pl.insert_or_update(entry(9, 0.1));
  EXPECT_EQ(pl.peek_best().id, 9u);
}

TEST(ParticipantList, InsertNewGrowsList) {
  ParticipantList pl;
  pl.insert_or_update(entry(1, 0.1));
  pl.insert_or_update(entry(2, 0.2));
  pl.insert_or_update(entry(3, 0.3));
  pl.insert_or_update(entry(4, 0.05));
  EXPECT_EQ(pl.size(), 4u);
}

TEST(ParticipantList, UpdateCanPromoteToBest) {
  ParticipantList pl;
  pl.insert_or_update(entry(1, 0.3));
  pl.insert_or_update(entry(2, 0.6));
  pl.insert_or_update(entry(1, 0.8));
  EXPECT_EQ(pl.size(), 2u);
  EXPECT_EQ(pl.peek_best().id, 1u);
  EXPECT_EQ(pl.get(1)->rank.value, 0.8);
}

TEST(ParticipantList, UpdateRoundKeepsOrder) {
  ParticipantList pl;
  pl.insert_or_update(entry(1, 0.9, 3));
  pl.insert_or_update(entry(2, 0.5));
  pl.insert_or_update(entry(1, 0.9, 4));
  EXPECT_EQ(pl.peek_best().id, 1u);
  EXPECT_EQ(pl.peek_best().round, 4u);
}

TEST(ParticipantList, DeleteBestExposesSecond) {
  ParticipantList pl;
  pl.insert_or_update(entry(1, 0.9));
  pl.insert_or_update(entry(2, 0.5));
  PLEntry removed = pl.delete_best();
  EXPECT_EQ(removed.id, 1u);
  EXPECT_EQ(pl.peek_best().id, 2u);
  EXPECT_EQ(pl.size(), 1u);
}

TEST(ParticipantList, DeleteSingletonEmpties) {
  ParticipantList pl;
  pl.insert_or_update(entry(1, 0.9));
  pl.delete_best();
  EXPECT_TRUE(pl.empty());
  EXPECT_THROW(pl.delete_best(), std::logic_error);
  EXPECT_THROW(pl.peek_best(), std::logic_error);
}

TEST(ParticipantList, GetRoundTrips) {
  ParticipantList pl;
  EXPECT_FALSE(pl.get(5).has_value());
  PLEntry e = entry(5, 0.4, 2, 77);
  pl.insert_or_update(e);
  ASSERT_TRUE(pl.get(5).has_value());
  EXPECT_EQ(*pl.get(5), e);
  EXPECT_FALSE(pl.get(6).has_value());
}

// Draining a random population must yield strictly decreasing (rank, id).
TEST(ParticipantList, RepeatedDeleteBestDrainsInSortedOrder) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> rank(0.0, 1.0);
  ParticipantList pl;
  std::vector<PLEntry> expected;
  for (NodeId id = 1; id <= 100; ++id) {
    PLEntry e = entry(id, rank(rng));
    pl.insert_or_update(e);
    expected.push_back(e);
  }
  std::sort(expected.begin(), expected.end(),
            [](const PLEntry& a, const PLEntry& b) { return compare(a, b) > 0; });
  for (const PLEntry& want : expected) {
    EXPECT_EQ(pl.delete_best(), want);
  }
  EXPECT_TRUE(pl.empty());
}

// Model check: arbitrary operation interleavings behave exactly like a plain
// sorted array.
TEST(ParticipantList, MatchesSortedArrayModel) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    std::uniform_int_distribution<int> op(0, 9);
    std::uniform_int_distribution<NodeId> pick_id(1, 40);
    std::uniform_int_distribution<int> rank_step(0, 20);
    ParticipantList pl;
    std::vector<PLEntry> model;
    auto model_sort = [&] {
      std::sort(model.begin(), model.end(),
                [](const PLEntry& a, const PLEntry& b) {
                  return compare(a, b) > 0;
                });
    };
    for (int i = 0; i < 10000; ++i) {
      int o = op(rng);
      if (o < 6) {
        PLEntry e = entry(pick_id(rng), 0.05 * rank_step(rng),
                          static_cast<std::uint32_t>(i % 7), i);
        pl.insert_or_update(e);
        auto it = std::find_if(model.begin(), model.end(),
                               [&](const PLEntry& x) { return x.id == e.id; });
        if (it == model.end())
          model.push_back(e);
        else
          *it = e;
        model_sort();
      } else if (o < 8) {
        if (model.empty()) continue;
        EXPECT_EQ(pl.delete_best(), model.front());
        model.erase(model.begin());
      } else {
        NodeId id = pick_id(rng);
        auto it = std::find_if(model.begin(), model.end(),
                               [&](const PLEntry& x) { return x.id == id; });
        if (it == model.end())
          EXPECT_FALSE(pl.get(id).has_value());
        else
          EXPECT_EQ(*pl.get(id), *it);
      }
      ASSERT_EQ(pl.size(), model.size());
      if (!model.empty()) {
        ASSERT_EQ(pl.peek_best(), model.front());
      }
      ASSERT_EQ(pl.snapshot(), model);
    }
  }
}

// 1e5 insert+peek pairs must scale linearly; a quadratic structure would
// blow well past both checks.
TEST(ParticipantList, ComplexitySmokeCheck) {
  auto run = [](std::size_t n) {
    ParticipantList pl;
    NodeId best_seen = kNoNode;
    auto start = std::chrono::steady_clock::now();
    for (std::size_t i = 1; i <= n; ++i) {
      pl.insert_or_update(
          entry(static_cast<NodeId>(i), static_cast<double>(i % 977)));
      best_seen = pl.peek_best().id;
    }
    (void)best_seen;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  };
  run(25000);  // warmup
  auto med3 = [&](std::size_t n) {
    double a = run(n), b = run(n), c = run(n);
    double lo = std::min({a, b, c}), hi = std::max({a, b, c});
    return a + b + c - lo - hi;
  };
  double quarter = med3(25000);
  double full = med3(100000);
  EXPECT_LT(full, 2.0) << "100k insert+peek pairs took " << full << "s";
  if (quarter > 1e-4) {
    EXPECT_LT(full / quarter, 10.0)
        << "0.25x->1x scaling ratio " << full / quarter
        << " suggests superlinear growth";
  }
}

}  // namespace
}  // namespace pale
