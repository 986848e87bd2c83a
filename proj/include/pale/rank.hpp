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

#include "pale/errors.hpp"
#include "pale/types.hpp"

namespace pale {

// rank = w * pl0DelCnt + physScore. Always computed from scratch so the
// stored rank is bit-identical to a recomputation; it never drifts through
// incremental additions.
inline Rank compute_rank(double w, std::uint64_t pl0_del_cnt,
                         double phys_score) {
  return Rank::finite(w * static_cast<double>(pl0_del_cnt) + phys_score);
}

// Physical-score provider mirroring hardware index probing: three component
// scores in [1.0, 7.9], aggregated by taking the minimum (the weakest
// component bounds the machine), normalized to [0, 1] by dividing by 7.9.
inline double phys_score_from_component_scores(double ram_score,
                                               double processor_score,
                                               double hard_disk_score) {
  for (double s : {ram_score, processor_score, hard_disk_score}) {
    if (!(s >= 1.0 && s <= 7.9))
      throw ConfigError("component score out of [1.0, 7.9]");
  }
  double agg = std::min({ram_score, processor_score, hard_disk_score});
  return agg / 7.9;
}

}  // namespace pale
