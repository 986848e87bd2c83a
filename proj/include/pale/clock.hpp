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

#include <cstdint>

#include "pale/types.hpp"

namespace pale {

// A node's clock: rate_num/rate_den local ticks pass per virtual tick, and
// the node's round timer fires every round_length ticks of its own clock.
// Rates are rationals so schedules stay exact over any horizon.
struct ClockModel {
  std::int64_t rate_num = 1;
  std::int64_t rate_den = 1;
  VirtualTime round_length = 10000;  // in local ticks

  friend bool operator==(const ClockModel&, const ClockModel&) = default;
};

// Local wall-clock reading at virtual time t. The wall clock runs from the
// start of the simulation and survives node failures.
inline LocalTime local_time(const ClockModel& c, LocalTime offset,
                            VirtualTime t) {
  __int128 v = static_cast<__int128>(t) * c.rate_num / c.rate_den;
  return offset + static_cast<LocalTime>(v);
}

// Virtual-time delay until the k-th round timer after an activation, i.e.
// k * round_length converted to virtual ticks, floored.
inline VirtualTime kth_round_delay(const ClockModel& c, std::uint64_t k) {
  __int128 v = static_cast<__int128>(k) * c.round_length * c.rate_den /
               c.rate_num;
  return static_cast<VirtualTime>(v);
}

// Round length measured in virtual ticks; exact as a long double for the
// assumption checks.
inline long double effective_round(const ClockModel& c) {
  return static_cast<long double>(c.round_length) *
         static_cast<long double>(c.rate_den) /
         static_cast<long double>(c.rate_num);
}

}  // namespace pale
