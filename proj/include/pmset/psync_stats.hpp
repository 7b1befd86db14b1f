// Copyright 2026 The pmset Authors
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

#include <array>
#include <cstdint>

#include "pmset/types.hpp"

namespace pmset {

struct ClassCounters {
  std::uint64_t flushes = 0;
  std::uint64_t fences = 0;

  friend bool operator==(const ClassCounters&, const ClassCounters&) = default;
};

/// Persistence instruction counts. A psync is counted by its fence.
struct PsyncStats {
  std::array<ClassCounters, 3> by_class{};
  std::uint64_t redundant_flushes = 0;
  std::uint64_t redundant_fences = 0;

  ClassCounters& of(OpClass c) { return by_class[static_cast<std::size_t>(c)]; }
  const ClassCounters& of(OpClass c) const { return by_class[static_cast<std::size_t>(c)]; }

  std::uint64_t flushes() const {
    return by_class[0].flushes + by_class[1].flushes + by_class[2].flushes;
  }
  std::uint64_t fences() const {
    return by_class[0].fences + by_class[1].fences + by_class[2].fences;
  }
  std::uint64_t psyncs(OpClass c) const { return of(c).fences; }
  std::uint64_t redundant_psyncs() const { return redundant_fences; }

  friend bool operator==(const PsyncStats&, const PsyncStats&) = default;
};

}  // namespace pmset
