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

#include <iosfwd>
#include <map>
#include <optional>

#include "pmset/taglink.hpp"
#include "pmset/types.hpp"

namespace pmset {

/// Simulated node references are cell ids scaled to 64-byte cells, so a
/// reference looks like an aligned address and leaves the tag bits free.
inline constexpr unsigned kSimCellShift = 6;

constexpr Word sim_ref(CellId c) { return c.value() << kSimCellShift; }
constexpr CellId sim_cell(Word ref) { return CellId(link::unmark(ref) >> kSimCellShift); }

struct ImageCell {
  CellId id;
  WordPair link;
  Key key = 0;
  Value value = 0;

  friend bool operator==(const ImageCell&, const ImageCell&) = default;
};

/// Contents of persistent memory after a crash: every cell that was ever
/// written back, with its last persisted link pair and payload. Cells that
/// never reached persistence are absent.
class PersistentImage {
 public:
  std::map<CellId, ImageCell> cells;

  const ImageCell* find(CellId id) const;
  const ImageCell* find_ref(Word ref) const { return find(sim_cell(ref)); }

  /// The cell holding the head sentinel key, if any.
  std::optional<CellId> head() const;

  /// One JSON object per line: {"cell","next","old","key","value"}.
  void write_jsonl(std::ostream& out) const;
  static PersistentImage read_jsonl(std::istream& in);

  friend bool operator==(const PersistentImage&, const PersistentImage&) = default;
};

}  // namespace pmset
