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

#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "pmset/set_handle.hpp"
#include "pmset/sim_substrate.hpp"

namespace pmset {

/// Keys of the reachable nodes in volatile memory. For PD this includes
/// marked nodes (they leave the set at the unlink); for LD it excludes
/// them (they leave the set at the mark).
std::set<Key> volatile_abstract_set(const SimSubstrate& sub, Word head, ListKind kind);

/// Read-only global-state checker run after every simulation step.
///
/// PD:
///   1. no reachable node is both marked and dflagged
///   2. a marked node's next never changes
///   3. a reachable marked node has a dflagged predecessor and an unmarked
///      successor
///   4. a durable next has old == NIL; a non-durable next has an old that
///      targets the last durable value of next
///   5. persistent set \ volatile set are keys of pending removes, and
///      volatile set \ persistent set are keys of pending inserts
/// LD: no dflag bit anywhere, 2, 4 (except on marked words, whose mark is
/// written with old == NIL), and 5.
class Auditor {
 public:
  explicit Auditor(ListKind kind) : kind_(kind) {}

  /// Checks the current state. `pending` holds the in-flight updates.
  /// Returns a description of the first violated invariant.
  std::optional<std::string> check(const SimSubstrate& sub, Word head,
                                   const std::vector<OpSpec>& pending);

 private:
  std::optional<std::string> scan_log(const SimSubstrate& sub);

  ListKind kind_;
  std::size_t cursor_ = 0;
  std::unordered_map<CellId, Word> last_durable_next_;
};

}  // namespace pmset
