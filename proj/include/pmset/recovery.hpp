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

#include <memory>
#include <set>
#include <vector>

#include "pmset/ld_list.hpp"
#include "pmset/pd_list.hpp"
#include "pmset/persistent_image.hpp"
#include "pmset/sim_substrate.hpp"

namespace pmset {

/// Cells of the list that recovery rebuilds from `image`, head to tail, in
/// order. PD keeps every node reachable over persisted links (a persisted
/// mark without a persisted unlink is a remove that has not taken effect).
/// LD drops nodes whose persisted next carries the mark, since for LD the
/// persisted mark is the point of no return.
///
/// Throws CorruptImage on a missing head, a dangling or cyclic link, or
/// keys out of order.
std::vector<CellId> recovered_chain(const PersistentImage& image, ListKind kind);

/// Keys the list holds after recovering `image`, without rebuilding it.
std::set<Key> persistent_abstract_set(const PersistentImage& image, ListKind kind);

/// Rewrites the recovered chain into `sub` with clean, durable links and
/// NIL old words; returns the head. `sub` must hold exactly `image` in
/// persistent memory (just crashed, or just loaded). Unreachable cells are
/// left alone. O(reachable nodes).
Word recover_in_place(SimSubstrate& sub, const PersistentImage& image, ListKind kind);

std::unique_ptr<PdList<SimSubstrate>> recover_pd(SimSubstrate& sub, const PersistentImage& image,
                                                 ListOptions options = {});
std::unique_ptr<LdList<SimSubstrate>> recover_ld(SimSubstrate& sub, const PersistentImage& image,
                                                 ListOptions options = {});

}  // namespace pmset
