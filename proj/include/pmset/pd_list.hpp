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

#include <cstddef>

#include "pmset/substrate.hpp"
#include "pmset/taglink.hpp"
#include "pmset/types.hpp"

namespace pmset {

/// Writes a non-durable link back and sets its persistence bit: flush,
/// fence, then dwcas <expected_next, old> -> <durable(expected_next), NIL>.
/// A NIL `old` means "whatever old holds after the fence". A failed dwcas
/// means another worker already did the same job, or the link moved on.
template <Substrate S>
void persist_link(S& sub, Word node, Word expected_next, Word old) {
  sub.flush(node);
  sub.fence();
  if (old == kNil) old = sub.read_old(node);
  sub.dwcas(node, WordPair{expected_next, old}, WordPair{link::mark_durable(expected_next), kNil});
}

struct ListOptions {
  ContainsVariant contains = ContainsVariant::kPersistLast;
  /// Bound on the async contains' record of flushed links.
  std::size_t max_list_length = std::size_t{1} << 20;
};

/// Sorted set over a singly linked list with two-phase physical deletion:
/// a remove first dflags the predecessor link, then marks the victim, then
/// unlinks it. A remove takes effect persistently when the unlink persists,
/// so both updates cost one psync when running alone.
///
/// Each link is the pair <next, old>. While next is not yet durable, old
/// remembers the last durable target, which lets a search answer without
/// persisting anything.
template <Substrate S>
class PdList {
 public:
  struct FindResult {
    Word gp = kNil;
    Word p = kNil;
    Word curr = kNil;
  };

  /// Builds an empty list with durable sentinels.
  explicit PdList(S& sub, ListOptions options = {});
  /// Attaches to an existing, quiescent list (after recovery).
  PdList(S& sub, Word head, ListOptions options = {});

  bool insert(Key key, Value value = 0);
  bool remove(Key key);
  bool contains(Key key) { return contains(key, options_.contains); }
  bool contains(Key key, ContainsVariant variant);

  bool contains_persist_all(Key key);
  bool contains_async_persist_all(Key key);
  bool contains_persist_last(Key key);
  bool contains_persist_free(Key key);

  Word head() const { return head_; }
  S& substrate() { return sub_; }
  const ListOptions& options() const { return options_; }

  // Internals, exposed for tests.
  FindResult find(Key key);
  void persist(Word node, Word expected_next, Word old) { persist_link(sub_, node, expected_next, old); }
  void help_update(Word parent, Word dirty);
  void help_remove(Word parent, Word node);
  void help_marked(Word parent, Word node);

 private:
  Word create_node(Key key, Value value, Word succ);
  void finish_unlink(Word parent, Word node, const WordPair& seen);

  S& sub_;
  ListOptions options_;
  Word head_ = kNil;
};

}  // namespace pmset
