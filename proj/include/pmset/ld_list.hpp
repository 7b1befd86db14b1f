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

#include "pmset/pd_list.hpp"

namespace pmset {

/// Sorted set with lazy (logical) deletion: a remove marks the victim's
/// next link, persists the mark, and only then unlinks it. The persisted
/// mark is what makes the removal recoverable, so a remove costs two
/// psyncs when running alone. Traversals trim marked nodes they meet.
///
/// Supports the persist-last and persistence-free searches.
template <Substrate S>
class LdList {
 public:
  struct FindResult {
    Word gp = kNil;
    Word p = kNil;
    Word curr = kNil;
  };

  explicit LdList(S& sub, ListOptions options = {});
  LdList(S& sub, Word head, ListOptions options = {});

  bool insert(Key key, Value value = 0);
  bool remove(Key key);
  bool contains(Key key) { return contains(key, options_.contains); }
  /// Throws Unsupported for the persist-all variants.
  bool contains(Key key, ContainsVariant variant);

  bool contains_persist_last(Key key);
  bool contains_persist_free(Key key);

  Word head() const { return head_; }
  S& substrate() { return sub_; }
  const ListOptions& options() const { return options_; }

  static bool supports(ContainsVariant v) {
    return v == ContainsVariant::kPersistLast || v == ContainsVariant::kPersistFree;
  }

  // Internals, exposed for tests.
  FindResult find(Key key);
  void persist(Word node, Word expected_next, Word old) { persist_link(sub_, node, expected_next, old); }
  /// Unlinks the marked node `curr` from `parent`; false if parent moved.
  bool trim(Word parent, Word curr);
  /// True iff node's next is marked and the mark is durable.
  bool get_mark(Word node);

 private:
  S& sub_;
  ListOptions options_;
  Word head_ = kNil;
};

}  // namespace pmset
