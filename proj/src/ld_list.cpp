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

#include "pmset/ld_list.hpp"

#include "pmset/native_substrate.hpp"
#include "pmset/sim_substrate.hpp"
#include "pmset/thread_context.hpp"

namespace pmset {

using namespace link;

template <Substrate S>
LdList<S>::LdList(S& sub, ListOptions options) : sub_(sub), options_(options) {
  if (!supports(options_.contains)) throw Unsupported("search variant not offered by this list");
  const Word tail = sub_.allocate(kTailKey, 0, WordPair{});
  sub_.install_durable(tail, WordPair{});
  head_ = sub_.allocate(kHeadKey, 0, WordPair{mark_durable(tail), kNil});
  sub_.install_durable(head_, WordPair{mark_durable(tail), kNil});
}

template <Substrate S>
LdList<S>::LdList(S& sub, Word head, ListOptions options)
    : sub_(sub), options_(options), head_(head) {
  if (!supports(options_.contains)) throw Unsupported("search variant not offered by this list");
}

template <Substrate S>
bool LdList<S>::get_mark(Word node) {
  const Word next = sub_.read_next(node);
  return is_marked(next) && is_durable(next);
}

template <Substrate S>
bool LdList<S>::trim(Word parent, Word curr) {
  const Word succ = unmark(sub_.read_next(curr));
  const Word marked_curr = mark_del(curr);
  if (sub_.dwcas(parent, {mark_durable(curr), kNil}, {succ, marked_curr}).success) {
    persist(parent, succ, marked_curr);
    return true;
  }
  return false;
}

// Marked nodes are trimmed on the way. The mark is persisted before the
// unlink, and so is the parent link, since trim expects it durable.
// A failed trim means the parent moved; start over from the head.
template <Substrate S>
typename LdList<S>::FindResult LdList<S>::find(Key key) {
restart:
  Word gp = kNil;
  Word p = head_;
  Word p_next = sub_.read_next(p);
  Word curr = unmark(p_next);
  while (true) {
    const Word c_next = sub_.read_next(curr);
    if (is_marked(c_next)) {
      if (!is_durable(c_next)) persist(curr, c_next, kNil);
      if (!is_durable(p_next)) persist(p, p_next, kNil);
      if (!trim(p, curr)) goto restart;
      p_next = sub_.read_next(p);
      curr = unmark(p_next);
      continue;
    }
    if (sub_.key_of(curr) >= key) break;
    gp = p;
    p = curr;
    p_next = c_next;
    curr = unmark(c_next);
  }
  if (gp != kNil) {
    const Word gp_next = sub_.read_next(gp);
    if (!is_durable(gp_next)) persist(gp, gp_next, kNil);
  }
  if (!is_durable(p_next)) persist(p, p_next, kNil);
  return {gp, p, curr};
}

template <Substrate S>
bool LdList<S>::insert(Key key, Value value) {
  OpClassScope scope(OpClass::kUpdate);
  while (true) {
    const auto [gp, p, curr] = find(key);
    if (sub_.key_of(curr) == key) return false;
    const Word node = sub_.allocate(key, value, WordPair{mark_durable(curr), kNil});
    sub_.flush(node);
    const Word iflag_curr = mark_iflag(curr);
    if (sub_.dwcas(p, {mark_durable(curr), kNil}, {node, iflag_curr}).success) {
      sub_.annotate_claim(node);
      sub_.annotate_key_write(node);
      persist(p, node, iflag_curr);
      return true;
    }
  }
}

template <Substrate S>
bool LdList<S>::remove(Key key) {
  OpClassScope scope(OpClass::kUpdate);
  while (true) {
    const auto [gp, p, curr] = find(key);
    Word c_next = sub_.read_next(curr);
    if (sub_.key_of(curr) != key) return false;
    if (is_marked(c_next)) continue;  // lost a race; the next find trims it
    if (!is_durable(c_next)) {
      persist(curr, c_next, kNil);
      c_next = mark_durable(c_next);
    }
    const Word marked = mark_del(unmark(c_next));
    if (sub_.dwcas(curr, {c_next, kNil}, {marked, kNil}).success) {
      sub_.annotate_claim(curr);
      sub_.annotate_key_write(curr);
      persist(curr, marked, kNil);
      trim(p, curr);
      return true;
    }
  }
}

template <Substrate S>
bool LdList<S>::contains(Key key, ContainsVariant variant) {
  switch (variant) {
    case ContainsVariant::kPersistLast:
      return contains_persist_last(key);
    case ContainsVariant::kPersistFree:
      return contains_persist_free(key);
    default:
      throw Unsupported("search variant not offered by this list");
  }
}

template <Substrate S>
bool LdList<S>::contains_persist_last(Key key) {
  OpClassScope scope(OpClass::kSearch);
  Word p = head_;
  Word p_next = sub_.read_next(p);
  Word curr = unmark(p_next);
  while (sub_.key_of(curr) < key) {
    p = curr;
    p_next = sub_.read_next(p);
    curr = unmark(p_next);
  }
  if (!is_durable(p_next)) persist(p, p_next, kNil);
  if (sub_.key_of(curr) != key) return false;
  const Word c_next = sub_.read_next(curr);
  if (!is_marked(c_next)) return true;
  if (!is_durable(c_next)) persist(curr, c_next, kNil);
  return false;
}

template <Substrate S>
bool LdList<S>::contains_persist_free(Key key) {
  OpClassScope scope(OpClass::kSearch);
  Word p = head_;
  Word p_next = sub_.read_next(p);
  Word curr = unmark(p_next);
  while (sub_.key_of(curr) < key) {
    p = curr;
    p_next = sub_.read_next(p);
    curr = unmark(p_next);
  }
  const bool at_curr = sub_.key_of(curr) == key;
  // A node whose mark is not yet durable still counts as present.
  if (is_durable(p_next)) return at_curr && !get_mark(curr);

  const Word old1 = sub_.read_old(p);
  const Word p_next2 = sub_.read_next(p);
  const Word old2 = sub_.read_old(p);
  if (p_next != p_next2 || old1 != old2 || old1 == kNil) return at_curr && !get_mark(curr);
  if (is_iflagged(old1)) return false;
  if (at_curr) return !get_mark(curr);
  const Word prev = unmark(old1);
  return sub_.key_of(prev) == key && !get_mark(prev);
}

template class LdList<SimSubstrate>;
template class LdList<NativeSubstrate>;

}  // namespace pmset
