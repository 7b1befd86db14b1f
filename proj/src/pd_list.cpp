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

#include "pmset/pd_list.hpp"

#include <stdexcept>
#include <vector>

#include "pmset/native_substrate.hpp"
#include "pmset/sim_substrate.hpp"
#include "pmset/thread_context.hpp"

namespace pmset {

using namespace link;

template <Substrate S>
PdList<S>::PdList(S& sub, ListOptions options) : sub_(sub), options_(options) {
  const Word tail = sub_.allocate(kTailKey, 0, WordPair{});
  sub_.install_durable(tail, WordPair{});
  head_ = sub_.allocate(kHeadKey, 0, WordPair{mark_durable(tail), kNil});
  sub_.install_durable(head_, WordPair{mark_durable(tail), kNil});
}

template <Substrate S>
PdList<S>::PdList(S& sub, Word head, ListOptions options)
    : sub_(sub), options_(options), head_(head) {}

template <Substrate S>
typename PdList<S>::FindResult PdList<S>::find(Key key) {
  Word gp = kNil;
  Word p = head_;
  Word p_next = sub_.read_next(p);
  Word curr = unmark(p_next);
  while (sub_.key_of(curr) < key) {
    gp = p;
    p = curr;
    p_next = sub_.read_next(p);
    curr = unmark(p_next);
  }
  if (gp != kNil) {
    const Word gp_next = sub_.read_next(gp);
    if (!is_durable(gp_next)) persist(gp, gp_next, kNil);
  }
  if (!is_durable(p_next)) persist(p, p_next, kNil);
  return {gp, p, curr};
}

// The new node is flushed without a fence; the fence in the insert's
// persist of the predecessor link covers both.
template <Substrate S>
Word PdList<S>::create_node(Key key, Value value, Word succ) {
  const Word node = sub_.allocate(key, value, WordPair{mark_durable(succ), kNil});
  sub_.flush(node);
  return node;
}

template <Substrate S>
bool PdList<S>::insert(Key key, Value value) {
  OpClassScope scope(OpClass::kUpdate);
  while (true) {
    const auto [gp, p, curr] = find(key);
    const Word p_next = sub_.read_next(p);
    if (sub_.key_of(curr) == key) return false;
    if (!is_clean(p_next)) {
      help_update(gp, p);
      continue;
    }
    const Word node = create_node(key, value, curr);
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
bool PdList<S>::remove(Key key) {
  OpClassScope scope(OpClass::kUpdate);
  while (true) {
    const auto [gp, p, curr] = find(key);
    const Word c_next = sub_.read_next(curr);
    const Word p_next = sub_.read_next(p);
    if (sub_.key_of(curr) != key) return false;
    if (!is_clean(c_next)) {
      help_update(p, curr);
    } else if (!is_clean(p_next)) {
      help_update(gp, p);
    } else {
      // The link keeps its persistence bit through the dflag.
      const Word dur_curr = mark_durable(curr);
      if (sub_.dwcas(p, {dur_curr, kNil}, {mark_dflag(dur_curr), kNil}).success) {
        sub_.annotate_claim(curr);
        help_remove(p, curr);
        return true;
      }
    }
  }
}

template <Substrate S>
void PdList<S>::help_update(Word parent, Word dirty) {
  const Word dirty_next = sub_.read_next(dirty);
  const Word succ = unmark(dirty_next);
  if (is_dflagged(dirty_next)) {
    help_remove(dirty, succ);
  } else if (is_marked(dirty_next) && parent != kNil) {
    help_marked(parent, dirty);
  }
}

template <Substrate S>
void PdList<S>::help_remove(Word parent, Word node) {
  const Word flagged = mark_durable(mark_dflag(node));
  while (sub_.read_next(parent) == flagged) {
    const Word succ = sub_.read_next(node);
    if (!is_durable(succ)) persist(node, succ, kNil);
    const Word dur_succ = mark_durable(unmark(succ));
    const WordPair expected{dur_succ, kNil};
    const CasResult last = sub_.dwcas(node, expected, {mark_del(dur_succ), kNil});
    if (last.success || is_marked(last.prior.next)) {
      help_marked(parent, node);
      return;
    }
    if (is_dflagged(last.prior.next)) help_remove(node, unmark(last.prior.next));
  }
  // Someone else unlinked the node. Its removal only counts once the
  // unlink is persistent, so make sure before reporting success.
  finish_unlink(parent, node, sub_.read(parent));
}

// The unlink moves the dflag into the old word. Bit 0 of old is the insert
// flag, so the persistence bit of the expected next is dropped there.
template <Substrate S>
void PdList<S>::help_marked(Word parent, Word node) {
  const Word succ = unmark(sub_.read_next(node));
  const Word old = mark_dflag(node);
  const CasResult r = sub_.dwcas(parent, {mark_durable(old), kNil}, {succ, old});
  if (r.success) {
    sub_.annotate_key_write(node);
    persist(parent, succ, old);
  } else {
    finish_unlink(parent, node, r.prior);
  }
}

template <Substrate S>
void PdList<S>::finish_unlink(Word parent, Word node, const WordPair& seen) {
  if (seen.old == mark_dflag(node) && !is_durable(seen.next)) persist(parent, seen.next, seen.old);
}

template <Substrate S>
bool PdList<S>::contains(Key key, ContainsVariant variant) {
  switch (variant) {
    case ContainsVariant::kPersistAll:
      return contains_persist_all(key);
    case ContainsVariant::kAsyncPersistAll:
      return contains_async_persist_all(key);
    case ContainsVariant::kPersistLast:
      return contains_persist_last(key);
    case ContainsVariant::kPersistFree:
      return contains_persist_free(key);
  }
  return false;
}

template <Substrate S>
bool PdList<S>::contains_persist_all(Key key) {
  OpClassScope scope(OpClass::kSearch);
  Word p = head_;
  Word p_next = sub_.read_next(p);
  Word curr = unmark(p_next);
  while (true) {
    if (!is_durable(p_next)) persist(p, p_next, kNil);
    if (sub_.key_of(curr) >= key) break;
    p = curr;
    p_next = sub_.read_next(p);
    curr = unmark(p_next);
  }
  return sub_.key_of(curr) == key;
}

template <Substrate S>
bool PdList<S>::contains_async_persist_all(Key key) {
  OpClassScope scope(OpClass::kSearch);
  struct Flushed {
    Word node;
    Word next;
    Word old;
  };
  thread_local std::vector<Flushed> flushed;
  flushed.clear();

  Word p = head_;
  Word p_next = sub_.read_next(p);
  Word curr = unmark(p_next);
  while (true) {
    if (!is_durable(p_next)) {
      if (flushed.size() >= options_.max_list_length) {
        throw std::length_error("list longer than max_list_length");
      }
      sub_.flush(p);
      flushed.push_back({p, p_next, sub_.read_old(p)});
    }
    if (sub_.key_of(curr) >= key) break;
    p = curr;
    p_next = sub_.read_next(p);
    curr = unmark(p_next);
  }
  if (!flushed.empty()) sub_.fence();
  for (const Flushed& f : flushed) {
    if (sub_.read_next(f.node) == f.next && sub_.read_old(f.node) == f.old) {
      sub_.dwcas(f.node, {f.next, f.old}, {mark_durable(f.next), kNil});
    }
  }
  return sub_.key_of(curr) == key;
}

template <Substrate S>
bool PdList<S>::contains_persist_last(Key key) {
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
  return sub_.key_of(curr) == key;
}

template <Substrate S>
bool PdList<S>::contains_persist_free(Key key) {
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
  if (is_durable(p_next)) return at_curr;

  // next and old cannot be read together; read old, next, old and accept
  // the pair only if nothing moved in between.
  const Word old1 = sub_.read_old(p);
  const Word p_next2 = sub_.read_next(p);
  const Word old2 = sub_.read_old(p);
  if (p_next != p_next2 || old1 != old2 || old1 == kNil) return at_curr;
  if (is_iflagged(old1)) return false;
  if (at_curr) return true;
  return sub_.key_of(unmark(old1)) == key;
}

template class PdList<SimSubstrate>;
template class PdList<NativeSubstrate>;

}  // namespace pmset
