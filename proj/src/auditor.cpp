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

#include "pmset/auditor.hpp"

#include <sstream>

#include "pmset/recovery.hpp"

namespace pmset {
namespace {

using namespace link;

std::string hexw(Word w, Role role) { return render(w, role); }

// Reachable cells from head in volatile memory, head first. Returns an
// error instead when the chain is broken.
std::optional<std::string> reachable(const SimSubstrate& sub, Word head,
                                     std::vector<const ShadowCell*>& out) {
  const std::size_t limit = sub.cell_count() + 1;
  const ShadowCell* c = sub.peek(head);
  while (c != nullptr) {
    if (!c->live) return "reachable cell " + std::to_string(c->id.value()) + " is not live";
    out.push_back(c);
    if (out.size() > limit) return std::string("volatile links form a cycle");
    if (c->key == kTailKey) return std::nullopt;
    const Word next = unmark(c->volatile_value.next);
    const ShadowCell* n = sub.peek(next);
    if (n == nullptr) return "cell " + std::to_string(c->id.value()) + " has a dangling next";
    if (n->key <= c->key) return std::string("volatile keys out of order");
    c = n;
  }
  return std::string("head is not a cell");
}

}  // namespace

std::set<Key> volatile_abstract_set(const SimSubstrate& sub, Word head, ListKind kind) {
  std::vector<const ShadowCell*> cells;
  if (auto err = reachable(sub, head, cells)) throw CorruptImage(*err);
  std::set<Key> keys;
  for (const ShadowCell* c : cells) {
    if (!is_user_key(c->key)) continue;
    if (kind == ListKind::kLd && is_marked(c->volatile_value.next)) continue;
    keys.insert(c->key);
  }
  return keys;
}

std::optional<std::string> Auditor::scan_log(const SimSubstrate& sub) {
  const auto& events = sub.log().events();
  for (; cursor_ < events.size(); ++cursor_) {
    const Event& e = events[cursor_];
    if (e.kind == EventKind::kAlloc || e.kind == EventKind::kInstall) {
      if (is_durable(e.after->next)) last_durable_next_[e.cell] = e.after->next;
      continue;
    }
    if (e.kind != EventKind::kDwcas || !e.result) continue;
    const WordPair& before = *e.before;
    const WordPair& after = *e.after;
    // An LD mark is written non-durable and persisted afterwards, so there
    // the durable bit may still be set once; nothing else may change.
    const bool only_persisted =
        kind_ == ListKind::kLd && !is_durable(before.next) && after.next == mark_durable(before.next);
    if (is_marked(before.next) && after.next != before.next && !only_persisted) {
      return "marked link changed: cell " + std::to_string(e.cell.value()) + " at seq " +
             std::to_string(e.seq);
    }
    if (kind_ == ListKind::kLd && (is_dflagged(after.next) || is_dflagged(after.old))) {
      return "dflag bit written in a logical-delete list at seq " + std::to_string(e.seq);
    }
    if (is_durable(after.next)) last_durable_next_[e.cell] = after.next;
  }
  return std::nullopt;
}

std::optional<std::string> Auditor::check(const SimSubstrate& sub, Word head,
                                          const std::vector<OpSpec>& pending) {
  if (auto err = scan_log(sub)) return err;

  std::vector<const ShadowCell*> cells;
  if (auto err = reachable(sub, head, cells)) return err;

  for (std::size_t i = 0; i < cells.size(); ++i) {
    const ShadowCell& c = *cells[i];
    if (c.key == kTailKey) break;
    const Word next = c.volatile_value.next;
    const Word old = c.volatile_value.old;
    const std::string where = "cell " + std::to_string(c.id.value()) + " <" + hexw(next, Role::kNext) +
                              ", " + hexw(old, Role::kOld) + ">";

    if (kind_ == ListKind::kPd && is_marked(next) && is_dflagged(next)) {
      return "mark and dflag together: " + where + " is marked and dflagged";
    }
    if (kind_ == ListKind::kLd && (is_dflagged(next) || is_dflagged(old))) {
      return "dflag bit in a logical-delete list: " + where;
    }

    if (is_durable(next)) {
      if (old != kNil) return "old word: durable link with old set: " + where;
    } else if (!(kind_ == ListKind::kLd && is_marked(next))) {
      auto it = last_durable_next_.find(c.id);
      if (old == kNil || it == last_durable_next_.end() || unmark(old) != unmark(it->second)) {
        return "old word: non-durable link whose old is not the last durable target: " + where;
      }
    }

    if (kind_ == ListKind::kPd && is_marked(next)) {
      if (i == 0) return "marked node placement: head is marked";
      const Word pred_next = cells[i - 1]->volatile_value.next;
      if (!is_dflagged(pred_next) || unmark(pred_next) != sim_ref(c.id)) {
        return "marked node placement: marked " + where + " without a dflagged predecessor";
      }
      if (is_marked(cells[i + 1]->volatile_value.next)) {
        return "marked node placement: marked " + where + " has a marked successor";
      }
    }
  }

  std::set<Key> persistent;
  try {
    persistent = persistent_abstract_set(sub.persistent_snapshot(), kind_);
  } catch (const CorruptImage& ex) {
    return std::string("persistent image is corrupt: ") + ex.what();
  }
  std::set<Key> volatile_keys;
  for (const ShadowCell* c : cells) {
    if (!is_user_key(c->key)) continue;
    if (kind_ == ListKind::kLd && is_marked(c->volatile_value.next)) continue;
    volatile_keys.insert(c->key);
  }
  std::set<Key> removing, inserting;
  for (const OpSpec& op : pending) {
    if (op.kind == OpKind::kRemove) removing.insert(op.key);
    if (op.kind == OpKind::kInsert) inserting.insert(op.key);
  }
  for (Key k : persistent) {
    if (!volatile_keys.count(k) && !removing.count(k)) {
      return "crash gap: key " + std::to_string(k) + " persistent but not volatile, no pending remove";
    }
  }
  for (Key k : volatile_keys) {
    if (!persistent.count(k) && !inserting.count(k)) {
      return "crash gap: key " + std::to_string(k) + " volatile but not persistent, no pending insert";
    }
  }
  return std::nullopt;
}

}  // namespace pmset
