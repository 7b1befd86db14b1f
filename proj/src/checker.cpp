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

#include "pmset/checker.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

#include "json.hpp"
#include "pmset/recovery.hpp"

namespace pmset {

SeqStep seq_apply(std::set<Key> state, OpKind kind, Key key) {
  const bool present = state.count(key) != 0;
  switch (kind) {
    case OpKind::kInsert:
      if (!present) state.insert(key);
      return {std::move(state), !present};
    case OpKind::kRemove:
      if (present) state.erase(key);
      return {std::move(state), present};
    case OpKind::kContains:
      return {std::move(state), present};
  }
  return {std::move(state), false};
}

namespace {

// One operation as the search sees it: a window [lo, hi] in which it must
// take effect, and the result it must produce (none = any).
struct Item {
  std::size_t op = 0;
  OpKind kind = OpKind::kContains;
  Key key = 0;
  std::optional<bool> result;
  bool optional = false;
  std::uint64_t lo = 0;
  std::uint64_t hi = kNever;
};

std::string describe(const HistoryOp& op) {
  std::string s = "#" + std::to_string(op.id) + " w" + std::to_string(op.worker) + " " +
                  std::string(to_string(op.kind)) + "(" + std::to_string(op.key) + ")";
  s += op.pending() ? " pending" : (op.result ? " -> true" : " -> false");
  return s;
}

struct PairHash {
  std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& p) const noexcept {
    return std::hash<std::uint64_t>{}(p.first * 0x9e3779b97f4a7c15ULL ^ p.second);
  }
};

class Search {
 public:
  Search(const History& h, std::vector<Item> items, CheckOptions options)
      : h_(h), items_(std::move(items)), options_(options) {}

  Verdict run() {
    std::sort(items_.begin(), items_.end(),
              [](const Item& a, const Item& b) { return a.lo != b.lo ? a.lo < b.lo : a.op < b.op; });
    Verdict v;
    std::set<Key> state;

    // Fold the sequential prefix: an operation that must precede every
    // other remaining one can only go first.
    std::size_t start = 0;
    while (start < items_.size()) {
      const Item& it = items_[start];
      if (it.optional) break;
      // Sorted by lo, so the next item starts earliest among the rest.
      if (start + 1 < items_.size() && !(it.hi < items_[start + 1].lo)) break;
      SeqStep s = seq_apply(std::move(state), it.kind, it.key);
      if (it.result && *it.result != s.result) {
        v.certificate = describe(h_.ops()[it.op]) + " contradicts the sequential set after " +
                        std::to_string(v.witness.size()) + " earlier operations that are ordered by real time";
        return v;
      }
      state = std::move(s.state);
      v.witness.push_back(it.op);
      ++start;
    }
    items_.erase(items_.begin(), items_.begin() + static_cast<std::ptrdiff_t>(start));
    if (items_.size() > options_.max_ops) {
      throw Refused("history has " + std::to_string(items_.size()) +
                    " concurrent operations; the checker is capped at " + std::to_string(options_.max_ops));
    }

    for (const Item& it : items_) {
      if (!key_bit_.count(it.key)) key_bit_.emplace(it.key, key_bit_.size());
    }
    if (key_bit_.size() > 64) throw Refused("too many distinct keys");
    // Keys untouched by the remaining operations never matter again.
    std::uint64_t bits = 0;
    for (Key k : state) {
      if (auto kb = key_bit_.find(k); kb != key_bit_.end()) bits |= std::uint64_t{1} << kb->second;
    }

    all_ = items_.size() == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << items_.size()) - 1;
    std::vector<std::size_t> path;
    if (dfs(0, bits, path)) {
      v.pass = true;
      for (std::size_t i : path) v.witness.push_back(items_[i].op);
      return v;
    }
    v.certificate = "no linearization of the " + std::to_string(items_.size()) +
                    " concurrent operations; longest consistent prefix:";
    for (std::size_t i : best_) v.certificate += " [" + describe(h_.ops()[items_[i].op]) + "]";
    v.certificate += "; stuck before any of:";
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (!std::count(best_.begin(), best_.end(), i)) v.certificate += " [" + describe(h_.ops()[items_[i].op]) + "]";
    }
    return v;
  }

 private:
  bool dfs(std::uint64_t done, std::uint64_t state, std::vector<std::size_t>& path) {
    if (done == all_) return true;
    if (failed_.count({done, state})) return false;
    if (path.size() > best_.size()) best_ = path;

    // An operation may go next only if nothing still undone finished
    // before it started.
    std::uint64_t min_hi = kNever;
    std::uint64_t second_hi = kNever;
    std::size_t min_at = items_.size();
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (done >> i & 1) continue;
      if (items_[i].hi < min_hi) {
        second_hi = min_hi;
        min_hi = items_[i].hi;
        min_at = i;
      } else if (items_[i].hi < second_hi) {
        second_hi = items_[i].hi;
      }
    }
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (done >> i & 1) continue;
      const Item& it = items_[i];
      const std::uint64_t bound = i == min_at ? second_hi : min_hi;
      if (bound < it.lo) continue;

      const std::uint64_t bit = std::uint64_t{1} << key_bit_.at(it.key);
      const bool present = (state & bit) != 0;
      bool r = present;
      std::uint64_t next = state;
      if (it.kind == OpKind::kInsert) {
        r = !present;
        next |= bit;
      } else if (it.kind == OpKind::kRemove) {
        next &= ~bit;
      }
      if (it.result && *it.result != r) continue;
      path.push_back(i);
      if (dfs(done | std::uint64_t{1} << i, next, path)) return true;
      path.pop_back();
    }
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if ((done >> i & 1) || !items_[i].optional) continue;
      if (dfs(done | std::uint64_t{1} << i, state, path)) return true;
    }
    failed_.insert({done, state});
    return false;
  }

  const History& h_;
  std::vector<Item> items_;
  CheckOptions options_;
  std::map<Key, std::size_t> key_bit_;
  std::uint64_t all_ = 0;
  std::unordered_set<std::pair<std::uint64_t, std::uint64_t>, PairHash> failed_;
  std::vector<std::size_t> best_;
};

Item plain_item(const HistoryOp& op) {
  Item it;
  it.op = op.id;
  it.kind = op.kind;
  it.key = op.key;
  it.lo = op.invoke;
  if (op.pending()) {
    it.optional = true;
  } else {
    it.result = op.result;
    it.hi = *op.respond;
  }
  return it;
}

}  // namespace

std::string Verdict::to_json(const History& h) const {
  nlohmann::json j;
  j["pass"] = pass;
  if (pass) {
    nlohmann::json w = nlohmann::json::array();
    for (std::size_t id : witness) {
      const HistoryOp& op = h.ops().at(id);
      nlohmann::json o{{"op", id}, {"worker", op.worker}, {"kind", std::string(to_string(op.kind))},
                       {"key", op.key}};
      if (!op.pending()) o["result"] = op.result;
      w.push_back(std::move(o));
    }
    j["witness"] = std::move(w);
  } else {
    j["certificate"] = certificate;
  }
  return j.dump();
}

Verdict check_linearizable(const History& h, CheckOptions options) {
  if (!h.crashes().empty()) throw Refused("history contains crashes");
  std::vector<Item> items;
  for (const HistoryOp& op : h.ops()) items.push_back(plain_item(op));
  return Search(h, std::move(items), options).run();
}

Verdict check_durable_linearizable(const History& h, CheckOptions options) {
  std::vector<Item> items;
  for (const HistoryOp& op : h.ops()) items.push_back(plain_item(op));
  return Search(h, std::move(items), options).run();
}

Verdict check_sle(const History& h, CheckOptions options) {
  if (h.crashes().empty()) return check_linearizable(h, options);

  std::vector<Item> items;
  for (const HistoryOp& op : h.ops()) {
    const bool update = op.kind != OpKind::kContains;
    Item it = plain_item(op);
    if (!op.pending()) {
      if (update && op.result) {
        if (!op.key_write) throw Refused("successful update " + describe(op) + " has no key write");
        it.lo = it.hi = *op.key_write;
      }
      items.push_back(it);
      continue;
    }
    const std::optional<std::uint64_t> crash = h.crash_after(op.invoke);
    if (op.key_write && update) {
      if (crash && *op.key_write > *crash) {
        Verdict v;
        v.certificate = describe(op) + " has its key write after the crash it was pending at";
        return v;
      }
      // Kept or dropped; if kept, it succeeded at its key write.
      it.lo = it.hi = *op.key_write;
      it.result = true;
      items.push_back(it);
    } else if (!crash) {
      items.push_back(it);  // still running at the end of the history
    }
    // Pending at a crash without a key write: dropped.
  }
  return Search(h, std::move(items), options).run();
}

namespace {

// Persistent memory replayed from the log, one event at a time.
class ImageTracker {
 public:
  explicit ImageTracker(ListKind kind) : kind_(kind) {}

  /// Applies `e`; returns true if it changed persistent memory.
  bool observe(const Event& e) {
    switch (e.kind) {
      case EventKind::kAlloc:
        meta_[e.cell] = {e.key, e.value};
        return false;
      case EventKind::kInstall:
        meta_[e.cell] = {e.key, e.value};
        image_.cells[e.cell] = ImageCell{e.cell, *e.after, e.key, e.value};
        return true;
      case EventKind::kCommit:
      case EventKind::kBgFlush: {
        const auto [key, value] = meta_.at(e.cell);
        image_.cells[e.cell] = ImageCell{e.cell, *e.after, key, value};
        return true;
      }
      default:
        return false;
    }
  }

  bool holds(Key k) const {
    if (!image_.head()) return false;  // sentinels not installed yet
    return persistent_abstract_set(image_, kind_).count(k) != 0;
  }

 private:
  ListKind kind_;
  PersistentImage image_;
  std::map<CellId, std::pair<Key, Value>> meta_;
};

}  // namespace

std::vector<std::uint64_t> cpe_candidates(const EventLog& log, const HistoryOp& op, ListKind kind) {
  const bool any_persistence = std::any_of(log.events().begin(), log.events().end(), [](const Event& e) {
    return e.kind == EventKind::kCommit || e.kind == EventKind::kInstall || e.kind == EventKind::kBgFlush;
  });
  if (!any_persistence) throw Refused("log carries no persistence events");
  if (op.kind == OpKind::kContains || (!op.pending() && !op.result)) return {};

  std::uint64_t end = op.respond.value_or(log.size());
  for (const Event& e : log.events()) {
    if (e.kind == EventKind::kCrash && e.seq > op.invoke) {
      end = std::min<std::uint64_t>(end, e.seq);
      break;
    }
  }

  ImageTracker image(kind);
  std::vector<std::uint64_t> out;
  bool holds = false;
  for (const Event& e : log.events()) {
    if (e.seq > end) break;
    if (!image.observe(e)) continue;
    const bool now = image.holds(op.key);
    if (e.seq > op.invoke) {
      const bool flips = op.kind == OpKind::kInsert ? (!holds && now) : (holds && !now);
      if (flips) out.push_back(e.seq);
    }
    holds = now;
  }
  return out;
}

std::optional<std::uint64_t> find_cpe(const EventLog& log, const HistoryOp& op, ListKind kind) {
  const std::vector<std::uint64_t> c = cpe_candidates(log, op, kind);
  if (c.size() != 1) return std::nullopt;
  return c.front();
}

}  // namespace pmset
