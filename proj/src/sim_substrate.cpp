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

#include "pmset/sim_substrate.hpp"

#include <algorithm>
#include <cstdio>
#include <string>
#include <utility>

#include "pmset/thread_context.hpp"

namespace pmset {
namespace {

void pass_gate() {
  if (StepGate* gate = this_thread_context().gate) gate->arrive();
}

WorkerId current_worker() { return this_thread_context().worker; }

std::string hex(Word w) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(w));
  return buf;
}

}  // namespace

SimSubstrate::SimSubstrate(SimOptions options) : options_(options) {}

ShadowCell& SimSubstrate::live_cell(Word ref) {
  return const_cast<ShadowCell&>(std::as_const(*this).live_cell(ref));
}

const ShadowCell& SimSubstrate::live_cell(Word ref) const {
  const ShadowCell* c = peek(ref);
  if (c == nullptr || !c->live) throw Fault("access to unknown cell " + hex(ref));
  return *c;
}

const ShadowCell* SimSubstrate::peek(CellId cell) const {
  if (!cell.valid() || cell.value() > cells_.size()) return nullptr;
  return &cells_[cell.value() - 1];
}

const ShadowCell* SimSubstrate::peek(Word ref) const {
  return peek(sim_cell(ref));
}

void SimSubstrate::append(Event e) {
  if (redundancy_.observe(e)) {
    if (e.kind == EventKind::kFlush) ++stats_.redundant_flushes;
    if (e.kind == EventKind::kFence) ++stats_.redundant_fences;
  }
  log_.append(std::move(e));
}

Word SimSubstrate::allocate(Key key, Value value, WordPair init) {
  ShadowCell c;
  c.id = CellId(cells_.size() + 1);
  c.key = key;
  c.value = value;
  c.volatile_value = init;
  cells_.push_back(c);

  Event e;
  e.kind = EventKind::kAlloc;
  e.worker = current_worker();
  e.cell = c.id;
  e.after = init;
  e.key = key;
  e.value = value;
  append(std::move(e));
  return sim_ref(c.id);
}

WordPair SimSubstrate::read(Word ref) {
  pass_gate();
  return live_cell(ref).volatile_value;
}

Word SimSubstrate::read_next(Word ref) {
  pass_gate();
  return live_cell(ref).volatile_value.next;
}

Word SimSubstrate::read_old(Word ref) {
  pass_gate();
  return live_cell(ref).volatile_value.old;
}

CasResult SimSubstrate::dwcas(Word ref, WordPair expected, WordPair desired) {
  pass_gate();
  ShadowCell& c = live_cell(ref);
  const WorkerId w = current_worker();
  if (options_.rmw_commits_flushes) commit_worker(w, CommitVia::kRmw);

  CasResult r{c.volatile_value, c.volatile_value == expected};
  if (r.success) c.volatile_value = desired;

  Event e;
  e.kind = EventKind::kDwcas;
  e.worker = w;
  e.cell = c.id;
  e.before = r.prior;
  e.after = c.volatile_value;
  e.result = r.success;
  e.expected = expected;
  e.desired = desired;
  append(std::move(e));
  return r;
}

FlushId SimSubstrate::flush(Word ref) {
  pass_gate();
  const ShadowCell& c = live_cell(ref);
  const ThreadContext& ctx = this_thread_context();
  PendingFlush f{next_flush_++, ctx.worker, c.id, c.volatile_value};
  pending_.push_back(f);
  ++stats_.of(ctx.op_class).flushes;

  Event e;
  e.kind = EventKind::kFlush;
  e.worker = ctx.worker;
  e.cell = c.id;
  e.before = c.volatile_value;
  e.flush = f.id;
  e.op_class = ctx.op_class;
  append(std::move(e));
  return f.id;
}

void SimSubstrate::fence() {
  pass_gate();
  const ThreadContext& ctx = this_thread_context();
  ++stats_.of(ctx.op_class).fences;

  Event e;
  e.kind = EventKind::kFence;
  e.worker = ctx.worker;
  e.op_class = ctx.op_class;
  append(std::move(e));
  commit_worker(ctx.worker, CommitVia::kFence);
}

void SimSubstrate::commit(const PendingFlush& f, CommitVia via) {
  ShadowCell& c = cells_[f.cell.value() - 1];
  const WordPair value =
      options_.commit_mode == CommitMode::kSnapshotAtFlush ? f.snapshot : c.volatile_value;
  Event e;
  e.kind = EventKind::kCommit;
  e.worker = f.worker;
  e.cell = c.id;
  if (c.persisted) e.before = c.persistent_value;
  e.after = value;
  e.flush = f.id;
  e.via = via;
  c.persistent_value = value;
  c.persisted = true;
  append(std::move(e));
}

void SimSubstrate::commit_worker(WorkerId w, CommitVia via) {
  std::vector<PendingFlush> keep;
  keep.reserve(pending_.size());
  std::vector<PendingFlush> mine;
  for (const PendingFlush& f : pending_) (f.worker == w ? mine : keep).push_back(f);
  pending_ = std::move(keep);
  for (const PendingFlush& f : mine) commit(f, via);
}

Key SimSubstrate::key_of(Word ref) const { return live_cell(ref).key; }
Value SimSubstrate::value_of(Word ref) const { return live_cell(ref).value; }

void SimSubstrate::annotate_claim(Word node) {
  Event e;
  e.kind = EventKind::kClaim;
  e.worker = current_worker();
  e.cell = live_cell(node).id;
  append(std::move(e));
}

void SimSubstrate::annotate_key_write(Word node) {
  Event e;
  e.kind = EventKind::kKeyWrite;
  e.worker = current_worker();
  e.cell = live_cell(node).id;
  append(std::move(e));
}

void SimSubstrate::install_durable(Word ref, WordPair value) {
  ShadowCell& c = live_cell(ref);
  Event e;
  e.kind = EventKind::kInstall;
  e.worker = current_worker();
  e.cell = c.id;
  e.before = c.volatile_value;
  e.after = value;
  e.key = c.key;
  e.value = c.value;
  c.volatile_value = value;
  c.persistent_value = value;
  c.persisted = true;
  append(std::move(e));
}

void SimSubstrate::background_flush(CellId cell) {
  const ShadowCell* p = peek(cell);
  if (p == nullptr || !p->live) throw Fault("background flush of unknown cell " + std::to_string(cell.value()));
  ShadowCell& c = cells_[cell.value() - 1];
  Event e;
  e.kind = EventKind::kBgFlush;
  e.cell = c.id;
  if (c.persisted) e.before = c.persistent_value;
  e.after = c.volatile_value;
  c.persistent_value = c.volatile_value;
  c.persisted = true;
  append(std::move(e));
}

bool SimSubstrate::early_commit(FlushId id) {
  auto it = std::find_if(pending_.begin(), pending_.end(),
                         [id](const PendingFlush& f) { return f.id == id; });
  if (it == pending_.end()) return false;
  const PendingFlush f = *it;
  pending_.erase(it);
  commit(f, CommitVia::kEarly);
  return true;
}

PersistentImage SimSubstrate::persistent_snapshot() const {
  PersistentImage image;
  for (const ShadowCell& c : cells_) {
    if (c.persisted) image.cells.emplace(c.id, ImageCell{c.id, c.persistent_value, c.key, c.value});
  }
  return image;
}

PersistentImage SimSubstrate::crash() {
  PersistentImage image = persistent_snapshot();
  for (ShadowCell& c : cells_) {
    if (c.persisted) {
      c.volatile_value = c.persistent_value;
    } else {
      c.live = false;
    }
  }
  pending_.clear();
  Event e;
  e.kind = EventKind::kCrash;
  append(std::move(e));
  return image;
}

void SimSubstrate::load_image(const PersistentImage& image) {
  if (!cells_.empty()) throw ConfigError("load_image needs an empty substrate");
  if (image.cells.empty()) return;
  cells_.resize(image.cells.rbegin()->first.value());
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    cells_[i].id = CellId(i + 1);
    cells_[i].live = false;
  }
  for (const auto& [id, ic] : image.cells) {
    ShadowCell& c = cells_[id.value() - 1];
    c.key = ic.key;
    c.value = ic.value;
    c.live = true;
    Event e;
    e.kind = EventKind::kInstall;
    e.worker = current_worker();
    e.cell = id;
    e.after = ic.link;
    e.key = ic.key;
    e.value = ic.value;
    c.volatile_value = c.persistent_value = ic.link;
    c.persisted = true;
    append(std::move(e));
  }
}

void SimSubstrate::log_invoke(OpKind op, Key key) {
  Event e;
  e.kind = EventKind::kInvoke;
  e.worker = current_worker();
  e.op = op;
  e.key = key;
  append(std::move(e));
}

void SimSubstrate::log_respond(OpKind op, Key key, bool result) {
  Event e;
  e.kind = EventKind::kRespond;
  e.worker = current_worker();
  e.op = op;
  e.key = key;
  e.result = result;
  append(std::move(e));
}

}  // namespace pmset
