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

#include <vector>

#include "pmset/event_log.hpp"
#include "pmset/persistent_image.hpp"
#include "pmset/psync_stats.hpp"
#include "pmset/types.hpp"

namespace pmset {

/// Which volatile value a pending flush writes back when it commits.
enum class CommitMode : std::uint8_t {
  kAtFence,          // the value at commit time (default)
  kSnapshotAtFlush,  // the value when the flush was issued
};

struct SimOptions {
  CommitMode commit_mode = CommitMode::kAtFence;
  /// A locked read-modify-write orders the issuing worker's earlier flushes
  /// before itself, as on x86. When set, every dwcas commits the worker's
  /// pending flushes first (logged as commit via=rmw). It is not counted
  /// as a fence.
  bool rmw_commits_flushes = true;
};

struct ShadowCell {
  CellId id;
  Key key = 0;
  Value value = 0;
  WordPair volatile_value;
  WordPair persistent_value;
  bool persisted = false;  // persistent_value is meaningful
  bool live = true;        // false once a crash discarded a never-persisted cell
};

struct PendingFlush {
  FlushId id = 0;
  WorkerId worker = kNoWorker;
  CellId cell;
  WordPair snapshot;
};

/// Deterministic shared memory with exact persistence semantics.
///
/// Every primitive below marked "step" first passes the calling thread's
/// StepGate, so a scheduler controls the interleaving one step at a time.
/// Only one thread touches the substrate between steps; the gate handoff
/// provides the happens-before edges, so no internal locking is needed.
class SimSubstrate {
 public:
  explicit SimSubstrate(SimOptions options = {});

  SimSubstrate(const SimSubstrate&) = delete;
  SimSubstrate& operator=(const SimSubstrate&) = delete;

  // Primitives used by the list algorithms.

  Word allocate(Key key, Value value, WordPair init);
  WordPair read(Word ref);           // step
  Word read_next(Word ref);          // step
  Word read_old(Word ref);           // step
  CasResult dwcas(Word ref, WordPair expected, WordPair desired);  // step
  FlushId flush(Word ref);           // step
  void fence();                      // step
  Key key_of(Word ref) const;
  Value value_of(Word ref) const;

  /// Log annotations emitted right after the dwcas that claims an update
  /// or performs its key write; `node` is the node the update is about.
  void annotate_claim(Word node);
  void annotate_key_write(Word node);

  /// Sets volatile and persistent value at once. Bootstrap and recovery
  /// only; never interleaved with running operations.
  void install_durable(Word ref, WordPair value);

  // Scheduler-injected persistence events.

  void background_flush(CellId cell);
  /// Returns false if `id` is not a pending flush.
  bool early_commit(FlushId id);
  /// Discards volatile state and returns what persistent memory holds.
  PersistentImage crash();

  /// Populates an empty substrate with a persistent image, as if the
  /// machine had just restarted with it.
  void load_image(const PersistentImage& image);

  // History records, written by the harness around each operation.

  void log_invoke(OpKind op, Key key);
  void log_respond(OpKind op, Key key, bool result);

  // Introspection. Not steps, not logged.

  const ShadowCell* peek(Word ref) const;
  const ShadowCell* peek(CellId cell) const;
  std::size_t cell_count() const { return cells_.size(); }
  PersistentImage persistent_snapshot() const;
  const std::vector<PendingFlush>& pending_flushes() const { return pending_; }
  const EventLog& log() const { return log_; }
  const PsyncStats& stats() const { return stats_; }
  void reset_stats() { stats_ = {}; }
  RedundancyReport redundancy_report() const { return pmset::redundancy_report(log_); }
  const SimOptions& options() const { return options_; }

  static Word ref_of(CellId c) { return sim_ref(c); }
  static CellId cell_of(Word ref) { return sim_cell(ref); }

 private:
  ShadowCell& live_cell(Word ref);
  const ShadowCell& live_cell(Word ref) const;
  void append(Event e);
  void commit(const PendingFlush& f, CommitVia via);
  void commit_worker(WorkerId w, CommitVia via);

  SimOptions options_;
  std::vector<ShadowCell> cells_;  // cells_[id - 1]
  std::vector<PendingFlush> pending_;
  FlushId next_flush_ = 1;
  EventLog log_;
  PsyncStats stats_;
  RedundancyTracker redundancy_;
};

}  // namespace pmset
