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
#include <vector>

#include "pmset/event_log.hpp"
#include "pmset/history.hpp"

namespace pmset {

struct SeqStep {
  std::set<Key> state;
  bool result = false;
};

/// The sequential set: insert succeeds iff absent, remove iff present,
/// contains reports membership.
SeqStep seq_apply(std::set<Key> state, OpKind kind, Key key);

struct Verdict {
  bool pass = false;
  /// On success: ids of the linearized operations, in order. Dropped
  /// pending operations are absent.
  std::vector<std::size_t> witness;
  /// On failure: why no linearization exists.
  std::string certificate;

  /// {"pass": true, "witness": [...]} or {"pass": false, "certificate": "..."}
  std::string to_json(const History& h) const;
};

struct CheckOptions {
  /// Cap on operations left to search after the sequential prefix of the
  /// history is folded into the initial state.
  std::size_t max_ops = 12;
};

/// Crash-free histories. Pending operations may be completed with any
/// result or dropped. Throws Refused on crashes or oversized histories.
Verdict check_linearizable(const History& h, CheckOptions options = {});

/// Crash events are removed; operations pending at a crash never respond
/// and may be completed anywhere after their invocation, or dropped.
Verdict check_durable_linearizable(const History& h, CheckOptions options = {});

/// Strict linearizability with key writes. A successful update takes effect
/// exactly at its key write. An operation pending at a crash may be kept
/// only if its key write happened before the crash, and is otherwise
/// dropped. Without crashes this is plain linearizability. Throws Refused
/// when a successful update in a crashing history has no key write.
Verdict check_sle(const History& h, CheckOptions options = {});

/// Persistence events (commit or background flush) within op's lifetime
/// after which a crash-and-retry of the identical update flips from
/// succeeding to failing: for insert, the key enters the persistent
/// abstract set; for remove, it leaves it. Empty for searches and failed
/// updates. Throws Refused if the log has no persistence events.
std::vector<std::uint64_t> cpe_candidates(const EventLog& log, const HistoryOp& op, ListKind kind);

/// The unique critical persistence event of `op`, if there is one.
std::optional<std::uint64_t> find_cpe(const EventLog& log, const HistoryOp& op, ListKind kind);

}  // namespace pmset
