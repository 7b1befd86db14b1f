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

#include <iosfwd>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pmset/types.hpp"

namespace pmset {

enum class EventKind : std::uint8_t {
  kInvoke,
  kRespond,
  kAlloc,
  kInstall,
  kDwcas,
  kFlush,
  kFence,
  kCommit,
  kBgFlush,
  kCrash,
  kClaim,
  kKeyWrite,
};

/// How a pending flush reached persistence.
enum class CommitVia : std::uint8_t { kNone, kFence, kRmw, kEarly };

std::string_view to_string(EventKind k);
std::string_view to_string(CommitVia v);
EventKind parse_event_kind(std::string_view s);
CommitVia parse_commit_via(std::string_view s);

/// One entry of the execution log. Only the fields meaningful for the kind
/// are serialized; the rest stay at their defaults.
struct Event {
  std::uint64_t seq = 0;
  EventKind kind = EventKind::kInvoke;
  WorkerId worker = kNoWorker;
  CellId cell;                 // alloc, install, dwcas, flush, commit, bg_flush, claim, key_write
  std::optional<WordPair> before;
  std::optional<WordPair> after;

  OpKind op = OpKind::kInsert;  // invoke, respond
  Key key = 0;                  // invoke, respond, alloc, install
  Value value = 0;              // alloc, install
  bool result = false;          // respond: op result; dwcas: success
  FlushId flush = 0;            // flush, commit
  OpClass op_class = OpClass::kNone;  // flush, fence
  CommitVia via = CommitVia::kNone;   // commit
  WordPair expected;            // dwcas
  WordPair desired;             // dwcas

  friend bool operator==(const Event&, const Event&) = default;
};

/// Append-only, totally ordered record of a simulated execution.
class EventLog {
 public:
  std::uint64_t append(Event e);

  const std::vector<Event>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  const Event& operator[](std::size_t i) const { return events_[i]; }
  void clear() { events_.clear(); }

  void write_jsonl(std::ostream& out) const;
  static EventLog read_jsonl(std::istream& in);

 private:
  std::vector<Event> events_;
};

/// Whether a logged event overwrites a cell's volatile value with a
/// different one.
bool is_destructive_write(const Event& e);

struct RedundancyReport {
  std::vector<std::uint64_t> flushes;  // seqs of redundant flushes
  std::vector<std::uint64_t> fences;   // seqs of redundant fences

  std::size_t redundant_psyncs() const { return fences.size(); }
};

/// Incremental redundancy classification in log order.
///
/// A flush of b is redundant if b was already flushed with no destructive
/// write to b since. A fence is redundant if some earlier fence exists and
/// no non-redundant flush happened since it. A crash starts a fresh epoch:
/// it rewinds volatile memory, so flushes before it say nothing about the
/// cells after it.
class RedundancyTracker {
 public:
  /// Returns true when `e` is a redundant flush or fence.
  bool observe(const Event& e);
  void reset();

 private:
  std::unordered_map<CellId, bool> flushed_since_write_;
  bool seen_fence_ = false;
  bool useful_flush_since_fence_ = false;
};

RedundancyReport redundancy_report(const EventLog& log);

}  // namespace pmset
