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

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "pmset/event_log.hpp"
#include "pmset/types.hpp"

namespace pmset {

inline constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

struct HistoryOp {
  std::size_t id = 0;
  WorkerId worker = kNoWorker;
  OpKind kind = OpKind::kContains;
  Key key = 0;
  std::uint64_t invoke = 0;
  std::optional<std::uint64_t> respond;
  bool result = false;
  /// Position of the write that made a successful update visible, when the
  /// list annotated one.
  std::optional<std::uint64_t> key_write;

  bool pending() const { return !respond.has_value(); }
};

/// Invocations, responses, key writes and crashes, with positions taken
/// from a common clock (log sequence numbers when built from a log).
class History {
 public:
  /// Extracts the history of a simulated run. Key writes are attributed
  /// through claims: a key_write on node n belongs to the operation that
  /// most recently claimed n. Throws ConfigError if a worker invokes while
  /// it has an operation in flight.
  static History from_log(const EventLog& log);

  // Hand-built histories; each call advances the clock by one.
  std::size_t invoke(WorkerId worker, OpKind kind, Key key);
  void respond(std::size_t op, bool result);
  void key_write(std::size_t op);
  void crash();

  const std::vector<HistoryOp>& ops() const { return ops_; }
  const std::vector<std::uint64_t>& crashes() const { return crashes_; }
  /// The first crash after `seq`, if any.
  std::optional<std::uint64_t> crash_after(std::uint64_t seq) const;

 private:
  std::vector<HistoryOp> ops_;
  std::vector<std::uint64_t> crashes_;
  std::uint64_t clock_ = 0;
};

}  // namespace pmset
