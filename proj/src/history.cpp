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

#include "pmset/history.hpp"

#include <string>
#include <unordered_map>

namespace pmset {

History History::from_log(const EventLog& log) {
  History h;
  std::unordered_map<WorkerId, std::size_t> in_flight;
  std::unordered_map<CellId, std::size_t> claimed_by;

  for (const Event& e : log.events()) {
    switch (e.kind) {
      case EventKind::kInvoke: {
        if (in_flight.count(e.worker)) {
          throw ConfigError("worker " + std::to_string(e.worker) + " invokes with an operation in flight");
        }
        HistoryOp op;
        op.id = h.ops_.size();
        op.worker = e.worker;
        op.kind = e.op;
        op.key = e.key;
        op.invoke = e.seq;
        in_flight[e.worker] = op.id;
        h.ops_.push_back(op);
        break;
      }
      case EventKind::kRespond: {
        auto it = in_flight.find(e.worker);
        if (it == in_flight.end()) {
          throw ConfigError("response without invocation at seq " + std::to_string(e.seq));
        }
        HistoryOp& op = h.ops_[it->second];
        if (op.kind != e.op || op.key != e.key) {
          throw ConfigError("response does not match invocation at seq " + std::to_string(e.seq));
        }
        op.respond = e.seq;
        op.result = e.result;
        in_flight.erase(it);
        break;
      }
      case EventKind::kClaim: {
        auto it = in_flight.find(e.worker);
        if (it != in_flight.end()) claimed_by[e.cell] = it->second;
        break;
      }
      case EventKind::kKeyWrite: {
        auto it = claimed_by.find(e.cell);
        if (it != claimed_by.end() && !h.ops_[it->second].key_write) h.ops_[it->second].key_write = e.seq;
        break;
      }
      case EventKind::kCrash:
        h.crashes_.push_back(e.seq);
        in_flight.clear();
        break;
      default:
        break;
    }
  }
  h.clock_ = log.size();
  return h;
}

std::size_t History::invoke(WorkerId worker, OpKind kind, Key key) {
  for (const HistoryOp& op : ops_) {
    if (op.worker == worker && op.pending() && !crash_after(op.invoke)) {
      throw ConfigError("worker " + std::to_string(worker) + " invokes with an operation in flight");
    }
  }
  HistoryOp op;
  op.id = ops_.size();
  op.worker = worker;
  op.kind = kind;
  op.key = key;
  op.invoke = clock_++;
  ops_.push_back(op);
  return op.id;
}

void History::respond(std::size_t op, bool result) {
  HistoryOp& o = ops_.at(op);
  if (!o.pending()) throw ConfigError("operation already responded");
  o.respond = clock_++;
  o.result = result;
}

void History::key_write(std::size_t op) { ops_.at(op).key_write = clock_++; }

void History::crash() { crashes_.push_back(clock_++); }

std::optional<std::uint64_t> History::crash_after(std::uint64_t seq) const {
  for (std::uint64_t c : crashes_) {
    if (c > seq) return c;
  }
  return std::nullopt;
}

}  // namespace pmset
