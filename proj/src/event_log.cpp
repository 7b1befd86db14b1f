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

#include "pmset/event_log.hpp"

#include <array>
#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"
#include "pmset/taglink.hpp"

namespace pmset {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 12> kKindNames = {
    "invoke", "respond", "alloc",  "install",  "dwcas", "flush",
    "fence",  "commit",  "bg_flush", "crash", "claim", "key_write",
};
constexpr std::array<std::string_view, 4> kViaNames = {"none", "fence", "rmw", "early"};

json pair_to_json(const WordPair& p) {
  return json{{"next", link::render(p.next, link::Role::kNext)},
              {"old", link::render(p.old, link::Role::kOld)}};
}

WordPair pair_from_json(const json& j) {
  return WordPair{link::parse(j.at("next").get<std::string>(), link::Role::kNext),
                  link::parse(j.at("old").get<std::string>(), link::Role::kOld)};
}

bool has_cell(EventKind k) {
  switch (k) {
    case EventKind::kInvoke:
    case EventKind::kRespond:
    case EventKind::kFence:
    case EventKind::kCrash:
      return false;
    default:
      return true;
  }
}

json to_json(const Event& e) {
  json j;
  j["seq"] = e.seq;
  j["kind"] = std::string(to_string(e.kind));
  j["worker"] = e.worker;
  j["cell"] = has_cell(e.kind) ? json(e.cell.value()) : json(nullptr);
  j["value_before"] = e.before ? pair_to_json(*e.before) : json(nullptr);
  j["value_after"] = e.after ? pair_to_json(*e.after) : json(nullptr);
  switch (e.kind) {
    case EventKind::kInvoke:
      j["op"] = std::string(to_string(e.op));
      j["key"] = e.key;
      break;
    case EventKind::kRespond:
      j["op"] = std::string(to_string(e.op));
      j["key"] = e.key;
      j["result"] = e.result;
      break;
    case EventKind::kAlloc:
    case EventKind::kInstall:
      j["key"] = e.key;
      j["value"] = e.value;
      break;
    case EventKind::kDwcas:
      j["success"] = e.result;
      j["expected"] = pair_to_json(e.expected);
      j["desired"] = pair_to_json(e.desired);
      break;
    case EventKind::kFlush:
      j["flush"] = e.flush;
      j["class"] = std::string(to_string(e.op_class));
      break;
    case EventKind::kFence:
      j["class"] = std::string(to_string(e.op_class));
      break;
    case EventKind::kCommit:
      j["flush"] = e.flush;
      j["via"] = std::string(to_string(e.via));
      break;
    default:
      break;
  }
  return j;
}

Event from_json(const json& j) {
  Event e;
  e.seq = j.at("seq").get<std::uint64_t>();
  e.kind = parse_event_kind(j.at("kind").get<std::string>());
  e.worker = j.at("worker").get<WorkerId>();
  if (const auto& c = j.at("cell"); !c.is_null()) e.cell = CellId(c.get<std::uint64_t>());
  if (const auto& b = j.at("value_before"); !b.is_null()) e.before = pair_from_json(b);
  if (const auto& a = j.at("value_after"); !a.is_null()) e.after = pair_from_json(a);
  if (j.contains("op")) e.op = parse_op_kind(j["op"].get<std::string>());
  if (j.contains("key")) e.key = j["key"].get<Key>();
  if (j.contains("value")) e.value = j["value"].get<Value>();
  if (j.contains("result")) e.result = j["result"].get<bool>();
  if (j.contains("success")) e.result = j["success"].get<bool>();
  if (j.contains("flush")) e.flush = j["flush"].get<FlushId>();
  if (j.contains("class")) e.op_class = parse_op_class(j["class"].get<std::string>());
  if (j.contains("via")) e.via = parse_commit_via(j["via"].get<std::string>());
  if (j.contains("expected")) e.expected = pair_from_json(j["expected"]);
  if (j.contains("desired")) e.desired = pair_from_json(j["desired"]);
  return e;
}

}  // namespace

std::string_view to_string(EventKind k) { return kKindNames.at(static_cast<std::size_t>(k)); }
std::string_view to_string(CommitVia v) { return kViaNames.at(static_cast<std::size_t>(v)); }

EventKind parse_event_kind(std::string_view s) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i) {
    if (kKindNames[i] == s) return static_cast<EventKind>(i);
  }
  throw ConfigError("unknown event kind: " + std::string(s));
}

CommitVia parse_commit_via(std::string_view s) {
  for (std::size_t i = 0; i < kViaNames.size(); ++i) {
    if (kViaNames[i] == s) return static_cast<CommitVia>(i);
  }
  throw ConfigError("unknown commit source: " + std::string(s));
}

std::uint64_t EventLog::append(Event e) {
  e.seq = events_.size();
  events_.push_back(std::move(e));
  return events_.back().seq;
}

void EventLog::write_jsonl(std::ostream& out) const {
  for (const Event& e : events_) out << to_json(e).dump() << '\n';
}

EventLog EventLog::read_jsonl(std::istream& in) {
  EventLog log;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      Event e = from_json(json::parse(line));
      if (e.seq != log.events_.size()) {
        throw ConfigError("sequence numbers must be dense and ordered");
      }
      log.events_.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw ConfigError("event log line " + std::to_string(lineno) + ": " + ex.what());
    } catch (const ConfigError& ex) {
      throw ConfigError("event log line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return log;
}

bool is_destructive_write(const Event& e) {
  switch (e.kind) {
    case EventKind::kAlloc:
      return true;
    case EventKind::kInstall:
    case EventKind::kDwcas:
      return e.before && e.after && *e.before != *e.after;
    default:
      return false;
  }
}

bool RedundancyTracker::observe(const Event& e) {
  switch (e.kind) {
    case EventKind::kFlush: {
      bool& flushed = flushed_since_write_[e.cell];
      const bool redundant = flushed;
      flushed = true;
      if (!redundant) useful_flush_since_fence_ = true;
      return redundant;
    }
    case EventKind::kFence: {
      const bool redundant = seen_fence_ && !useful_flush_since_fence_;
      seen_fence_ = true;
      useful_flush_since_fence_ = false;
      return redundant;
    }
    case EventKind::kCrash:
      reset();
      return false;
    default:
      if (is_destructive_write(e)) flushed_since_write_[e.cell] = false;
      return false;
  }
}

void RedundancyTracker::reset() {
  flushed_since_write_.clear();
  seen_fence_ = false;
  useful_flush_since_fence_ = false;
}

RedundancyReport redundancy_report(const EventLog& log) {
  RedundancyReport report;
  RedundancyTracker tracker;
  for (const Event& e : log.events()) {
    if (!tracker.observe(e)) continue;
    (e.kind == EventKind::kFlush ? report.flushes : report.fences).push_back(e.seq);
  }
  return report;
}

}  // namespace pmset
