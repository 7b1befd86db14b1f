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

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pmset {

/// A machine word holding a (possibly tagged) node reference.
using Word = std::uint64_t;
using Key = std::int64_t;
using Value = std::uint64_t;

inline constexpr Word kNil = 0;
inline constexpr Key kHeadKey = std::numeric_limits<Key>::min();
inline constexpr Key kTailKey = std::numeric_limits<Key>::max();

inline constexpr bool is_user_key(Key k) { return k > kHeadKey && k < kTailKey; }

/// The double word <next, old> that is read and written as a unit.
struct WordPair {
  Word next = kNil;
  Word old = kNil;

  friend bool operator==(const WordPair&, const WordPair&) = default;
};

struct CasResult {
  WordPair prior;
  bool success = false;
};

/// Identifies a worker (process). Worker 0 is the thread driving the
/// substrate directly; scheduled workers get ids from 1 upward.
using WorkerId = std::int32_t;
inline constexpr WorkerId kDirectWorker = 0;
inline constexpr WorkerId kNoWorker = -1;

/// One persistable cell (one node, one cache line) of the simulated heap.
class CellId {
 public:
  constexpr CellId() = default;
  constexpr explicit CellId(std::uint64_t v) : value_(v) {}

  constexpr std::uint64_t value() const { return value_; }
  constexpr bool valid() const { return value_ != 0; }

  friend constexpr auto operator<=>(const CellId&, const CellId&) = default;

 private:
  std::uint64_t value_ = 0;
};

using FlushId = std::uint64_t;

enum class OpKind : std::uint8_t { kInsert, kRemove, kContains };
enum class OpClass : std::uint8_t { kNone = 0, kSearch = 1, kUpdate = 2 };
enum class ListKind : std::uint8_t { kPd, kLd };
enum class ContainsVariant : std::uint8_t { kPersistAll, kAsyncPersistAll, kPersistLast, kPersistFree };

std::string_view to_string(OpKind k);
std::string_view to_string(OpClass c);
std::string_view to_string(ListKind k);
std::string_view to_string(ContainsVariant v);

OpKind parse_op_kind(std::string_view s);
OpClass parse_op_class(std::string_view s);
ListKind parse_list_kind(std::string_view s);
ContainsVariant parse_contains_variant(std::string_view s);

inline constexpr OpClass class_of(OpKind k) {
  return k == OpKind::kContains ? OpClass::kSearch : OpClass::kUpdate;
}

// Errors. Algorithm code never throws; these come from the harness and
// the offline tools.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The requested primitive does not exist in this mode.
class Unsupported : public Error {
 public:
  using Error::Error;
};

/// Access to an unknown cell.
class Fault : public Error {
 public:
  using Error::Error;
};

/// A persistent image with cyclic or dangling links.
class CorruptImage : public Error {
 public:
  using Error::Error;
};

/// The checker declined the input (too large, not annotated, ...).
class Refused : public Error {
 public:
  using Error::Error;
};

}  // namespace pmset

template <>
struct std::hash<pmset::CellId> {
  std::size_t operator()(const pmset::CellId& c) const noexcept {
    return std::hash<std::uint64_t>{}(c.value());
  }
};
