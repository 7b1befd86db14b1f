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

#include <array>
#include <atomic>
#include <memory>
#include <mutex>

#include "pmset/psync_stats.hpp"
#include "pmset/taglink.hpp"
#include "pmset/thread_context.hpp"
#include "pmset/types.hpp"

namespace pmset {

/// One list node, one cache line. The link pair comes first so it sits on
/// the 16-byte boundary the double-width CAS needs.
struct alignas(64) NativeNode {
  alignas(16) Word next = kNil;
  Word old = kNil;
  Key key = 0;
  Value value = 0;
};

/// Real atomics on the host. Flushes and fences only update counters (and
/// the fence orders memory); there is no persistent backend, so crash
/// injection is unavailable here. Nodes come from an arena that is never
/// reclaimed during a run.
class NativeSubstrate {
 public:
  /// True when the CPU has a 16-byte compare-exchange.
  static bool supported();

  /// Throws Unsupported when supported() is false.
  NativeSubstrate();
  ~NativeSubstrate();

  NativeSubstrate(const NativeSubstrate&) = delete;
  NativeSubstrate& operator=(const NativeSubstrate&) = delete;

  Word allocate(Key key, Value value, WordPair init);
  WordPair read(Word ref);
  Word read_next(Word ref);
  Word read_old(Word ref);
  CasResult dwcas(Word ref, WordPair expected, WordPair desired);
  FlushId flush(Word ref);
  void fence();
  Key key_of(Word ref) const { return node(ref)->key; }
  Value value_of(Word ref) const { return node(ref)->value; }
  void annotate_claim(Word) {}
  void annotate_key_write(Word) {}
  void install_durable(Word ref, WordPair value);

  /// Sums the per-worker counters. Exact once workers have joined.
  PsyncStats stats() const;
  void reset_stats();
  std::size_t allocated() const { return next_slot_.load(std::memory_order_relaxed); }

 private:
  static constexpr std::size_t kChunkBits = 12;
  static constexpr std::size_t kChunkSize = std::size_t{1} << kChunkBits;
  static constexpr std::size_t kMaxChunks = std::size_t{1} << 14;
  static constexpr std::size_t kCounterSlots = 256;

  struct alignas(64) Counters {
    std::array<std::atomic<std::uint64_t>, 3> flushes{};
    std::array<std::atomic<std::uint64_t>, 3> fences{};
  };

  static NativeNode* node(Word ref) { return reinterpret_cast<NativeNode*>(link::unmark(ref)); }
  Counters& counters();

  std::atomic<std::size_t> next_slot_{0};
  std::unique_ptr<std::atomic<NativeNode*>[]> chunks_;
  std::mutex grow_mutex_;
  std::unique_ptr<Counters[]> counters_;
  std::atomic<FlushId> next_flush_{1};
};

}  // namespace pmset
