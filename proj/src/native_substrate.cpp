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

#include "pmset/native_substrate.hpp"

#if defined(__x86_64__)
#include <cpuid.h>
#endif

namespace pmset {
namespace {

#if defined(__x86_64__) && defined(__GCC_HAVE_SYNC_COMPARE_AND_SWAP_16)
using Pair128 = unsigned __int128;

Pair128 pack(WordPair p) { return (static_cast<Pair128>(p.old) << 64) | p.next; }
WordPair unpack(Pair128 v) {
  return WordPair{static_cast<Word>(v), static_cast<Word>(v >> 64)};
}

// lock cmpxchg16b; returns the prior value.
Pair128 cas128(NativeNode* n, Pair128 expected, Pair128 desired) {
  return __sync_val_compare_and_swap(reinterpret_cast<Pair128*>(&n->next), expected, desired);
}
constexpr bool kHaveCas128 = true;
#else
constexpr bool kHaveCas128 = false;
#endif

}  // namespace

bool NativeSubstrate::supported() {
#if defined(__x86_64__)
  unsigned eax = 0, ebx = 0, ecx = 0, edx = 0;
  if (!__get_cpuid(1, &eax, &ebx, &ecx, &edx)) return false;
  return kHaveCas128 && (ecx & bit_CMPXCHG16B) != 0;
#else
  return false;
#endif
}

NativeSubstrate::NativeSubstrate()
    : chunks_(new std::atomic<NativeNode*>[kMaxChunks]), counters_(new Counters[kCounterSlots]) {
  if (!supported()) throw Unsupported("native mode needs a 16-byte compare-exchange");
  for (std::size_t i = 0; i < kMaxChunks; ++i) chunks_[i].store(nullptr, std::memory_order_relaxed);
}

NativeSubstrate::~NativeSubstrate() {
  for (std::size_t i = 0; i < kMaxChunks; ++i) delete[] chunks_[i].load(std::memory_order_relaxed);
}

Word NativeSubstrate::allocate(Key key, Value value, WordPair init) {
  const std::size_t slot = next_slot_.fetch_add(1, std::memory_order_relaxed);
  const std::size_t chunk = slot >> kChunkBits;
  if (chunk >= kMaxChunks) throw Error("node arena exhausted");
  NativeNode* base = chunks_[chunk].load(std::memory_order_acquire);
  if (base == nullptr) {
    std::lock_guard<std::mutex> lock(grow_mutex_);
    base = chunks_[chunk].load(std::memory_order_acquire);
    if (base == nullptr) {
      base = new NativeNode[kChunkSize];
      chunks_[chunk].store(base, std::memory_order_release);
    }
  }
  NativeNode* n = base + (slot & (kChunkSize - 1));
  n->key = key;
  n->value = value;
  n->next = init.next;
  n->old = init.old;
  // Publication happens through a later dwcas, which is a full barrier.
  return reinterpret_cast<Word>(n);
}

WordPair NativeSubstrate::read(Word ref) {
#if defined(__x86_64__) && defined(__GCC_HAVE_SYNC_COMPARE_AND_SWAP_16)
  return unpack(cas128(node(ref), 0, 0));
#else
  (void)ref;
  throw Unsupported("no 16-byte compare-exchange");
#endif
}

// Single-word loads of a word that is otherwise written by the 16-byte CAS.
// x86 guarantees aligned 8-byte loads are atomic and see a whole CAS.
Word NativeSubstrate::read_next(Word ref) {
  return std::atomic_ref<Word>(node(ref)->next).load(std::memory_order_acquire);
}

Word NativeSubstrate::read_old(Word ref) {
  return std::atomic_ref<Word>(node(ref)->old).load(std::memory_order_acquire);
}

CasResult NativeSubstrate::dwcas(Word ref, WordPair expected, WordPair desired) {
#if defined(__x86_64__) && defined(__GCC_HAVE_SYNC_COMPARE_AND_SWAP_16)
  const WordPair prior = unpack(cas128(node(ref), pack(expected), pack(desired)));
  return CasResult{prior, prior == expected};
#else
  (void)ref, (void)expected, (void)desired;
  throw Unsupported("no 16-byte compare-exchange");
#endif
}

NativeSubstrate::Counters& NativeSubstrate::counters() {
  const auto w = static_cast<std::size_t>(this_thread_context().worker);
  return counters_[w % kCounterSlots];
}

FlushId NativeSubstrate::flush(Word) {
  const auto c = static_cast<std::size_t>(this_thread_context().op_class);
  counters().flushes[c].fetch_add(1, std::memory_order_relaxed);
  return next_flush_.fetch_add(1, std::memory_order_relaxed);
}

void NativeSubstrate::fence() {
  const auto c = static_cast<std::size_t>(this_thread_context().op_class);
  counters().fences[c].fetch_add(1, std::memory_order_relaxed);
  std::atomic_thread_fence(std::memory_order_seq_cst);
}

void NativeSubstrate::install_durable(Word ref, WordPair value) {
  NativeNode* n = node(ref);
  n->next = value.next;
  n->old = value.old;
  std::atomic_thread_fence(std::memory_order_seq_cst);
}

PsyncStats NativeSubstrate::stats() const {
  PsyncStats s;
  for (std::size_t i = 0; i < kCounterSlots; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      s.by_class[c].flushes += counters_[i].flushes[c].load(std::memory_order_relaxed);
      s.by_class[c].fences += counters_[i].fences[c].load(std::memory_order_relaxed);
    }
  }
  return s;
}

void NativeSubstrate::reset_stats() {
  for (std::size_t i = 0; i < kCounterSlots; ++i) {
    for (std::size_t c = 0; c < 3; ++c) {
      counters_[i].flushes[c].store(0, std::memory_order_relaxed);
      counters_[i].fences[c].store(0, std::memory_order_relaxed);
    }
  }
}

}  // namespace pmset
