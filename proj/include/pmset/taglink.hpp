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

#include <string>
#include <string_view>

#include "pmset/types.hpp"

// Tag bits stored in the low bits of link words. Node references are at
// least 16-byte aligned, so bits 0..3 of a clean reference are zero.
//
//   next word: bit0 durable, bit1 marked (logically deleted), bit2 dflag
//   old word:  bit0 iflag (set by insert), bit1/bit2 as in next
//
// Bit 0 means different things in the two words, which is why rendering
// takes the role of the word.

namespace pmset::link {

inline constexpr Word kDurableBit = 0x1;
inline constexpr Word kMarkedBit = 0x2;
inline constexpr Word kDflagBit = 0x4;
inline constexpr Word kIflagBit = 0x1;
inline constexpr Word kTagMask = 0x7;

constexpr Word unmark(Word w) { return w & ~kTagMask; }

constexpr Word mark_durable(Word w) { return w | kDurableBit; }
constexpr Word mark_del(Word w) { return w | kMarkedBit; }
constexpr Word mark_dflag(Word w) { return w | kDflagBit; }
constexpr Word mark_iflag(Word w) { return w | kIflagBit; }

constexpr bool is_durable(Word w) { return w != kNil && (w & kDurableBit) != 0; }
constexpr bool is_marked(Word w) { return w != kNil && (w & kMarkedBit) != 0; }
constexpr bool is_dflagged(Word w) { return w != kNil && (w & kDflagBit) != 0; }
constexpr bool is_iflagged(Word w) { return w != kNil && (w & kIflagBit) != 0; }

/// Neither marked nor dflagged. The durable bit does not matter.
constexpr bool is_clean(Word w) { return (w & (kMarkedBit | kDflagBit)) == 0; }

/// Tag bits of w, with NIL reporting none.
constexpr Word tags(Word w) { return w == kNil ? 0 : (w & kTagMask); }

enum class Role { kNext, kOld };

/// `0xADDR` followed by flag letters in the order D M F I.
std::string render(Word w, Role role);

/// Inverse of render(). Throws ConfigError on malformed input.
Word parse(std::string_view text, Role role);

}  // namespace pmset::link
