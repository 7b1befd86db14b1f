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

#include <concepts>

#include "pmset/types.hpp"

namespace pmset {

/// What the list algorithms need from shared memory. Implemented by
/// NativeSubstrate (real atomics) and SimSubstrate (scheduled, with exact
/// persistence semantics); each list is written once against this.
template <class S>
concept Substrate = requires(S& s, const S& cs, Key k, Value v, Word ref, WordPair pair) {
  { s.allocate(k, v, pair) } -> std::same_as<Word>;
  { s.read(ref) } -> std::same_as<WordPair>;
  { s.read_next(ref) } -> std::same_as<Word>;
  { s.read_old(ref) } -> std::same_as<Word>;
  { s.dwcas(ref, pair, pair) } -> std::same_as<CasResult>;
  { s.flush(ref) } -> std::same_as<FlushId>;
  { s.fence() };
  { cs.key_of(ref) } -> std::same_as<Key>;
  { cs.value_of(ref) } -> std::same_as<Value>;
  { s.annotate_claim(ref) };
  { s.annotate_key_write(ref) };
  { s.install_durable(ref, pair) };
};

}  // namespace pmset
