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

#include "pmset/types.hpp"

namespace pmset {

/// A turnstile a scheduled worker passes before every shared-memory step.
/// In simulated mode the scheduler grants one step at a time; arrive()
/// blocks until this worker is granted its next step.
class StepGate {
 public:
  virtual ~StepGate() = default;
  virtual void arrive() = 0;
};

/// Per-thread identity used by the substrates for logging and for
/// attributing flushes and fences to an operation class.
struct ThreadContext {
  WorkerId worker = kDirectWorker;
  OpClass op_class = OpClass::kNone;
  StepGate* gate = nullptr;
};

ThreadContext& this_thread_context();

/// Attributes persistence instructions issued in scope to `c`.
class OpClassScope {
 public:
  explicit OpClassScope(OpClass c) : prev_(this_thread_context().op_class) {
    this_thread_context().op_class = c;
  }
  ~OpClassScope() { this_thread_context().op_class = prev_; }

  OpClassScope(const OpClassScope&) = delete;
  OpClassScope& operator=(const OpClassScope&) = delete;

 private:
  OpClass prev_;
};

}  // namespace pmset
