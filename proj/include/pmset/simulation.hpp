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

#include <exception>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "pmset/set_handle.hpp"
#include "pmset/sim_substrate.hpp"

namespace pmset {

struct WorkerStatus {
  WorkerId id = kNoWorker;
  std::vector<OpSpec> program;
  std::vector<bool> results;     // one per responded op
  std::optional<OpSpec> in_flight;  // invoked, not yet responded
  bool done = false;
  bool aborted = false;
};

/// Runs each worker on its own thread behind a turnstile: the thread only
/// moves when step() grants it, and parks again at the next substrate
/// primitive. One grant executes at most one primitive. Invocation and
/// response records are steps of their own.
///
/// abort_all() models a crash: every parked worker unwinds without touching
/// shared memory again. Worker ids are never reused, so workers started
/// after a crash are new processes.
class Simulation {
 public:
  using Body = std::function<bool(const OpSpec&)>;

  explicit Simulation(SimSubstrate& sub);
  ~Simulation();

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Starts a parked worker that will run `program` through `body`.
  WorkerId spawn(std::vector<OpSpec> program, Body body);

  /// Grants one step to `w`. Returns false if `w` cannot move. Rethrows
  /// anything the worker's operation threw.
  bool step(WorkerId w);

  bool runnable(WorkerId w) const;
  std::vector<WorkerId> runnable_workers() const;
  void abort_all();

  const WorkerStatus& status(WorkerId w) const;
  std::vector<WorkerId> ids() const;
  std::uint64_t steps() const { return steps_; }

 private:
  struct Worker;

  Worker* find(WorkerId w) const;

  SimSubstrate& sub_;
  std::vector<std::unique_ptr<Worker>> workers_;
  WorkerId next_id_ = 1;
  std::uint64_t steps_ = 0;
};

}  // namespace pmset
