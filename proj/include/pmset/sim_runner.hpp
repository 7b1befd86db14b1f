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

#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "pmset/auditor.hpp"
#include "pmset/persistent_image.hpp"
#include "pmset/set_handle.hpp"
#include "pmset/sim_substrate.hpp"
#include "pmset/simulation.hpp"

namespace pmset {

/// One scheduler decision. Schedule files hold one per line:
/// `step <worker>`, `bg_flush <cell>`, `early_commit <flush>`, `crash`.
struct Directive {
  enum class Kind : std::uint8_t { kStep, kBgFlush, kEarlyCommit, kCrash };
  Kind kind = Kind::kStep;
  std::uint64_t arg = 0;

  static Directive step(WorkerId w) { return {Kind::kStep, static_cast<std::uint64_t>(w)}; }
  static Directive bg_flush(CellId c) { return {Kind::kBgFlush, c.value()}; }
  static Directive early_commit(FlushId f) { return {Kind::kEarlyCommit, f}; }
  static Directive crash() { return {Kind::kCrash, 0}; }

  std::string to_string() const;
  /// Parses one non-comment line. Throws ConfigError.
  static Directive parse(std::string_view line);

  friend bool operator==(const Directive&, const Directive&) = default;
};

std::vector<Directive> read_schedule(std::istream& in);
void write_schedule(std::ostream& out, const std::vector<Directive>& schedule);

/// Everything needed to reproduce a simulated run given its directives.
struct Scenario {
  ListKind impl = ListKind::kPd;
  ListOptions list;
  SimOptions sim;
  std::vector<Key> initial;              // inserted solo by worker 0 first
  std::vector<std::vector<OpSpec>> workers;      // started at the beginning
  std::vector<std::vector<OpSpec>> after_crash;  // started after the first crash
  bool audit = true;
};

/// A live simulated run. Directives are applied one at a time; those that
/// took effect are appended to trace(), so replaying the trace on a fresh
/// Execution of the same scenario reproduces the run exactly.
class Execution {
 public:
  explicit Execution(Scenario scenario);
  ~Execution();

  Execution(const Execution&) = delete;
  Execution& operator=(const Execution&) = delete;

  /// Returns false (and records nothing) when the directive cannot take
  /// effect: finished worker, unknown cell, flush no longer pending.
  bool apply(const Directive& d);

  /// Steps the current workers round-robin until all have finished.
  /// Throws Error if that takes more than `max_steps`.
  void run_to_completion(std::uint64_t max_steps = 1'000'000);

  /// Applies `d` repeatedly until `until` holds for the log; false if the
  /// directive stops taking effect first.
  template <class Pred>
  bool apply_until(const Directive& d, Pred until) {
    while (!until(sub_->log())) {
      if (!apply(d)) return false;
    }
    return true;
  }

  std::vector<WorkerId> runnable() const { return sim_->runnable_workers(); }
  bool quiescent() const { return runnable().empty(); }
  const WorkerStatus& worker(WorkerId w) const { return sim_->status(w); }
  std::vector<WorkerId> workers() const { return sim_->ids(); }

  const Scenario& scenario() const { return scenario_; }
  SimSubstrate& substrate() { return *sub_; }
  const SimSubstrate& substrate() const { return *sub_; }
  SetHandle<SimSubstrate>& set() { return *set_; }
  const std::vector<Directive>& trace() const { return trace_; }

  int crashes() const { return crashes_; }
  /// Image returned by the most recent crash.
  const std::optional<PersistentImage>& image() const { return image_; }
  /// Volatile abstract set just before the most recent crash.
  const std::set<Key>& volatile_at_crash() const { return volatile_at_crash_; }
  /// In-flight updates at the most recent crash.
  const std::vector<OpSpec>& pending_at_crash() const { return pending_at_crash_; }

  std::set<Key> volatile_set() const;
  std::vector<OpSpec> pending_updates() const;
  const std::optional<std::string>& audit_failure() const { return audit_failure_; }

 private:
  void audit();
  void crash();
  void spawn_all(const std::vector<std::vector<OpSpec>>& programs);

  Scenario scenario_;
  std::unique_ptr<SimSubstrate> sub_;
  std::unique_ptr<SetHandle<SimSubstrate>> set_;
  std::unique_ptr<Simulation> sim_;
  std::optional<Auditor> auditor_;
  std::vector<Directive> trace_;
  int crashes_ = 0;
  std::optional<PersistentImage> image_;
  std::set<Key> volatile_at_crash_;
  std::vector<OpSpec> pending_at_crash_;
  std::optional<std::string> audit_failure_;
};

/// Replays `schedule` on a fresh execution of `scenario`. Directives that
/// have no effect are skipped.
std::unique_ptr<Execution> replay(const Scenario& scenario, const std::vector<Directive>& schedule);

/// Random small scenarios with random schedules, crashes and persistence
/// events, for differential testing.
struct FuzzConfig {
  ListKind impl = ListKind::kPd;
  ListOptions list;
  /// Variants searches draw from; empty means the list default.
  std::vector<ContainsVariant> search_variants;
  int min_workers = 2;
  int max_workers = 4;
  Key key_range = 8;
  int max_ops = 10;            // before the crash, over all workers
  int max_post_crash_ops = 2;
  double crash_probability = 1.0;
  int max_crash_step = 80;     // crash lands uniformly within this many directives
  double bg_flush_rate = 0.05;
  double early_commit_rate = 0.05;
  bool random_commit_mode = true;
  bool audit = true;
  std::uint64_t seed = 0;
};

Scenario make_fuzz_scenario(const FuzzConfig& config, std::mt19937_64& rng);
std::unique_ptr<Execution> run_fuzz(const FuzzConfig& config);

/// n workers insert the same key into an empty PD list. The first runs
/// until its link is persistent, then each other worker in turn runs until
/// it has issued its fence, then everyone finishes. Returns the execution;
/// its redundancy report holds n - 1 redundant psyncs.
std::unique_ptr<Execution> same_key_inserts_execution(int n);
std::size_t same_key_inserts_redundancy(int n);

/// Persistence-free search against a remove whose unlink has persisted but
/// whose remover has not yet responded: the search still reports the key,
/// then a crash and an identical search report it absent. `search` selects
/// the variant used by both searches.
std::unique_ptr<Execution> stale_search_execution(ContainsVariant search, Key key = 5);

}  // namespace pmset
