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

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pmset/native_substrate.hpp"
#include "pmset/persistent_image.hpp"
#include "pmset/psync_stats.hpp"
#include "pmset/set_handle.hpp"
#include "pmset/sim_runner.hpp"

namespace pmset {

struct KeyDistribution {
  bool zipf = false;
  double theta = 0.0;

  /// "uniform" or "zipf:<theta>". Throws ConfigError, including for a
  /// negative theta.
  static KeyDistribution parse(std::string_view text);
  std::string to_string() const;
};

enum class RunMode : std::uint8_t { kNative, kSim };

struct WorkloadConfig {
  ListKind impl = ListKind::kPd;
  ContainsVariant contains = ContainsVariant::kPersistLast;
  std::vector<int> threads{1};
  Key key_range = 1000;
  int search_pct = 90;
  int insert_pct = 5;
  int remove_pct = 5;
  KeyDistribution dist;
  double duration = 1.0;  // seconds, native
  std::uint64_t seed = 1;
  RunMode mode = RunMode::kNative;
  std::vector<Directive> schedule;  // sim; round-robin once exhausted
  std::uint64_t sim_ops = 200;      // sim, per worker
  int iters = 10;
  double warmup = 0.1;  // seconds, native

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

/// Keys over [1, K]: uniform, or zipf(theta) with weight rank^-theta.
class KeySampler {
 public:
  KeySampler(Key key_range, KeyDistribution dist);
  Key operator()(std::mt19937_64& rng);

 private:
  std::uniform_int_distribution<Key> uniform_;
  std::optional<std::discrete_distribution<Key>> zipf_;
};

/// Picks contains / insert / remove according to the configured mix.
OpKind sample_op(const WorkloadConfig& config, std::mt19937_64& rng);

/// Inserts distinct uniformly drawn keys until the set holds floor(K/2).
/// Throws ConfigError if K < 2 or the set is not empty.
template <Substrate S>
void prefill(S& sub, SetHandle<S>& set, Key key_range, std::mt19937_64& rng) {
  if (key_range < 2) throw ConfigError("key range must be at least 2");
  if (sub.key_of(link::unmark(sub.read_next(set.head()))) != kTailKey) {
    throw ConfigError("prefill needs an empty set");
  }
  std::uniform_int_distribution<Key> key(1, key_range);
  Key size = 0;
  while (size < key_range / 2) {
    if (set.insert(key(rng))) ++size;
  }
}

/// Keys prefill would insert, in order, for a sim scenario.
std::vector<Key> prefill_keys(Key key_range, std::mt19937_64& rng);

struct RunReport {
  double throughput = 0.0;          // ops per second
  double psyncs_per_search = 0.0;   // search fences / searches
  double psyncs_per_update = 0.0;   // update fences / successful updates
  double psyncs_per_update_all = 0.0;  // update fences / all updates
  std::optional<std::uint64_t> redundant_psyncs;  // sim only
  std::optional<std::size_t> recovered_set_size;  // runs with a crash
  std::optional<bool> durable_linearizable;       // sim, when small enough to check
  std::uint64_t ops = 0;
  std::uint64_t searches = 0;
  std::uint64_t updates = 0;
  std::uint64_t successful_updates = 0;
  double seconds = 0.0;
  PsyncStats stats;
};

RunReport run_native(const WorkloadConfig& config, int threads, std::uint64_t seed);

/// Deterministic: one step is one logical microsecond, so identical inputs
/// give identical reports. `out` (optional) receives the execution.
RunReport run_sim(const WorkloadConfig& config, int threads, std::uint64_t seed,
                  std::unique_ptr<Execution>* out = nullptr);

std::string csv_header();
std::string csv_row(const WorkloadConfig& config, int threads, const RunReport& report);

}  // namespace pmset
