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

#include "pmset/workload.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>
#include <thread>

#include "pmset/checker.hpp"
#include "pmset/recovery.hpp"

namespace pmset {

KeyDistribution KeyDistribution::parse(std::string_view text) {
  if (text == "uniform") return {};
  constexpr std::string_view kZipf = "zipf:";
  if (text.substr(0, kZipf.size()) == kZipf) {
    const std::string num(text.substr(kZipf.size()));
    std::size_t used = 0;
    double theta = 0;
    try {
      theta = std::stod(num, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (num.empty() || used != num.size()) throw ConfigError("bad zipf exponent: " + num);
    if (!(theta >= 0)) throw ConfigError("zipf exponent must be non-negative");
    return {true, theta};
  }
  throw ConfigError("unknown distribution: " + std::string(text));
}

std::string KeyDistribution::to_string() const {
  if (!zipf) return "uniform";
  char buf[32];
  std::snprintf(buf, sizeof buf, "zipf:%g", theta);
  return buf;
}

void WorkloadConfig::validate() const {
  if (threads.empty()) throw ConfigError("no thread counts given");
  for (int t : threads) {
    if (t < 1) throw ConfigError("thread count must be positive");
  }
  if (key_range < 2) throw ConfigError("key range must be at least 2");
  if (search_pct < 0 || insert_pct < 0 || remove_pct < 0 || search_pct + insert_pct + remove_pct != 100) {
    throw ConfigError("operation percentages must be non-negative and sum to 100");
  }
  if (dist.zipf && dist.theta < 0) throw ConfigError("zipf exponent must be non-negative");
  if (iters < 1) throw ConfigError("iterations must be positive");
  if (mode == RunMode::kNative) {
    if (!(duration > 0)) throw ConfigError("duration must be positive");
    if (!schedule.empty()) throw Unsupported("crash schedules need sim mode");
  } else if (sim_ops < 1) {
    throw ConfigError("sim ops must be positive");
  }
  if (impl == ListKind::kLd && !LdList<SimSubstrate>::supports(contains)) {
    throw ConfigError("the ld list offers persist-last and persist-free searches only");
  }
}

KeySampler::KeySampler(Key key_range, KeyDistribution dist) : uniform_(1, key_range) {
  if (dist.theta < 0) throw ConfigError("zipf exponent must be non-negative");
  if (dist.zipf) {
    std::vector<double> w(static_cast<std::size_t>(key_range));
    for (Key r = 1; r <= key_range; ++r) w[static_cast<std::size_t>(r - 1)] = std::pow(double(r), -dist.theta);
    zipf_.emplace(w.begin(), w.end());
  }
}

Key KeySampler::operator()(std::mt19937_64& rng) { return zipf_ ? (*zipf_)(rng) + 1 : uniform_(rng); }

OpKind sample_op(const WorkloadConfig& config, std::mt19937_64& rng) {
  const int r = std::uniform_int_distribution<int>(0, 99)(rng);
  if (r < config.search_pct) return OpKind::kContains;
  if (r < config.search_pct + config.insert_pct) return OpKind::kInsert;
  return OpKind::kRemove;
}

std::vector<Key> prefill_keys(Key key_range, std::mt19937_64& rng) {
  if (key_range < 2) throw ConfigError("key range must be at least 2");
  std::uniform_int_distribution<Key> key(1, key_range);
  std::set<Key> seen;
  std::vector<Key> out;
  while (static_cast<Key>(out.size()) < key_range / 2) {
    const Key k = key(rng);
    if (seen.insert(k).second) out.push_back(k);
  }
  return out;
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den) { return den == 0 ? 0.0 : double(num) / double(den); }

PsyncStats diff(const PsyncStats& end, const PsyncStats& begin) {
  PsyncStats d;
  for (std::size_t c = 0; c < 3; ++c) {
    d.by_class[c].flushes = end.by_class[c].flushes - begin.by_class[c].flushes;
    d.by_class[c].fences = end.by_class[c].fences - begin.by_class[c].fences;
  }
  d.redundant_flushes = end.redundant_flushes - begin.redundant_flushes;
  d.redundant_fences = end.redundant_fences - begin.redundant_fences;
  return d;
}

void fill_ratios(RunReport& r) {
  r.psyncs_per_search = ratio(r.stats.psyncs(OpClass::kSearch), r.searches);
  r.psyncs_per_update = ratio(r.stats.psyncs(OpClass::kUpdate), r.successful_updates);
  r.psyncs_per_update_all = ratio(r.stats.psyncs(OpClass::kUpdate), r.updates);
}

}  // namespace

RunReport run_native(const WorkloadConfig& config, int threads, std::uint64_t seed) {
  NativeSubstrate sub;
  auto set = SetHandle<NativeSubstrate>::create(sub, config.impl, ListOptions{config.contains});
  std::mt19937_64 rng(seed);
  prefill(sub, set, config.key_range, rng);

  struct alignas(64) Local {
    std::uint64_t ops = 0, searches = 0, updates = 0, successful = 0;
  };
  std::vector<Local> locals(static_cast<std::size_t>(threads));
  std::atomic<int> phase{0};  // 0 warmup, 1 measuring, 2 stop

  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      this_thread_context().worker = t + 1;
      std::seed_seq seq{seed, static_cast<std::uint64_t>(t + 1)};
      std::mt19937_64 local_rng(seq);
      KeySampler sampler(config.key_range, config.dist);
      Local& mine = locals[static_cast<std::size_t>(t)];
      while (true) {
        const int ph = phase.load(std::memory_order_acquire);
        if (ph == 2) break;
        const OpKind kind = sample_op(config, local_rng);
        const bool r = set.apply(OpSpec{kind, sampler(local_rng), std::nullopt});
        if (ph != 1) continue;
        ++mine.ops;
        if (kind == OpKind::kContains) {
          ++mine.searches;
        } else {
          ++mine.updates;
          if (r) ++mine.successful;
        }
      }
    });
  }

  using Clock = std::chrono::steady_clock;
  std::this_thread::sleep_for(std::chrono::duration<double>(config.warmup));
  const PsyncStats begin = sub.stats();
  const auto t0 = Clock::now();
  phase.store(1, std::memory_order_release);
  std::this_thread::sleep_for(std::chrono::duration<double>(config.duration));
  phase.store(2, std::memory_order_release);
  const auto t1 = Clock::now();
  for (auto& th : pool) th.join();

  RunReport r;
  r.stats = diff(sub.stats(), begin);
  for (const Local& l : locals) {
    r.ops += l.ops;
    r.searches += l.searches;
    r.updates += l.updates;
    r.successful_updates += l.successful;
  }
  r.seconds = std::chrono::duration<double>(t1 - t0).count();
  r.throughput = r.seconds > 0 ? double(r.ops) / r.seconds : 0.0;
  fill_ratios(r);
  return r;
}

RunReport run_sim(const WorkloadConfig& config, int threads, std::uint64_t seed,
                  std::unique_ptr<Execution>* out) {
  std::mt19937_64 rng(seed);
  Scenario s;
  s.impl = config.impl;
  s.list.contains = config.contains;
  s.audit = false;
  s.initial = prefill_keys(config.key_range, rng);
  KeySampler sampler(config.key_range, config.dist);
  for (int t = 0; t < threads; ++t) {
    std::vector<OpSpec> program;
    for (std::uint64_t i = 0; i < config.sim_ops; ++i) {
      const OpKind kind = sample_op(config, rng);
      program.push_back(OpSpec{kind, sampler(rng), std::nullopt});
    }
    s.workers.push_back(std::move(program));
  }

  auto ex = std::make_unique<Execution>(s);
  ex->substrate().reset_stats();
  const std::size_t log_start = ex->substrate().log().size();

  for (const Directive& d : config.schedule) ex->apply(d);
  if (config.schedule.empty()) {
    while (!ex->quiescent()) {
      const auto w = ex->runnable();
      ex->apply(Directive::step(w[std::uniform_int_distribution<std::size_t>(0, w.size() - 1)(rng)]));
    }
  } else {
    ex->run_to_completion();
  }

  RunReport r;
  r.stats = ex->substrate().stats();
  r.redundant_psyncs = r.stats.redundant_psyncs();
  const auto& events = ex->substrate().log().events();
  for (std::size_t i = log_start; i < events.size(); ++i) {
    const Event& e = events[i];
    if (e.kind != EventKind::kRespond) continue;
    ++r.ops;
    if (e.op == OpKind::kContains) {
      ++r.searches;
    } else {
      ++r.updates;
      if (e.result) ++r.successful_updates;
    }
  }
  std::uint64_t steps = 0;
  for (const Directive& d : ex->trace()) steps += d.kind == Directive::Kind::kStep;
  r.seconds = double(steps) * 1e-6;
  r.throughput = steps == 0 ? 0.0 : double(r.ops) / r.seconds;
  fill_ratios(r);
  // Nothing runs after a crash here, so the live set is the recovered one.
  if (ex->crashes() > 0) r.recovered_set_size = ex->volatile_set().size();
  try {
    r.durable_linearizable = check_durable_linearizable(History::from_log(ex->substrate().log())).pass;
  } catch (const Refused&) {
  }
  if (out != nullptr) *out = std::move(ex);
  return r;
}

std::string csv_header() {
  return "impl,contains,threads,keyrange,dist,search_pct,throughput,psyncs_per_search,psyncs_per_update,"
         "redundant_psyncs";
}

std::string csv_row(const WorkloadConfig& config, int threads, const RunReport& report) {
  char nums[160];
  std::snprintf(nums, sizeof nums, "%.3f,%.6f,%.6f", report.throughput, report.psyncs_per_search,
                report.psyncs_per_update);
  std::string row = std::string(to_string(config.impl)) + "," + std::string(to_string(config.contains)) + "," +
                    std::to_string(threads) + "," + std::to_string(config.key_range) + "," +
                    config.dist.to_string() + "," + std::to_string(config.search_pct) + "," + nums + ",";
  row += report.redundant_psyncs ? std::to_string(*report.redundant_psyncs) : "NA";
  return row;
}

}  // namespace pmset
