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

// Command-line driver: benchmarks, scripted scenarios, offline checking
// and recovery of persistent images.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pmset/checker.hpp"
#include "pmset/recovery.hpp"
#include "pmset/workload.hpp"

namespace {

using namespace pmset;

std::vector<int> parse_threads(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int n = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(n);
    } catch (const std::exception&) {
      throw ConfigError("bad thread count: '" + item + "'");
    }
  }
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  return out;
}

struct BenchArgs {
  std::string impl = "pd";
  std::string contains = "persist-last";
  std::string threads = "1";
  Key keyrange = 1000;
  int search_pct = 90;
  int insert_pct = 5;
  int remove_pct = 5;
  std::string dist = "uniform";
  double duration = 1.0;
  std::uint64_t seed = 1;
  std::string mode = "native";
  std::string schedule;
  std::string csv;
  int iters = 10;
  std::uint64_t ops = 200;
  std::string eventlog;
  std::string image;
};

int run_bench(const BenchArgs& a) {
  WorkloadConfig c;
  c.impl = parse_list_kind(a.impl);
  c.contains = parse_contains_variant(a.contains);
  c.threads = parse_threads(a.threads);
  c.key_range = a.keyrange;
  c.search_pct = a.search_pct;
  c.insert_pct = a.insert_pct;
  c.remove_pct = a.remove_pct;
  c.dist = KeyDistribution::parse(a.dist);
  c.duration = a.duration;
  c.seed = a.seed;
  if (a.mode == "native") {
    c.mode = RunMode::kNative;
  } else if (a.mode == "sim") {
    c.mode = RunMode::kSim;
  } else {
    throw ConfigError("unknown mode: " + a.mode);
  }
  if (!a.schedule.empty()) {
    if (c.mode != RunMode::kSim) throw Unsupported("crash schedules need --mode sim");
    auto in = open_in(a.schedule);
    c.schedule = read_schedule(in);
  }
  if ((!a.eventlog.empty() || !a.image.empty()) && c.mode != RunMode::kSim) {
    throw ConfigError("--eventlog and --image need --mode sim");
  }
  c.iters = a.iters;
  c.sim_ops = a.ops;
  c.validate();
  if (c.mode == RunMode::kNative && !NativeSubstrate::supported()) {
    throw Unsupported("native mode needs a 16-byte compare-exchange on this CPU");
  }

  std::ofstream csv_file;
  std::ostream* csv = &std::cout;
  if (!a.csv.empty()) {
    csv_file = open_out(a.csv);
    csv = &csv_file;
  }
  *csv << csv_header() << '\n';

  for (int threads : c.threads) {
    RunReport sum;
    std::uint64_t redundant = 0;
    for (int i = 0; i < c.iters; ++i) {
      const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(i);
      RunReport r;
      if (c.mode == RunMode::kNative) {
        r = run_native(c, threads, seed);
      } else {
        std::unique_ptr<Execution> ex;
        r = run_sim(c, threads, seed, &ex);
        const bool last = i + 1 == c.iters && threads == c.threads.back();
        if (last && !a.eventlog.empty()) {
          auto out = open_out(a.eventlog);
          ex->substrate().log().write_jsonl(out);
        }
        if (last && !a.image.empty()) {
          if (!ex->image()) throw ConfigError("--image given but the schedule has no crash");
          auto out = open_out(a.image);
          ex->image()->write_jsonl(out);
        }
        if (r.recovered_set_size) std::cerr << "recovered_set_size=" << *r.recovered_set_size << '\n';
        redundant += r.redundant_psyncs.value_or(0);
      }
      *csv << csv_row(c, threads, r) << '\n';
      sum.throughput += r.throughput;
      sum.psyncs_per_search += r.psyncs_per_search;
      sum.psyncs_per_update += r.psyncs_per_update;
    }
    const double n = c.iters;
    std::printf("# %s %s threads=%d mean over %d: throughput=%.3f psyncs/search=%.6f psyncs/update=%.6f",
                std::string(to_string(c.impl)).c_str(), std::string(to_string(c.contains)).c_str(), threads,
                c.iters, sum.throughput / n, sum.psyncs_per_search / n, sum.psyncs_per_update / n);
    if (c.mode == RunMode::kSim) std::printf(" redundant_psyncs=%.3f", double(redundant) / n);
    std::printf("\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Persistent lock-free sets: benchmark, scenarios, checking, recovery"};
  app.require_subcommand(1);

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "run a workload and write CSV");
  b->add_option("--impl", bench.impl, "pd | ld")->capture_default_str();
  b->add_option("--contains", bench.contains, "persist-all | async-persist-all | persist-last | persist-free")
      ->capture_default_str();
  b->add_option("--threads", bench.threads, "thread count, or a comma-separated list")->capture_default_str();
  b->add_option("--keyrange", bench.keyrange, "keys are drawn from [1, K]")->capture_default_str();
  b->add_option("--search-pct", bench.search_pct)->capture_default_str();
  b->add_option("--insert-pct", bench.insert_pct)->capture_default_str();
  b->add_option("--remove-pct", bench.remove_pct)->capture_default_str();
  b->add_option("--dist", bench.dist, "uniform | zipf:<theta>")->capture_default_str();
  b->add_option("--duration", bench.duration, "seconds per native iteration")->capture_default_str();
  b->add_option("--seed", bench.seed)->capture_default_str();
  b->add_option("--mode", bench.mode, "native | sim")->capture_default_str();
  b->add_option("--schedule", bench.schedule, "sim schedule file");
  b->add_option("--csv", bench.csv, "CSV output path (default stdout)");
  b->add_option("--iters", bench.iters)->capture_default_str();
  b->add_option("--ops", bench.ops, "sim: operations per worker")->capture_default_str();
  b->add_option("--eventlog", bench.eventlog, "sim: write the last run's event log (JSON lines)");
  b->add_option("--image", bench.image, "sim: write the last run's crash image (JSON lines)");

  auto* scenario = app.add_subcommand("scenario", "run a scripted scenario");
  scenario->require_subcommand(1);
  int n = 2;
  std::string scenario_log;
  auto* t2 = scenario->add_subcommand("theorem2", "n identical inserts; count redundant psyncs");
  t2->add_option("--n", n, "worker count")->required();
  t2->add_option("--eventlog", scenario_log, "write the event log (JSON lines)");

  std::string check_path;
  std::string check_mode = "durable";
  std::size_t max_ops = 12;
  auto* check = app.add_subcommand("check", "check an event log; prints a verdict as JSON");
  check->add_option("eventlog", check_path)->required();
  check->add_option("--mode", check_mode, "linearizable | durable | sle")->capture_default_str();
  check->add_option("--max-ops", max_ops, "cap on concurrent operations searched")->capture_default_str();

  std::string image_path;
  std::string recover_impl = "pd";
  std::string recover_out;
  auto* recover = app.add_subcommand("recover", "recover a persistent image; prints the key set");
  recover->add_option("image", image_path)->required();
  recover->add_option("--impl", recover_impl, "pd | ld")->capture_default_str();
  recover->add_option("--out", recover_out, "write the recovered image (JSON lines)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*b) return run_bench(bench);

    if (*t2) {
      auto ex = same_key_inserts_execution(n);
      const std::size_t redundant = ex->substrate().redundancy_report().redundant_psyncs();
      if (!scenario_log.empty()) {
        auto out = open_out(scenario_log);
        ex->substrate().log().write_jsonl(out);
      }
      std::cout << "theorem2 n=" << n << " redundant_psyncs=" << redundant << '\n';
      return 0;
    }

    if (*check) {
      auto in = open_in(check_path);
      const History h = History::from_log(EventLog::read_jsonl(in));
      const CheckOptions opts{max_ops};
      Verdict v;
      if (check_mode == "linearizable") {
        v = check_linearizable(h, opts);
      } else if (check_mode == "durable") {
        v = check_durable_linearizable(h, opts);
      } else if (check_mode == "sle") {
        v = check_sle(h, opts);
      } else {
        throw ConfigError("unknown check mode: " + check_mode);
      }
      std::cout << v.to_json(h) << '\n';
      return v.pass ? 0 : 1;
    }

    if (*recover) {
      auto in = open_in(image_path);
      const PersistentImage image = PersistentImage::read_jsonl(in);
      const ListKind kind = parse_list_kind(recover_impl);
      SimSubstrate sub;
      sub.load_image(image);
      auto set = kind == ListKind::kPd ? SetHandle<SimSubstrate>(recover_pd(sub, image))
                                       : SetHandle<SimSubstrate>(recover_ld(sub, image));
      const std::set<Key> keys = volatile_abstract_set(sub, set.head(), kind);
      if (!recover_out.empty()) {
        auto out = open_out(recover_out);
        sub.persistent_snapshot().write_jsonl(out);
      }
      nlohmann::json j{{"size", keys.size()}, {"keys", keys}};
      std::cout << j.dump() << '\n';
      return 0;
    }
  } catch (const Refused& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return 3;
  } catch (const Unsupported& e) {
    std::cerr << "unsupported: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
