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

#include "pmset/sim_runner.hpp"

#include <charconv>
#include <istream>
#include <ostream>

#include "pmset/recovery.hpp"

namespace pmset {

std::string Directive::to_string() const {
  switch (kind) {
    case Kind::kStep:
      return "step " + std::to_string(arg);
    case Kind::kBgFlush:
      return "bg_flush " + std::to_string(arg);
    case Kind::kEarlyCommit:
      return "early_commit " + std::to_string(arg);
    case Kind::kCrash:
      return "crash";
  }
  return {};
}

Directive Directive::parse(std::string_view line) {
  auto trim = [](std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return std::string_view{};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  line = trim(line);
  const auto space = line.find_first_of(" \t");
  const std::string_view word = line.substr(0, space);
  const std::string_view rest = space == std::string_view::npos ? std::string_view{} : trim(line.substr(space));

  if (word == "crash") {
    if (!rest.empty()) throw ConfigError("crash takes no argument");
    return crash();
  }
  std::uint64_t arg = 0;
  const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), arg);
  if (rest.empty() || ec != std::errc() || ptr != rest.data() + rest.size()) {
    throw ConfigError("bad directive argument: '" + std::string(line) + "'");
  }
  if (word == "step") return {Kind::kStep, arg};
  if (word == "bg_flush") return {Kind::kBgFlush, arg};
  if (word == "early_commit") return {Kind::kEarlyCommit, arg};
  throw ConfigError("unknown directive: '" + std::string(line) + "'");
}

std::vector<Directive> read_schedule(std::istream& in) {
  std::vector<Directive> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    try {
      out.push_back(Directive::parse(line));
    } catch (const ConfigError& ex) {
      throw ConfigError("schedule line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

void write_schedule(std::ostream& out, const std::vector<Directive>& schedule) {
  for (const Directive& d : schedule) out << d.to_string() << '\n';
}

Execution::Execution(Scenario scenario) : scenario_(std::move(scenario)) {
  sub_ = std::make_unique<SimSubstrate>(scenario_.sim);
  set_ = std::make_unique<SetHandle<SimSubstrate>>(
      SetHandle<SimSubstrate>::create(*sub_, scenario_.impl, scenario_.list));
  for (Key k : scenario_.initial) {
    sub_->log_invoke(OpKind::kInsert, k);
    const bool r = set_->insert(k);
    sub_->log_respond(OpKind::kInsert, k, r);
  }
  sim_ = std::make_unique<Simulation>(*sub_);
  if (scenario_.audit) auditor_.emplace(scenario_.impl);
  audit();
  spawn_all(scenario_.workers);
}

Execution::~Execution() { sim_->abort_all(); }

void Execution::spawn_all(const std::vector<std::vector<OpSpec>>& programs) {
  for (const auto& program : programs) {
    sim_->spawn(program, [this](const OpSpec& op) { return set_->apply(op); });
  }
}

std::set<Key> Execution::volatile_set() const {
  return volatile_abstract_set(*sub_, set_->head(), scenario_.impl);
}

std::vector<OpSpec> Execution::pending_updates() const {
  std::vector<OpSpec> out;
  for (WorkerId w : sim_->runnable_workers()) {
    const WorkerStatus& st = sim_->status(w);
    if (st.in_flight && st.in_flight->kind != OpKind::kContains) out.push_back(*st.in_flight);
  }
  return out;
}

void Execution::audit() {
  if (!auditor_ || audit_failure_) return;
  if (auto err = auditor_->check(*sub_, set_->head(), pending_updates())) {
    audit_failure_ = "after directive " + std::to_string(trace_.size()) +
                     (trace_.empty() ? std::string() : " (" + trace_.back().to_string() + ")") + ": " + *err;
  }
}

void Execution::crash() {
  volatile_at_crash_ = volatile_set();
  pending_at_crash_ = pending_updates();
  sim_->abort_all();
  image_ = sub_->crash();
  ++crashes_;
  if (scenario_.impl == ListKind::kPd) {
    set_ = std::make_unique<SetHandle<SimSubstrate>>(recover_pd(*sub_, *image_, scenario_.list));
  } else {
    set_ = std::make_unique<SetHandle<SimSubstrate>>(recover_ld(*sub_, *image_, scenario_.list));
  }
  if (crashes_ == 1) spawn_all(scenario_.after_crash);
}

bool Execution::apply(const Directive& d) {
  switch (d.kind) {
    case Directive::Kind::kStep:
      if (!sim_->step(static_cast<WorkerId>(d.arg))) return false;
      break;
    case Directive::Kind::kBgFlush: {
      const ShadowCell* c = sub_->peek(CellId(d.arg));
      if (c == nullptr || !c->live) return false;
      sub_->background_flush(CellId(d.arg));
      break;
    }
    case Directive::Kind::kEarlyCommit:
      if (!sub_->early_commit(d.arg)) return false;
      break;
    case Directive::Kind::kCrash:
      crash();
      break;
  }
  trace_.push_back(d);
  audit();
  return true;
}

void Execution::run_to_completion(std::uint64_t max_steps) {
  std::uint64_t steps = 0;
  while (!quiescent()) {
    for (WorkerId w : runnable()) {
      apply(Directive::step(w));
      if (++steps > max_steps) throw Error("workers did not finish within the step budget");
    }
  }
}

std::unique_ptr<Execution> replay(const Scenario& scenario, const std::vector<Directive>& schedule) {
  auto ex = std::make_unique<Execution>(scenario);
  for (const Directive& d : schedule) ex->apply(d);
  return ex;
}

Scenario make_fuzz_scenario(const FuzzConfig& config, std::mt19937_64& rng) {
  if (config.min_workers < 1 || config.max_workers < config.min_workers || config.key_range < 1) {
    throw ConfigError("bad fuzz configuration");
  }
  Scenario s;
  s.impl = config.impl;
  s.list = config.list;
  s.audit = config.audit;
  if (config.random_commit_mode) {
    s.sim.commit_mode = std::bernoulli_distribution(0.5)(rng) ? CommitMode::kAtFence
                                                              : CommitMode::kSnapshotAtFlush;
  }

  std::uniform_int_distribution<Key> key(1, config.key_range);
  std::uniform_int_distribution<int> kind(0, 2);
  auto random_op = [&] {
    OpSpec op;
    op.kind = static_cast<OpKind>(kind(rng));
    op.key = key(rng);
    if (op.kind == OpKind::kContains && !config.search_variants.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, config.search_variants.size() - 1);
      op.variant = config.search_variants[pick(rng)];
    }
    return op;
  };
  auto programs = [&](int workers, int ops) {
    std::vector<std::vector<OpSpec>> out(static_cast<std::size_t>(workers));
    for (auto& p : out) p.push_back(random_op());
    std::uniform_int_distribution<std::size_t> who(0, out.size() - 1);
    for (int i = workers; i < ops; ++i) out[who(rng)].push_back(random_op());
    return out;
  };

  for (Key k = 1; k <= config.key_range; ++k) {
    if (std::bernoulli_distribution(0.4)(rng)) s.initial.push_back(k);
  }
  const int n = std::uniform_int_distribution<int>(config.min_workers, config.max_workers)(rng);
  const int ops = std::uniform_int_distribution<int>(n, std::max(n, config.max_ops))(rng);
  s.workers = programs(n, ops);
  if (config.max_post_crash_ops > 0) {
    const int post = std::uniform_int_distribution<int>(1, config.max_post_crash_ops)(rng);
    const int post_workers = std::uniform_int_distribution<int>(1, post)(rng);
    s.after_crash = programs(post_workers, post);
  }
  return s;
}

std::unique_ptr<Execution> run_fuzz(const FuzzConfig& config) {
  std::mt19937_64 rng(config.seed);
  auto ex = std::make_unique<Execution>(make_fuzz_scenario(config, rng));
  const bool crash = std::bernoulli_distribution(config.crash_probability)(rng);
  const int crash_at = std::uniform_int_distribution<int>(0, config.max_crash_step)(rng);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  auto random_directive = [&]() {
    const double r = coin(rng);
    SimSubstrate& sub = ex->substrate();
    if (r < config.bg_flush_rate && sub.cell_count() > 0) {
      std::uniform_int_distribution<std::uint64_t> cell(1, sub.cell_count());
      return Directive::bg_flush(CellId(cell(rng)));
    }
    const auto& pending = sub.pending_flushes();
    if (r < config.bg_flush_rate + config.early_commit_rate && !pending.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, pending.size() - 1);
      return Directive::early_commit(pending[pick(rng)].id);
    }
    const auto workers = ex->runnable();
    std::uniform_int_distribution<std::size_t> pick(0, workers.size() - 1);
    return Directive::step(workers[pick(rng)]);
  };

  constexpr int kBudget = 200'000;
  int directives = 0;
  while (!ex->quiescent() && !(crash && directives >= crash_at)) {
    ex->apply(random_directive());
    if (++directives > kBudget) throw Error("fuzz run exceeded its step budget");
  }
  if (crash) ex->apply(Directive::crash());
  while (!ex->quiescent()) {
    ex->apply(random_directive());
    if (++directives > kBudget) throw Error("fuzz run exceeded its step budget");
  }
  return ex;
}

namespace {

auto fence_by(WorkerId w) {
  return [w](const EventLog& log) {
    for (const Event& e : log.events()) {
      if (e.kind == EventKind::kFence && e.worker == w) return true;
    }
    return false;
  };
}

}  // namespace

std::unique_ptr<Execution> same_key_inserts_execution(int n) {
  if (n < 1) throw ConfigError("need at least one worker");
  constexpr Key kKey = 7;
  Scenario s;
  s.impl = ListKind::kPd;
  s.workers.assign(static_cast<std::size_t>(n), {OpSpec{OpKind::kInsert, kKey, std::nullopt}});
  auto ex = std::make_unique<Execution>(s);
  const std::vector<WorkerId> ids = ex->workers();
  for (WorkerId w : ids) {
    if (!ex->apply_until(Directive::step(w), fence_by(w))) {
      throw Error("worker " + std::to_string(w) + " finished without a fence");
    }
  }
  ex->run_to_completion();
  return ex;
}

std::size_t same_key_inserts_redundancy(int n) {
  return same_key_inserts_execution(n)->substrate().redundancy_report().redundant_psyncs();
}

std::unique_ptr<Execution> stale_search_execution(ContainsVariant search, Key key) {
  Scenario s;
  s.impl = ListKind::kPd;
  s.list.contains = search;
  s.initial = {key};
  s.workers = {{OpSpec{OpKind::kRemove, key, std::nullopt}}, {OpSpec{OpKind::kContains, key, search}}};
  s.after_crash = {{OpSpec{OpKind::kContains, key, search}}};
  auto ex = std::make_unique<Execution>(s);
  const std::vector<WorkerId> ids = ex->workers();
  // The remover's only fence is the one that makes its unlink persistent.
  if (!ex->apply_until(Directive::step(ids[0]), fence_by(ids[0]))) {
    throw Error("remove finished without a fence");
  }
  while (ex->apply(Directive::step(ids[1]))) {
  }
  ex->apply(Directive::crash());
  ex->run_to_completion();
  return ex;
}

}  // namespace pmset
