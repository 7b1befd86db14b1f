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

#include <gtest/gtest.h>

#include <random>

#include "list_fixtures.hpp"
#include "pmset/auditor.hpp"
#include "pmset/checker.hpp"
#include "pmset/simulation.hpp"

namespace pmset {
namespace {

using namespace pmset::testing;
using link::is_durable;
using link::mark_durable;

constexpr ContainsVariant kAllVariants[] = {ContainsVariant::kPersistAll, ContainsVariant::kAsyncPersistAll,
                                            ContainsVariant::kPersistLast, ContainsVariant::kPersistFree};

struct Solo {
  SimSubstrate sub;
  PdList<SimSubstrate> list{sub};
  std::uint64_t fences() const { return sub.stats().fences(); }
  std::uint64_t flushes() const { return sub.stats().flushes(); }
};

TEST(PdList, SoloInsertCostsOneFenceCoveringTwoFlushes) {
  Solo s;
  EXPECT_TRUE(s.list.insert(5));
  EXPECT_EQ(s.fences(), 1u);
  EXPECT_EQ(s.flushes(), 2u);
  EXPECT_EQ(s.sub.stats().psyncs(OpClass::kUpdate), 1u);
  const auto [p, n] = locate(s.sub, s.list.head(), 5);
  EXPECT_TRUE(is_durable(value(s.sub, p).next));
  EXPECT_EQ(value(s.sub, p).old, kNil);
}

TEST(PdList, SoloRemoveCostsOneFence) {
  Solo s;
  s.list.insert(5);
  const auto before = s.fences();
  EXPECT_TRUE(s.list.remove(5));
  EXPECT_EQ(s.fences() - before, 1u);
  EXPECT_EQ(locate(s.sub, s.list.head(), 5).second, kNil);
}

TEST(PdList, FailedUpdatesOnADurableListCostNothing) {
  Solo s;
  EXPECT_FALSE(s.list.remove(5));
  s.list.insert(5);
  s.list.insert(9);
  const auto fences = s.fences();
  const auto flushes = s.flushes();
  EXPECT_FALSE(s.list.insert(5));
  EXPECT_FALSE(s.list.remove(7));
  EXPECT_EQ(s.fences(), fences);
  EXPECT_EQ(s.flushes(), flushes);
}

TEST(PdList, DurableContainsCostsNothingInAnyVariant) {
  Solo s;
  s.list.insert(5);
  s.list.insert(9);
  const auto fences = s.fences();
  for (ContainsVariant v : kAllVariants) {
    EXPECT_TRUE(s.list.contains(9, v));
    EXPECT_FALSE(s.list.contains(7, v));
  }
  EXPECT_EQ(s.fences(), fences);
  EXPECT_EQ(s.sub.stats().of(OpClass::kSearch).flushes, 0u);
}

TEST(PdList, PersistSolo) {
  Solo s;
  const Word x = 0x4000;
  const Word a = 0x8000;
  const Word n = s.sub.allocate(3, 0, {a, x});
  s.list.persist(n, a, x);
  EXPECT_EQ(value(s.sub, n), (WordPair{mark_durable(a), kNil}));
  EXPECT_EQ(s.fences(), 1u);
  EXPECT_EQ(s.flushes(), 1u);
  EXPECT_EQ(s.sub.peek(n)->persistent_value, (WordPair{a, x}));
}

TEST(PdList, PersistAfterTheLinkChangedLeavesItAlone) {
  Solo s;
  const Word n = s.sub.allocate(3, 0, {0x8000, 0x4000});
  s.sub.dwcas(n, {0x8000, 0x4000}, {0xc000, 0x4000});
  s.list.persist(n, 0x8000, 0x4000);
  EXPECT_EQ(value(s.sub, n), (WordPair{0xc000, 0x4000}));
}

TEST(PdList, RacingPersistsHaveOneWinnerInEitherOrder) {
  for (bool first : {true, false}) {
    SimSubstrate sub;
    PdList<SimSubstrate> list(sub);
    const Word n = sub.allocate(3, 0, {0x8000, 0x4000});
    Simulation sim(sub);
    auto body = [&](const OpSpec&) {
      list.persist(n, 0x8000, kNil);
      return true;
    };
    const WorkerId a = sim.spawn({OpSpec{}}, body);
    const WorkerId b = sim.spawn({OpSpec{}}, body);
    const WorkerId x = first ? a : b;
    const WorkerId y = first ? b : a;
    while (sim.step(x)) {
    }
    while (sim.step(y)) {
    }
    EXPECT_EQ(value(sub, n), (WordPair{mark_durable(0x8000), kNil}));
    std::size_t wins = 0;
    for (const Event& e : sub.log().events()) wins += e.kind == EventKind::kDwcas && e.result;
    EXPECT_EQ(wins, 1u);
  }
}

TEST(PdList, FindOnADurableList) {
  Solo s;
  s.list.insert(5);
  s.list.insert(9);
  const auto fences = s.fences();
  const auto r = s.list.find(7);
  EXPECT_EQ(s.sub.key_of(r.p), 5);
  EXPECT_EQ(s.sub.key_of(r.curr), 9);
  EXPECT_EQ(s.fences(), fences);

  Solo empty;
  const auto e = empty.list.find(7);
  EXPECT_EQ(e.p, empty.list.head());
  EXPECT_EQ(empty.sub.key_of(e.curr), kTailKey);
  EXPECT_EQ(e.gp, kNil);
}

TEST(PdList, FindPersistsANonDurableInboundLink) {
  Execution ex(scenario(ListKind::kPd, {5}, {{ins(9)}}));
  const WorkerId w = ex.workers()[0];
  step_until(ex, w, logged(w, EventKind::kKeyWrite));  // linked, not persisted
  SimSubstrate& sub = ex.substrate();
  const auto [p, n] = locate(sub, ex.set().head(), 9);
  ASSERT_FALSE(is_durable(value(sub, p).next));
  const auto fences = sub.stats().fences();
  const auto r = ex.set().pd()->find(9);
  EXPECT_EQ(sub.stats().fences() - fences, 1u);
  EXPECT_EQ(r.p, p);
  EXPECT_EQ(r.curr, n);
  EXPECT_TRUE(is_durable(value(sub, p).next));
  finish(ex, w);
  EXPECT_TRUE(ex.worker(w).results.at(0));
  EXPECT_FALSE(ex.audit_failure()) << *ex.audit_failure();
}

TEST(PdList, InsertHelpsADirtyPredecessor) {
  Execution ex(scenario(ListKind::kPd, {3, 5}, {{rem(5)}}));
  const WorkerId w = ex.workers()[0];
  step_until(ex, w, logged(w, EventKind::kClaim));  // node 3 is dflagged
  const auto [p, n] = locate(ex.substrate(), ex.set().head(), 5);
  ASSERT_TRUE(link::is_dflagged(value(ex.substrate(), p).next));
  EXPECT_TRUE(ex.set().insert(4));
  EXPECT_EQ(ex.volatile_set(), (std::set<Key>{3, 4}));
  finish(ex, w);
  EXPECT_TRUE(ex.worker(w).results.at(0));
  EXPECT_EQ(ex.volatile_set(), (std::set<Key>{3, 4}));
}

TEST(PdList, HelpMarkedUnlinksAndPersists) {
  Execution ex(scenario(ListKind::kPd, {5}, {{rem(5)}}));
  const WorkerId w = ex.workers()[0];
  step_until(ex, w, dwcas_ok(w, 2));  // dflag, then mark
  SimSubstrate& sub = ex.substrate();
  const auto [p, n] = locate(sub, ex.set().head(), 5);
  ASSERT_EQ(value(sub, p), (WordPair{mark_durable(link::mark_dflag(n)), kNil}));
  ASSERT_TRUE(link::is_marked(value(sub, n).next));
  const Word succ = link::unmark(value(sub, n).next);
  ex.set().pd()->help_marked(p, n);
  EXPECT_EQ(value(sub, p), (WordPair{mark_durable(succ), kNil}));
  EXPECT_EQ(locate(sub, ex.set().head(), 5).second, kNil);
  finish(ex, w);
  EXPECT_TRUE(ex.worker(w).results.at(0));
}

TEST(PdList, HelpRemovePersistsTheVictimsLinkFirst) {
  Execution ex(scenario(ListKind::kPd, {5, 9}, {{ins(7)}}));
  const WorkerId w = ex.workers()[0];
  step_until(ex, w, logged(w, EventKind::kKeyWrite));  // 5 -> 7 not durable
  SimSubstrate& sub = ex.substrate();
  const auto [p, n5] = locate(sub, ex.set().head(), 5);
  ASSERT_FALSE(is_durable(value(sub, n5).next));
  const std::size_t start = sub.log().size();
  EXPECT_TRUE(ex.set().remove(5));
  // Within the remove, node 5's link is flushed before node 5 is marked.
  std::optional<std::size_t> flush_at, mark_at;
  for (std::size_t i = start; i < sub.log().size(); ++i) {
    const Event& e = sub.log()[i];
    if (e.cell != sim_cell(n5)) continue;
    if (e.kind == EventKind::kFlush && !flush_at) flush_at = i;
    if (e.kind == EventKind::kDwcas && e.result && link::is_marked(e.after->next)) mark_at = i;
  }
  ASSERT_TRUE(flush_at && mark_at);
  EXPECT_LT(*flush_at, *mark_at);
  finish(ex, w);
  EXPECT_TRUE(ex.worker(w).results.at(0));
  EXPECT_EQ(ex.volatile_set(), (std::set<Key>{7, 9}));
  EXPECT_FALSE(ex.audit_failure()) << *ex.audit_failure();
}

// Layout with a non-durable interior link (2 -> 5) and a non-durable
// terminal link (8 -> 9), both left by stalled inserts.
std::unique_ptr<Execution> two_dirty_links(ContainsVariant v) {
  auto ex = std::make_unique<Execution>(scenario(ListKind::kPd, {2, 8}, {{ins(5)}, {ins(9)}}, v));
  for (WorkerId w : ex->workers()) step_until(*ex, w, logged(w, EventKind::kKeyWrite));
  return ex;
}

TEST(PdList, ContainsVariantsPayForDirtyLinksDifferently) {
  struct Case {
    ContainsVariant v;
    std::uint64_t fences;
    bool found;
  };
  // The persist-free search reads the unpersisted insert of 9 as not yet
  // having happened.
  for (const Case c : {Case{ContainsVariant::kPersistAll, 2, true}, Case{ContainsVariant::kAsyncPersistAll, 1, true},
                       Case{ContainsVariant::kPersistLast, 1, true}, Case{ContainsVariant::kPersistFree, 0, false}}) {
    auto ex = two_dirty_links(c.v);
    const auto fences = ex->substrate().stats().fences();
    EXPECT_EQ(ex->set().contains(9, c.v), c.found) << to_string(c.v);
    EXPECT_EQ(ex->substrate().stats().fences() - fences, c.fences) << to_string(c.v);
  }
}

TEST(PdList, AsyncContainsSkipsLinksThatMovedAndStaysCorrect) {
  Scenario s = scenario(ListKind::kPd, {2, 8}, {{ins(5)}, {has(9, ContainsVariant::kAsyncPersistAll)}});
  s.list.contains = ContainsVariant::kAsyncPersistAll;
  Execution ex(s);
  const WorkerId inserter = ex.workers()[0];
  const WorkerId searcher = ex.workers()[1];
  step_until(ex, inserter, logged(inserter, EventKind::kKeyWrite));
  step_until(ex, searcher, logged(searcher, EventKind::kFence));
  finish(ex, inserter);  // persists 2 -> 5 itself; the searcher's record is stale
  const std::size_t start = ex.substrate().log().size();
  finish(ex, searcher);
  EXPECT_FALSE(ex.worker(searcher).results.at(0));
  for (std::size_t i = start; i < ex.substrate().log().size(); ++i) {
    EXPECT_NE(ex.substrate().log()[i].kind, EventKind::kDwcas);
  }
}

TEST(PdList, PersistFreeContains) {
  Solo s;
  s.list.insert(5);
  EXPECT_TRUE(s.list.contains_persist_free(5));
  EXPECT_EQ(s.sub.stats().of(OpClass::kSearch), ClassCounters{});
}

TEST(PdList, PersistFreeContainsAnswersFromOldAfterAnUnpersistedUnlink) {
  Execution ex(scenario(ListKind::kPd, {5}, {{rem(5)}}));
  const WorkerId w = ex.workers()[0];
  step_until(ex, w, logged(w, EventKind::kKeyWrite));  // unlinked, not persisted
  SimSubstrate& sub = ex.substrate();
  const WordPair h = value(sub, ex.set().head());
  ASSERT_FALSE(is_durable(h.next));
  ASSERT_FALSE(link::is_iflagged(h.old));
  EXPECT_EQ(sub.key_of(link::unmark(h.old)), 5);
  EXPECT_TRUE(ex.set().contains(5, ContainsVariant::kPersistFree));
  EXPECT_FALSE(ex.set().contains(5, ContainsVariant::kPersistLast));
}

TEST(PdList, PersistFreeContainsIgnoresAnUnpersistedInsert) {
  Execution ex(scenario(ListKind::kPd, {}, {{ins(7)}}));
  const WorkerId w = ex.workers()[0];
  step_until(ex, w, logged(w, EventKind::kKeyWrite));
  EXPECT_FALSE(ex.set().contains(7, ContainsVariant::kPersistFree));
  EXPECT_TRUE(ex.set().contains(7, ContainsVariant::kPersistLast));
}

// Exactly one of two racing removes wins, over every "run a for i steps,
// then b to the end, then a" schedule in both orders, plus random ones.
TEST(PdList, RacingRemovesHaveOneWinner) {
  const Scenario s = scenario(ListKind::kPd, {3, 5, 8}, {{rem(5)}, {rem(5)}});
  auto check = [](Execution& ex) {
    for (WorkerId w : ex.workers()) finish(ex, w);
    const auto& ids = ex.workers();
    const int wins = ex.worker(ids[0]).results.at(0) + ex.worker(ids[1]).results.at(0);
    EXPECT_EQ(wins, 1);
    EXPECT_EQ(ex.volatile_set(), (std::set<Key>{3, 8}));
    EXPECT_FALSE(ex.audit_failure()) << *ex.audit_failure();
  };
  for (int order = 0; order < 2; ++order) {
    for (int i = 0; i < 40; ++i) {
      Execution ex(s);
      const WorkerId a = ex.workers()[order];
      const WorkerId b = ex.workers()[1 - order];
      for (int k = 0; k < i && ex.apply(Directive::step(a)); ++k) {
      }
      finish(ex, b);
      check(ex);
    }
  }
  std::mt19937_64 rng(7);
  for (int run = 0; run < 200; ++run) {
    Execution ex(s);
    while (!ex.quiescent()) {
      const auto r = ex.runnable();
      ex.apply(Directive::step(r[rng() % r.size()]));
    }
    check(ex);
  }
}

FuzzConfig pd_fuzz(std::uint64_t seed) {
  FuzzConfig cfg;
  cfg.impl = ListKind::kPd;
  cfg.seed = seed;
  cfg.search_variants = {std::begin(kAllVariants), std::end(kAllVariants)};
  return cfg;
}

TEST(PdList, InvariantsHoldAfterEveryStep) {
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    auto ex = run_fuzz(pd_fuzz(seed));
    EXPECT_FALSE(ex->audit_failure()) << "seed " << seed << ": " << *ex->audit_failure();
  }
}

// A failed persist dwcas means someone already did the identical one.
TEST(PdList, PersistFailureImpliesEarlierIdenticalSuccess) {
  std::size_t failures = 0;
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    FuzzConfig cfg = pd_fuzz(seed);
    cfg.crash_probability = 0;
    cfg.max_workers = 4;
    cfg.min_workers = 3;
    auto ex = run_fuzz(cfg);
    const auto& ev = ex->substrate().log().events();
    for (std::size_t i = 0; i < ev.size(); ++i) {
      const Event& e = ev[i];
      const bool persist_shape = e.kind == EventKind::kDwcas && !is_durable(e.expected.next) &&
                                 e.desired == WordPair{mark_durable(e.expected.next), kNil};
      if (!persist_shape || e.result) continue;
      ++failures;
      bool found = false;
      for (std::size_t j = 0; j < i && !found; ++j) {
        const Event& f = ev[j];
        found = f.kind == EventKind::kDwcas && f.result && f.cell == e.cell && f.desired == e.desired &&
                f.expected.next == e.expected.next;
      }
      EXPECT_TRUE(found) << "seed " << seed << " seq " << e.seq;
    }
  }
  EXPECT_GT(failures, 0u);
}

TEST(PdList, CrashFreeHistoriesAreLinearizable) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    FuzzConfig cfg = pd_fuzz(seed);
    cfg.crash_probability = 0;
    auto ex = run_fuzz(cfg);
    const History h = History::from_log(ex->substrate().log());
    const Verdict v = check_linearizable(h);
    EXPECT_TRUE(v.pass) << "seed " << seed << ": " << v.certificate;
  }
}

// Each successful update changes the volatile set (key write) strictly
// before its critical persistence event.
TEST(PdList, VolatileChangePrecedesPersistence) {
  std::size_t checked = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    FuzzConfig cfg = pd_fuzz(seed);
    cfg.crash_probability = 0;
    auto ex = run_fuzz(cfg);
    const EventLog& log = ex->substrate().log();
    const History h = History::from_log(log);
    for (const HistoryOp& op : h.ops()) {
      if (op.kind == OpKind::kContains || !op.result || op.worker == kDirectWorker) continue;
      const auto cpe = find_cpe(log, op, ListKind::kPd);
      ASSERT_TRUE(cpe && op.key_write) << "seed " << seed;
      EXPECT_LT(*op.key_write, *cpe);
      ++checked;
    }
  }
  EXPECT_GT(checked, 50u);
}

TEST(PdList, PersistFreeSearchesNeverFlushOrFence) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    FuzzConfig cfg = pd_fuzz(seed);
    cfg.list.contains = ContainsVariant::kPersistFree;
    cfg.search_variants.clear();
    auto ex = run_fuzz(cfg);
    EXPECT_EQ(ex->substrate().stats().of(OpClass::kSearch), ClassCounters{}) << "seed " << seed;
  }
}

// Under a fair random scheduler some operation responds within a bounded
// number of steps.
TEST(PdList, ProgressUnderFairScheduling) {
  std::mt19937_64 rng(3);
  for (int run = 0; run < 40; ++run) {
    std::vector<std::vector<OpSpec>> programs(4);
    for (auto& p : programs) {
      for (int i = 0; i < 15; ++i) {
        const Key k = static_cast<Key>(rng() % 4 + 1);
        p.push_back(i % 3 == 0 ? ins(k) : i % 3 == 1 ? rem(k) : has(k));
      }
    }
    Execution ex(scenario(ListKind::kPd, {1, 3}, programs));
    std::size_t since = 0;
    std::size_t worst = 0;
    std::size_t responses = 0;
    while (!ex.quiescent()) {
      const auto r = ex.runnable();
      ex.apply(Directive::step(r[rng() % r.size()]));
      std::size_t total = 0;
      for (WorkerId w : ex.workers()) total += ex.worker(w).results.size();
      if (total != responses) {
        responses = total;
        since = 0;
      } else {
        worst = std::max(worst, ++since);
      }
    }
    EXPECT_LT(worst, 400u);
  }
}

}  // namespace
}  // namespace pmset
