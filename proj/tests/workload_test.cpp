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

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "pmset/recovery.hpp"
#include "pmset/workload.hpp"

namespace pmset {
namespace {

std::vector<double> frequencies(Key k, KeyDistribution d, int samples, std::uint64_t seed) {
  KeySampler s(k, d);
  std::mt19937_64 rng(seed);
  std::vector<double> f(static_cast<std::size_t>(k), 0.0);
  for (int i = 0; i < samples; ++i) {
    const Key key = s(rng);
    EXPECT_GE(key, 1);
    EXPECT_LE(key, k);
    f[static_cast<std::size_t>(key - 1)] += 1;
  }
  return f;
}

TEST(KeyDistribution, Parse) {
  EXPECT_FALSE(KeyDistribution::parse("uniform").zipf);
  const KeyDistribution z = KeyDistribution::parse("zipf:0.99");
  EXPECT_TRUE(z.zipf);
  EXPECT_DOUBLE_EQ(z.theta, 0.99);
  EXPECT_EQ(z.to_string(), "zipf:0.99");
  EXPECT_THROW(KeyDistribution::parse("zipf:-1"), ConfigError);
  EXPECT_THROW(KeyDistribution::parse("zipf:"), ConfigError);
  EXPECT_THROW(KeyDistribution::parse("zipf:1x"), ConfigError);
  EXPECT_THROW(KeyDistribution::parse("normal"), ConfigError);
}

TEST(KeySampler, UniformIsWithinFiveSigma) {
  constexpr int kSamples = 1'000'000;
  const auto f = frequencies(100, {}, kSamples, 1);
  const double mean = kSamples / 100.0;
  const double sigma = std::sqrt(kSamples * 0.01 * 0.99);
  for (double x : f) EXPECT_LT(std::abs(x - mean), 5 * sigma);
}

// Chi-square against the analytic weights rank^-theta, with a cut-off far
// in the tail for the degrees of freedom involved.
double chi_square(const std::vector<double>& f, double theta) {
  double norm = 0;
  for (std::size_t r = 1; r <= f.size(); ++r) norm += std::pow(double(r), -theta);
  double total = 0;
  for (double x : f) total += x;
  double chi = 0;
  for (std::size_t r = 1; r <= f.size(); ++r) {
    const double expect = total * std::pow(double(r), -theta) / norm;
    chi += (f[r - 1] - expect) * (f[r - 1] - expect) / expect;
  }
  return chi;
}

TEST(KeySampler, ZipfMatchesAnalyticWeights) {
  // 49 degrees of freedom: the 0.9999 quantile is about 93.
  for (double theta : {0.0, 0.2, 0.99}) {
    const auto f = frequencies(50, KeyDistribution{true, theta}, 500'000, 3);
    EXPECT_LT(chi_square(f, theta), 93.0) << theta;
  }
  const auto u = frequencies(50, {}, 500'000, 4);
  EXPECT_LT(chi_square(u, 0.0), 93.0);
}

TEST(KeySampler, ZipfTwoKeys) {
  const auto f = frequencies(2, KeyDistribution{true, 1.0}, 600'000, 5);
  const double p = f[0] / 600'000;
  const double sigma = std::sqrt((2.0 / 3) * (1.0 / 3) / 600'000);
  EXPECT_LT(std::abs(p - 2.0 / 3), 5 * sigma);
}

TEST(Prefill, FillsHalfTheRange) {
  for (Key k : {Key{2}, Key{3}, Key{100}}) {
    SimSubstrate sub;
    auto set = SetHandle<SimSubstrate>::create(sub, ListKind::kPd);
    std::mt19937_64 rng(1);
    prefill(sub, set, k, rng);
    std::size_t n = 0;
    for (Key x = 1; x <= k; ++x) n += set.contains(x);
    EXPECT_EQ(n, static_cast<std::size_t>(k / 2));
    EXPECT_THROW(prefill(sub, set, k, rng), ConfigError);
  }
  SimSubstrate sub;
  auto set = SetHandle<SimSubstrate>::create(sub, ListKind::kLd);
  std::mt19937_64 rng(1);
  EXPECT_THROW(prefill(sub, set, 1, rng), ConfigError);
  const auto keys = prefill_keys(100, rng);
  EXPECT_EQ(std::set<Key>(keys.begin(), keys.end()).size(), 50u);
}

TEST(WorkloadConfig, Validation) {
  WorkloadConfig c;
  EXPECT_NO_THROW(c.validate());
  c.search_pct = 80;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.impl = ListKind::kLd;
  c.contains = ContainsVariant::kAsyncPersistAll;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.threads = {};
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.schedule = {Directive::crash()};
  EXPECT_THROW(c.validate(), Unsupported);
  c.mode = RunMode::kSim;
  EXPECT_NO_THROW(c.validate());
  c.key_range = 1;
  EXPECT_THROW(c.validate(), ConfigError);
}

WorkloadConfig sim_config() {
  WorkloadConfig c;
  c.mode = RunMode::kSim;
  c.key_range = 16;
  c.search_pct = 60;
  c.insert_pct = 20;
  c.remove_pct = 20;
  c.sim_ops = 60;
  return c;
}

TEST(CsvReport, HeaderIsExact) {
  EXPECT_EQ(csv_header(),
            "impl,contains,threads,keyrange,dist,search_pct,throughput,psyncs_per_search,psyncs_per_update,"
            "redundant_psyncs");
}

TEST(CsvReport, SameSeedSameRow) {
  for (ListKind impl : {ListKind::kPd, ListKind::kLd}) {
    WorkloadConfig c = sim_config();
    c.impl = impl;
    const std::string a = csv_row(c, 3, run_sim(c, 3, 42));
    const std::string b = csv_row(c, 3, run_sim(c, 3, 42));
    EXPECT_EQ(a, b);
    EXPECT_EQ(std::count(a.begin(), a.end(), ','), 9);
    EXPECT_EQ(a.rfind(impl == ListKind::kPd ? "pd,persist-last,3,16,uniform,60," : "ld,persist-last,3,16,uniform,60,", 0), 0u);
  }
}

TEST(CsvReport, NativeRowsHaveNoRedundancyColumn) {
  WorkloadConfig c;
  RunReport r;
  EXPECT_EQ(csv_row(c, 1, r).substr(csv_row(c, 1, r).rfind(',') + 1), "NA");
}

// Ratios recomputed from the event log match the report exactly.
TEST(RunSim, ReportIsRecomputableFromTheLog) {
  WorkloadConfig c = sim_config();
  std::unique_ptr<Execution> ex;
  const RunReport r = run_sim(c, 3, 9, &ex);
  const auto& ev = ex->substrate().log().events();
  std::size_t start = 0;
  while (ev[start].worker == kDirectWorker || ev[start].kind == EventKind::kAlloc ||
         ev[start].kind == EventKind::kInstall) {
    ++start;
  }
  std::uint64_t search_fences = 0, update_fences = 0, searches = 0, successes = 0;
  for (std::size_t i = start; i < ev.size(); ++i) {
    const Event& e = ev[i];
    if (e.kind == EventKind::kFence) (e.op_class == OpClass::kSearch ? search_fences : update_fences)++;
    if (e.kind == EventKind::kRespond) {
      if (e.op == OpKind::kContains) {
        ++searches;
      } else {
        successes += e.result;
      }
    }
  }
  EXPECT_EQ(r.searches, searches);
  EXPECT_EQ(r.successful_updates, successes);
  EXPECT_EQ(r.psyncs_per_search, double(search_fences) / double(searches));
  EXPECT_EQ(r.psyncs_per_update, double(update_fences) / double(successes));
  EXPECT_EQ(*r.redundant_psyncs, ex->substrate().redundancy_report().redundant_psyncs());
  EXPECT_EQ(r.ops, 3 * c.sim_ops);
}

TEST(RunSim, PersistFreeSearchesCostNothing) {
  WorkloadConfig c;
  c.mode = RunMode::kSim;
  c.contains = ContainsVariant::kPersistFree;
  c.key_range = 50;
  c.search_pct = 99;
  c.insert_pct = 1;
  c.remove_pct = 0;
  c.sim_ops = 300;
  for (ListKind impl : {ListKind::kPd, ListKind::kLd}) {
    c.impl = impl;
    const RunReport r = run_sim(c, 2, 5);
    EXPECT_EQ(r.psyncs_per_search, 0.0);
    EXPECT_GT(r.searches, 0u);
  }
}

TEST(RunSim, CrashRunReportsTheRecoveredSize) {
  WorkloadConfig c = sim_config();
  for (int w = 1; w <= 2; ++w) {
    for (int i = 0; i < 150; ++i) c.schedule.push_back(Directive::step(w));
  }
  c.schedule.push_back(Directive::crash());
  std::unique_ptr<Execution> ex;
  const RunReport r = run_sim(c, 2, 3, &ex);
  ASSERT_TRUE(r.recovered_set_size);
  EXPECT_EQ(*r.recovered_set_size, persistent_abstract_set(*ex->image(), c.impl).size());
}

TEST(RunSim, SoloUpdatesNeedAtLeastOnePsyncEach) {
  for (ListKind impl : {ListKind::kPd, ListKind::kLd}) {
    WorkloadConfig c = sim_config();
    c.impl = impl;
    c.search_pct = 0;
    c.insert_pct = 50;
    c.remove_pct = 50;
    const RunReport r = run_sim(c, 1, 8);
    EXPECT_GE(r.psyncs_per_update, 1.0);
  }
}

TEST(RunNative, ShortRun) {
  if (!NativeSubstrate::supported()) GTEST_SKIP() << "no 16-byte compare-exchange";
  WorkloadConfig c;
  c.duration = 0.2;
  c.warmup = 0.02;
  c.search_pct = 0;
  c.insert_pct = 50;
  c.remove_pct = 50;
  c.key_range = 64;
  for (ListKind impl : {ListKind::kPd, ListKind::kLd}) {
    c.impl = impl;
    const RunReport r = run_native(c, 2, 1);
    EXPECT_GT(r.throughput, 0.0);
    EXPECT_GE(r.psyncs_per_update, 1.0);
    EXPECT_FALSE(r.redundant_psyncs);
  }
}

// The native list agrees with a sequential model when driven from one
// thread, for every search variant.
TEST(RunNative, SequentialModelAgreement) {
  if (!NativeSubstrate::supported()) GTEST_SKIP() << "no 16-byte compare-exchange";
  std::mt19937_64 rng(2);
  for (ListKind impl : {ListKind::kPd, ListKind::kLd}) {
    NativeSubstrate sub;
    auto set = SetHandle<NativeSubstrate>::create(sub, impl);
    std::set<Key> model;
    for (int i = 0; i < 20000; ++i) {
      const Key k = static_cast<Key>(rng() % 32 + 1);
      switch (rng() % 3) {
        case 0:
          ASSERT_EQ(set.insert(k), model.insert(k).second);
          break;
        case 1:
          ASSERT_EQ(set.remove(k), model.erase(k) == 1);
          break;
        default: {
          const ContainsVariant v = rng() % 2 ? ContainsVariant::kPersistFree : ContainsVariant::kPersistLast;
          ASSERT_EQ(set.contains(k, v), model.count(k) == 1);
        }
      }
    }
  }
}

}  // namespace
}  // namespace pmset
