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

#include <sstream>

#include "json.hpp"
#include "pmset/sim_runner.hpp"

namespace pmset {
namespace {

std::unique_ptr<Execution> sample_run(std::uint64_t seed) {
  FuzzConfig cfg;
  cfg.seed = seed;
  cfg.bg_flush_rate = 0.1;
  cfg.early_commit_rate = 0.1;
  return run_fuzz(cfg);
}

TEST(EventLog, JsonLinesRoundTrip) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto ex = sample_run(seed);
    std::stringstream buf;
    ex->substrate().log().write_jsonl(buf);
    const EventLog back = EventLog::read_jsonl(buf);
    EXPECT_EQ(back.events(), ex->substrate().log().events()) << "seed " << seed;
  }
}

TEST(EventLog, RecordsCarryTheCoreFields) {
  auto ex = sample_run(3);
  std::stringstream buf;
  ex->substrate().log().write_jsonl(buf);
  std::string line;
  std::uint64_t expect_seq = 0;
  while (std::getline(buf, line)) {
    const auto j = nlohmann::json::parse(line);
    for (const char* f : {"seq", "kind", "worker", "cell", "value_before", "value_after"}) {
      ASSERT_TRUE(j.contains(f)) << f << " missing in " << line;
    }
    EXPECT_EQ(j["seq"].get<std::uint64_t>(), expect_seq++);
    if (j["kind"] == "dwcas") {
      EXPECT_TRUE(j["value_before"].contains("next"));
      EXPECT_TRUE(j["value_before"].contains("old"));
    }
  }
  EXPECT_EQ(expect_seq, ex->substrate().log().size());
}

TEST(EventLog, RejectsMalformedInput) {
  std::stringstream bad_json("{not json}\n");
  EXPECT_THROW(EventLog::read_jsonl(bad_json), ConfigError);
  std::stringstream bad_kind(
      R"({"seq":0,"kind":"teleport","worker":0,"cell":null,"value_before":null,"value_after":null})"
      "\n");
  EXPECT_THROW(EventLog::read_jsonl(bad_kind), ConfigError);
  std::stringstream gap(
      R"({"seq":1,"kind":"crash","worker":-1,"cell":null,"value_before":null,"value_after":null})"
      "\n");
  EXPECT_THROW(EventLog::read_jsonl(gap), ConfigError);
}

TEST(PersistentImage, JsonLinesRoundTrip) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto ex = sample_run(seed);
    ASSERT_TRUE(ex->image());
    std::stringstream buf;
    ex->image()->write_jsonl(buf);
    EXPECT_EQ(PersistentImage::read_jsonl(buf), *ex->image());
  }
}

TEST(PersistentImage, RejectsDuplicatesAndReservedIds) {
  std::stringstream dup(R"({"cell":1,"next":"0x0","old":"0x0","key":1,"value":0})"
                        "\n"
                        R"({"cell":1,"next":"0x0","old":"0x0","key":2,"value":0})"
                        "\n");
  EXPECT_THROW(PersistentImage::read_jsonl(dup), ConfigError);
  std::stringstream zero(R"({"cell":0,"next":"0x0","old":"0x0","key":1,"value":0})"
                         "\n");
  EXPECT_THROW(PersistentImage::read_jsonl(zero), ConfigError);
}

TEST(Schedule, DirectivesRoundTrip) {
  const std::vector<Directive> s = {Directive::step(1), Directive::bg_flush(CellId(4)),
                                    Directive::early_commit(17), Directive::crash(), Directive::step(12)};
  std::stringstream buf;
  write_schedule(buf, s);
  EXPECT_EQ(read_schedule(buf), s);
}

TEST(Schedule, SkipsCommentsAndBlankLines) {
  std::stringstream in("# a comment\n\nstep 1\n   \n  # indented comment\ncrash\n");
  const std::vector<Directive> s = read_schedule(in);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0], Directive::step(1));
  EXPECT_EQ(s[1], Directive::crash());
}

TEST(Schedule, RejectsMalformedDirectives) {
  for (const char* text : {"jump 1", "step", "step x", "crash 3", "bg_flush -1", "step 1 2"}) {
    std::stringstream in(text);
    EXPECT_THROW(read_schedule(in), ConfigError) << text;
  }
}

TEST(Schedule, ReplayIsDeterministic) {
  auto ex = sample_run(11);
  auto again = replay(ex->scenario(), ex->trace());
  EXPECT_EQ(again->substrate().log().events(), ex->substrate().log().events());
}

}  // namespace
}  // namespace pmset
