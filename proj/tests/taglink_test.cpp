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

#include "pmset/taglink.hpp"

namespace pmset::link {
namespace {

TEST(TagLink, LayoutExamples) {
  EXPECT_EQ(mark_durable(0x40), 0x41u);
  EXPECT_TRUE(is_durable(0x41));
  EXPECT_TRUE(is_clean(0x41));
  EXPECT_FALSE(is_clean(0x42));
  EXPECT_FALSE(is_clean(0x44));
  EXPECT_EQ(unmark(0x47), 0x40u);
}

TEST(TagLink, NilHasNoTags) {
  EXPECT_FALSE(is_durable(kNil));
  EXPECT_FALSE(is_marked(kNil));
  EXPECT_FALSE(is_dflagged(kNil));
  EXPECT_FALSE(is_iflagged(kNil));
  EXPECT_EQ(tags(kNil), 0u);
  EXPECT_EQ(render(kNil, Role::kNext), "0x0");
  EXPECT_EQ(parse("0x0", Role::kOld), kNil);
}

TEST(TagLink, RoundTripAllTagCombinations) {
  for (Word target : {Word{0x40}, Word{0x1000}, Word{0xdeadbe00}, Word{0x7fffffffffffffc0}}) {
    for (Word bits = 0; bits < 8; ++bits) {
      const Word w = target | bits;
      EXPECT_EQ(unmark(w), target);
      EXPECT_EQ(tags(w), bits);
      EXPECT_EQ(is_durable(w), (bits & 1) != 0);
      EXPECT_EQ(is_iflagged(w), (bits & 1) != 0);
      EXPECT_EQ(is_marked(w), (bits & 2) != 0);
      EXPECT_EQ(is_dflagged(w), (bits & 4) != 0);
      EXPECT_EQ(parse(render(w, Role::kNext), Role::kNext), w);
      EXPECT_EQ(parse(render(w, Role::kOld), Role::kOld), w);
    }
  }
}

TEST(TagLink, UnmarkIsIdempotentAndUndoesEveryMark) {
  for (Word bits = 0; bits < 8; ++bits) {
    const Word w = 0x80 | bits;
    EXPECT_EQ(unmark(unmark(w)), unmark(w));
    EXPECT_EQ(unmark(mark_durable(w)), unmark(w));
    EXPECT_EQ(unmark(mark_del(w)), unmark(w));
    EXPECT_EQ(unmark(mark_dflag(w)), unmark(w));
    EXPECT_EQ(unmark(mark_iflag(w)), unmark(w));
  }
}

TEST(TagLink, RenderUsesRoleSpecificLetters) {
  EXPECT_EQ(render(0x47, Role::kNext), "0x40DMF");
  EXPECT_EQ(render(0x47, Role::kOld), "0x40MFI");
  EXPECT_EQ(render(0x41, Role::kNext), "0x40D");
  EXPECT_EQ(render(0x41, Role::kOld), "0x40I");
}

TEST(TagLink, ParseRejectsMalformedWords) {
  EXPECT_THROW(parse("", Role::kNext), ConfigError);
  EXPECT_THROW(parse("40", Role::kNext), ConfigError);
  EXPECT_THROW(parse("0x", Role::kNext), ConfigError);
  EXPECT_THROW(parse("0x41", Role::kNext), ConfigError);  // tag bits in the address
  EXPECT_THROW(parse("0x40X", Role::kNext), ConfigError);
  EXPECT_THROW(parse("0x40I", Role::kNext), ConfigError);
  EXPECT_THROW(parse("0x40D", Role::kOld), ConfigError);
}

}  // namespace
}  // namespace pmset::link
