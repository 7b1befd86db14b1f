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

#include "pmset/taglink.hpp"

#include <charconv>
#include <cstdio>

namespace pmset::link {

std::string render(Word w, Role role) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "0x%llx", static_cast<unsigned long long>(unmark(w)));
  std::string out(buf);
  const Word t = tags(w);
  if (role == Role::kNext && (t & kDurableBit)) out += 'D';
  if (t & kMarkedBit) out += 'M';
  if (t & kDflagBit) out += 'F';
  if (role == Role::kOld && (t & kIflagBit)) out += 'I';
  return out;
}

Word parse(std::string_view text, Role role) {
  if (text.size() < 3 || text[0] != '0' || (text[1] != 'x' && text[1] != 'X')) {
    throw ConfigError("malformed link word: " + std::string(text));
  }
  std::size_t end = 2;
  // Addresses are lower-case hex so the upper-case flag letters D and F
  // cannot be mistaken for digits.
  auto digit = [](char c) { return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'); };
  while (end < text.size() && digit(text[end])) ++end;
  Word addr = 0;
  auto [ptr, ec] = std::from_chars(text.data() + 2, text.data() + end, addr, 16);
  if (ec != std::errc{} || ptr != text.data() + end || (addr & kTagMask) != 0) {
    throw ConfigError("malformed link word: " + std::string(text));
  }
  Word w = addr;
  for (char c : text.substr(end)) {
    switch (c) {
      case 'D':
        if (role != Role::kNext) throw ConfigError("D flag on old word: " + std::string(text));
        w |= kDurableBit;
        break;
      case 'I':
        if (role != Role::kOld) throw ConfigError("I flag on next word: " + std::string(text));
        w |= kIflagBit;
        break;
      case 'M': w |= kMarkedBit; break;
      case 'F': w |= kDflagBit; break;
      default: throw ConfigError("malformed link word: " + std::string(text));
    }
  }
  return w;
}

}  // namespace pmset::link
