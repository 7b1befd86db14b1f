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

#include "pmset/persistent_image.hpp"

#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"

namespace pmset {

using nlohmann::json;

const ImageCell* PersistentImage::find(CellId id) const {
  auto it = cells.find(id);
  return it == cells.end() ? nullptr : &it->second;
}

std::optional<CellId> PersistentImage::head() const {
  for (const auto& [id, c] : cells) {
    if (c.key == kHeadKey) return id;
  }
  return std::nullopt;
}

void PersistentImage::write_jsonl(std::ostream& out) const {
  for (const auto& [id, c] : cells) {
    json j{{"cell", id.value()},
           {"next", link::render(c.link.next, link::Role::kNext)},
           {"old", link::render(c.link.old, link::Role::kOld)},
           {"key", c.key},
           {"value", c.value}};
    out << j.dump() << '\n';
  }
}

PersistentImage PersistentImage::read_jsonl(std::istream& in) {
  PersistentImage image;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      ImageCell c;
      c.id = CellId(j.at("cell").get<std::uint64_t>());
      if (!c.id.valid()) throw ConfigError("cell id 0 is reserved");
      c.link.next = link::parse(j.at("next").get<std::string>(), link::Role::kNext);
      c.link.old = link::parse(j.at("old").get<std::string>(), link::Role::kOld);
      c.key = j.at("key").get<Key>();
      c.value = j.at("value").get<Value>();
      if (!image.cells.emplace(c.id, c).second) throw ConfigError("duplicate cell");
    } catch (const json::exception& ex) {
      throw ConfigError("image line " + std::to_string(lineno) + ": " + ex.what());
    } catch (const ConfigError& ex) {
      throw ConfigError("image line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return image;
}

}  // namespace pmset
