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

#include "pmset/recovery.hpp"

#include <string>
#include <unordered_set>

namespace pmset {

std::vector<CellId> recovered_chain(const PersistentImage& image, ListKind kind) {
  const std::optional<CellId> head = image.head();
  if (!head) throw CorruptImage("image has no head sentinel");

  std::vector<CellId> chain{*head};
  std::unordered_set<CellId> seen{*head};
  const ImageCell* cur = image.find(*head);
  while (cur->key != kTailKey) {
    const Word target = link::unmark(cur->link.next);
    if (target == kNil || target % (Word{1} << kSimCellShift) != 0) {
      throw CorruptImage("cell " + std::to_string(cur->id.value()) + " has no valid successor");
    }
    const ImageCell* next = image.find(sim_cell(target));
    if (next == nullptr) {
      throw CorruptImage("cell " + std::to_string(cur->id.value()) + " links to an unpersisted cell");
    }
    if (!seen.insert(next->id).second) throw CorruptImage("persisted links form a cycle");
    if (next->key <= cur->key) throw CorruptImage("persisted keys out of order");
    chain.push_back(next->id);
    cur = next;
  }

  if (kind == ListKind::kLd) {
    std::erase_if(chain, [&](CellId id) {
      const ImageCell* c = image.find(id);
      return is_user_key(c->key) && link::is_marked(c->link.next);
    });
  }
  return chain;
}

std::set<Key> persistent_abstract_set(const PersistentImage& image, ListKind kind) {
  std::set<Key> keys;
  for (CellId id : recovered_chain(image, kind)) {
    const Key k = image.find(id)->key;
    if (is_user_key(k)) keys.insert(k);
  }
  return keys;
}

Word recover_in_place(SimSubstrate& sub, const PersistentImage& image, ListKind kind) {
  const std::vector<CellId> chain = recovered_chain(image, kind);
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const Word next = i + 1 < chain.size() ? link::mark_durable(sim_ref(chain[i + 1])) : kNil;
    sub.install_durable(sim_ref(chain[i]), WordPair{next, kNil});
  }
  return sim_ref(chain.front());
}

std::unique_ptr<PdList<SimSubstrate>> recover_pd(SimSubstrate& sub, const PersistentImage& image,
                                                 ListOptions options) {
  const Word head = recover_in_place(sub, image, ListKind::kPd);
  return std::make_unique<PdList<SimSubstrate>>(sub, head, options);
}

std::unique_ptr<LdList<SimSubstrate>> recover_ld(SimSubstrate& sub, const PersistentImage& image,
                                                 ListOptions options) {
  const Word head = recover_in_place(sub, image, ListKind::kLd);
  return std::make_unique<LdList<SimSubstrate>>(sub, head, options);
}

}  // namespace pmset
