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

#pragma once

#include <memory>
#include <optional>
#include <variant>

#include "pmset/ld_list.hpp"
#include "pmset/pd_list.hpp"

namespace pmset {

/// One set operation as issued by a workload or a test program. A search
/// may override the list's default variant.
struct OpSpec {
  OpKind kind = OpKind::kContains;
  Key key = 0;
  std::optional<ContainsVariant> variant;

  friend bool operator==(const OpSpec&, const OpSpec&) = default;
};

/// Either list behind one interface, for drivers that pick the list at
/// run time.
template <Substrate S>
class SetHandle {
 public:
  explicit SetHandle(std::unique_ptr<PdList<S>> pd) : impl_(std::move(pd)) {}
  explicit SetHandle(std::unique_ptr<LdList<S>> ld) : impl_(std::move(ld)) {}

  static SetHandle create(S& sub, ListKind kind, ListOptions options = {}) {
    if (kind == ListKind::kPd) return SetHandle(std::make_unique<PdList<S>>(sub, options));
    return SetHandle(std::make_unique<LdList<S>>(sub, options));
  }

  ListKind kind() const { return impl_.index() == 0 ? ListKind::kPd : ListKind::kLd; }

  bool insert(Key key, Value value = 0) {
    return std::visit([&](auto& l) { return l->insert(key, value); }, impl_);
  }
  bool remove(Key key) {
    return std::visit([&](auto& l) { return l->remove(key); }, impl_);
  }
  bool contains(Key key) {
    return std::visit([&](auto& l) { return l->contains(key); }, impl_);
  }
  bool contains(Key key, ContainsVariant v) {
    return std::visit([&](auto& l) { return l->contains(key, v); }, impl_);
  }
  bool apply(const OpSpec& op) {
    switch (op.kind) {
      case OpKind::kInsert:
        return insert(op.key);
      case OpKind::kRemove:
        return remove(op.key);
      case OpKind::kContains:
        return op.variant ? contains(op.key, *op.variant) : contains(op.key);
    }
    return false;
  }
  Word head() const {
    return std::visit([](const auto& l) { return l->head(); }, impl_);
  }

  PdList<S>* pd() { return kind() == ListKind::kPd ? std::get<0>(impl_).get() : nullptr; }
  LdList<S>* ld() { return kind() == ListKind::kLd ? std::get<1>(impl_).get() : nullptr; }

 private:
  std::variant<std::unique_ptr<PdList<S>>, std::unique_ptr<LdList<S>>> impl_;
};

}  // namespace pmset
