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

#include "pmset/types.hpp"

#include <string>

namespace pmset {

std::string_view to_string(OpKind k) {
  switch (k) {
    case OpKind::kInsert: return "insert";
    case OpKind::kRemove: return "remove";
    case OpKind::kContains: return "contains";
  }
  return "?";
}

std::string_view to_string(OpClass c) {
  switch (c) {
    case OpClass::kNone: return "none";
    case OpClass::kSearch: return "search";
    case OpClass::kUpdate: return "update";
  }
  return "?";
}

std::string_view to_string(ListKind k) { return k == ListKind::kPd ? "pd" : "ld"; }

std::string_view to_string(ContainsVariant v) {
  switch (v) {
    case ContainsVariant::kPersistAll: return "persist-all";
    case ContainsVariant::kAsyncPersistAll: return "async-persist-all";
    case ContainsVariant::kPersistLast: return "persist-last";
    case ContainsVariant::kPersistFree: return "persist-free";
  }
  return "?";
}

OpKind parse_op_kind(std::string_view s) {
  if (s == "insert") return OpKind::kInsert;
  if (s == "remove") return OpKind::kRemove;
  if (s == "contains") return OpKind::kContains;
  throw ConfigError("unknown op kind: " + std::string(s));
}

OpClass parse_op_class(std::string_view s) {
  if (s == "none") return OpClass::kNone;
  if (s == "search") return OpClass::kSearch;
  if (s == "update") return OpClass::kUpdate;
  throw ConfigError("unknown op class: " + std::string(s));
}

ListKind parse_list_kind(std::string_view s) {
  if (s == "pd") return ListKind::kPd;
  if (s == "ld") return ListKind::kLd;
  throw ConfigError("unknown list kind: " + std::string(s));
}

ContainsVariant parse_contains_variant(std::string_view s) {
  for (auto v : {ContainsVariant::kPersistAll, ContainsVariant::kAsyncPersistAll,
                 ContainsVariant::kPersistLast, ContainsVariant::kPersistFree}) {
    if (to_string(v) == s) return v;
  }
  throw ConfigError("unknown contains variant: " + std::string(s));
}

}  // namespace pmset
