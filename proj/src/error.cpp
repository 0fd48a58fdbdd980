// Copyright 2026 The mudguard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mudguard/error.hpp"

namespace mudguard {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid argument";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::validation: return "validation error";
    case ErrorKind::rate_grammar: return "rate grammar error";
    case ErrorKind::compile: return "compile error";
    case ErrorKind::table_full: return "table full";
    case ErrorKind::not_found: return "not found";
    case ErrorKind::io: return "I/O error";
    case ErrorKind::fetch: return "fetch error";
    case ErrorKind::timeout: return "timeout";
    case ErrorKind::trace: return "trace error";
    case ErrorKind::learn: return "learn error";
  }
  return "unknown error";
}

}  // namespace mudguard
