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

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace mudguard {

enum class ErrorKind {
  invalid_argument,
  parse,         // malformed JSON or CSV
  validation,    // document parsed but violates a model invariant
  rate_grammar,  // bad packet-rate / byte-rate string
  compile,
  table_full,
  not_found,
  io,
  fetch,
  timeout,
  trace,  // corrupt or unsupported trace file
  learn,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Error(ErrorKind kind, const std::string& what, std::size_t byte_offset)
      : std::runtime_error(what), kind_(kind), byte_offset_(byte_offset) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Set for JSON parse errors.
  std::optional<std::size_t> byte_offset() const noexcept {
    return byte_offset_;
  }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> byte_offset_;
};

}  // namespace mudguard
