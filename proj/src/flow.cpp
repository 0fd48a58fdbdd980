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

#include "mudguard/flow.hpp"

#include "mudguard/error.hpp"

namespace mudguard {

std::string FlowKey::to_string() const {
  return src.to_string() + " -> " + dst.to_string() + " " +
         mudguard::to_string(direction) + " " + mudguard::to_string(protocol) +
         " port " + std::to_string(port);
}

void check_rule(const FlowRule& rule) {
  if (rule.key.src.family() != rule.key.dst.family()) {
    throw Error(ErrorKind::invalid_argument,
                "flow key mixes address families: " + rule.key.to_string());
  }
  if (rule.window.count() <= 0) {
    throw Error(ErrorKind::invalid_argument, "rule window must be positive");
  }
  if (rule.key.protocol == IpProtocol::icmp && rule.key.port != 0) {
    throw Error(ErrorKind::invalid_argument, "icmp keys cannot carry a port");
  }
}

}  // namespace mudguard

std::size_t std::hash<mudguard::FlowKey>::operator()(
    const mudguard::FlowKey& k) const noexcept {
  std::size_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint8_t b) {
    h ^= b;
    h *= 1099511628211ull;
  };
  for (auto b : k.src.bytes()) mix(b);
  for (auto b : k.dst.bytes()) mix(b);
  mix(static_cast<std::uint8_t>(k.src.family()));
  mix(static_cast<std::uint8_t>(k.direction));
  mix(static_cast<std::uint8_t>(k.protocol));
  mix(static_cast<std::uint8_t>(k.port >> 8));
  mix(static_cast<std::uint8_t>(k.port));
  return h;
}
