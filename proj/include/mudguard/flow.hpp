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

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>

#include "mudguard/ip_address.hpp"
#include "mudguard/mud_model.hpp"

namespace mudguard {

using Nanoseconds = std::chrono::nanoseconds;

inline constexpr Nanoseconds kDefaultWindow = std::chrono::seconds(60);

// Allowlist lookup key. src/dst are the packet's source and destination as
// seen on the wire. port is the destination port for from-device keys and
// the source port for to-device keys; 0 is the any-port wildcard.
struct FlowKey {
  IpAddress src;
  IpAddress dst;
  Direction direction = Direction::from_device;
  IpProtocol protocol = IpProtocol::tcp;
  std::uint16_t port = 0;

  AddressFamily family() const noexcept { return src.family(); }
  std::string to_string() const;

  friend auto operator<=>(const FlowKey&, const FlowKey&) = default;
  friend bool operator==(const FlowKey&, const FlowKey&) = default;
};

struct RuleOrigin {
  std::string acl;
  std::string ace;
  friend bool operator==(const RuleOrigin&, const RuleOrigin&) = default;
};

// Per-window maxima; 0 means unlimited.
struct FlowRule {
  FlowKey key;
  std::uint64_t max_packets = 0;
  std::uint64_t max_bytes = 0;
  Nanoseconds window = kDefaultWindow;
  RuleOrigin origin;
  friend bool operator==(const FlowRule&, const FlowRule&) = default;
};

// Throws Error(invalid_argument) when families differ, the window is not
// positive, or an icmp key carries a port.
void check_rule(const FlowRule& rule);

}  // namespace mudguard

template <>
struct std::hash<mudguard::FlowKey> {
  std::size_t operator()(const mudguard::FlowKey& k) const noexcept;
};
