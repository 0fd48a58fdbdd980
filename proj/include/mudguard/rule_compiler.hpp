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

// Turns a parsed MUD file plus a device's addresses and a static DNS table
// into exact-match allowlist rules. Anything not allowed is dropped by the
// datapath, so drop ACEs produce no rule; one default-drop record per
// (direction, device address) is emitted for bookkeeping.

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mudguard/flow.hpp"
#include "mudguard/mud_model.hpp"

namespace mudguard {

struct DeviceContext {
  std::string device_id;
  std::vector<IpAddress> device_addresses;
  std::map<std::string, std::vector<IpAddress>> dns_map;
};

// {"device_id": "...", "addresses": ["..."], "dns": {"host": ["addr", ...]}}
DeviceContext parse_device_context(std::string_view json_text);
DeviceContext load_device_context(const std::string& path);

struct DefaultDropRecord {
  IpAddress device_address;
  Direction direction = Direction::from_device;
  friend bool operator==(const DefaultDropRecord&,
                         const DefaultDropRecord&) = default;
};

struct CompileWarning {
  std::string acl;
  std::string ace;
  std::string message;
};

struct CompiledPolicy {
  std::vector<FlowRule> rules;
  std::vector<DefaultDropRecord> default_drops;
  std::vector<CompileWarning> warnings;

  // Allow rules plus default-drop records.
  std::size_t policy_count() const noexcept {
    return rules.size() + default_drops.size();
  }
};

// ceil(count * window / period); 0 stays 0 (unlimited). window must be > 0.
std::uint64_t rate_to_window(const RateLimit& limit, Nanoseconds window);

// Throws Error(compile) when an accept ACE names a host missing from the
// DNS table.
CompiledPolicy compile(const MudFile& mud, const DeviceContext& ctx,
                       Nanoseconds window = kDefaultWindow);

std::string rules_to_json(const CompiledPolicy& policy, int indent = 2);

}  // namespace mudguard
