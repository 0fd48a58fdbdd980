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

// Synthetic traces standing in for captured device traffic.

#include <cstdint>
#include <string>
#include <vector>

#include "mudguard/trace.hpp"

namespace mudguard {

// Constant-rate TCP SYN stream from one device to one target, cycling the
// source port. Records are outgoing with full 5-tuples.
struct SynFloodConfig {
  std::string device_id = "iot-1";
  IpAddress device = IpAddress::v4({192, 168, 1, 10});
  IpAddress target = IpAddress::v4({203, 0, 113, 10});
  std::uint16_t dst_port = 80;
  double packets_per_second = 100;
  Nanoseconds duration = std::chrono::minutes(10);
  Nanoseconds start{0};
  std::uint32_t length = 60;
};

std::vector<TraceRecord> generate_syn_flood(const SynFloodConfig& config);

// Minute-by-minute activity model for a chatty appliance: each minute is
// idle, normal, or busy, with the packet count drawn uniformly from the
// range of its class and packet sizes drawn uniformly from
// [min_length, max_length]. Timestamps are uniform inside the minute.
struct ApplianceTraceConfig {
  std::string device_id = "appliance-1";
  IpAddress device = IpAddress::v4({192, 168, 1, 20});
  IpAddress server = IpAddress::v4({203, 0, 113, 20});
  std::uint16_t server_port = 443;
  std::uint64_t minutes = 3 * 24 * 60;
  double idle_probability = 0.35;
  double busy_probability = 0.012;
  std::uint32_t normal_min_packets = 5;
  std::uint32_t normal_max_packets = 34;
  std::uint32_t busy_min_packets = 120;
  std::uint32_t busy_max_packets = 330;
  std::uint32_t min_length = 54;
  std::uint32_t max_length = 110;
  std::uint64_t seed = 1;
};

std::vector<TraceRecord> generate_appliance_trace(const ApplianceTraceConfig& config);

}  // namespace mudguard
