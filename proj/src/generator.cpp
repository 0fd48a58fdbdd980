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

#include "mudguard/generator.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mudguard/error.hpp"

namespace mudguard {

std::vector<TraceRecord> generate_syn_flood(const SynFloodConfig& config) {
  if (!(config.packets_per_second > 0) || config.duration.count() <= 0) {
    throw Error(ErrorKind::invalid_argument, "flood needs a positive rate and duration");
  }
  if (config.device.family() != config.target.family()) {
    throw Error(ErrorKind::invalid_argument, "flood addresses mix families");
  }
  const double gap_ns = 1e9 / config.packets_per_second;
  const auto count = static_cast<std::uint64_t>(
      std::floor(static_cast<double>(config.duration.count()) / gap_ns));
  std::vector<TraceRecord> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    TraceRecord r;
    r.timestamp = config.start + Nanoseconds(static_cast<std::int64_t>(std::llround(double(i) * gap_ns)));
    r.device_id = config.device_id;
    r.direction = TraceDirection::outgoing;
    r.protocol = TraceProtocol::tcp;
    r.length = config.length;
    r.src = config.device;
    r.dst = config.target;
    r.src_port = static_cast<std::uint16_t>(1024 + i % 64000);
    r.dst_port = config.dst_port;
    r.tcp_flags = tcp_flags::syn;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TraceRecord> generate_appliance_trace(const ApplianceTraceConfig& c) {
  if (c.normal_min_packets > c.normal_max_packets || c.busy_min_packets > c.busy_max_packets ||
      c.min_length == 0 || c.min_length > c.max_length) {
    throw Error(ErrorKind::invalid_argument, "inconsistent appliance trace ranges");
  }
  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::uint32_t> normal(c.normal_min_packets, c.normal_max_packets);
  std::uniform_int_distribution<std::uint32_t> busy(c.busy_min_packets, c.busy_max_packets);
  std::uniform_int_distribution<std::uint32_t> length(c.min_length, c.max_length);
  std::uniform_int_distribution<std::int64_t> offset(0, 60'000'000'000 - 1);

  std::vector<TraceRecord> out;
  std::vector<std::int64_t> offsets;
  for (std::uint64_t minute = 0; minute < c.minutes; ++minute) {
    const double u = unit(rng);
    std::uint32_t n = 0;
    if (u < c.idle_probability) {
      n = 0;
    } else if (u < c.idle_probability + c.busy_probability) {
      n = busy(rng);
    } else {
      n = normal(rng);
    }
    offsets.resize(n);
    for (auto& o : offsets) o = offset(rng);
    std::sort(offsets.begin(), offsets.end());
    for (const auto o : offsets) {
      TraceRecord r;
      r.timestamp = Nanoseconds(static_cast<std::int64_t>(minute) * 60'000'000'000 + o);
      r.device_id = c.device_id;
      r.direction = TraceDirection::outgoing;
      r.protocol = TraceProtocol::tcp;
      r.length = length(rng);
      r.src = c.device;
      r.dst = c.server;
      r.src_port = 49152;
      r.dst_port = c.server_port;
      r.tcp_flags = tcp_flags::ack;
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace mudguard
