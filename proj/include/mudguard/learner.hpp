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

// Windowed traffic profiling for deriving rate limits.
//
// Each device's first record opens its first window. A record inside
// [start, start + size) is counted there; otherwise the start advances by
// whole window sizes until the record fits. Only windows that received at
// least one record exist. Category "averages" are means over those active
// windows across all devices of the category; "peaks" are means over the
// devices of each device's busiest window.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mudguard/mud_model.hpp"
#include "mudguard/trace.hpp"

namespace mudguard {

struct WindowStats {
  Nanoseconds window_start{0};
  std::string device_id;
  std::uint64_t tcp_packets = 0;
  std::uint64_t tcp_bytes = 0;
  std::uint64_t udp_packets = 0;
  std::uint64_t udp_bytes = 0;
  std::uint64_t other_packets = 0;  // icmp and anything else
  std::uint64_t other_bytes = 0;

  std::uint64_t packets() const noexcept { return tcp_packets + udp_packets + other_packets; }
  friend bool operator==(const WindowStats&, const WindowStats&) = default;
};

// device_id -> windows in time order
using DeviceWindows = std::map<std::string, std::vector<WindowStats>>;

enum class DirectionFilter : std::uint8_t { all, outgoing, incoming };

// Throws Error(trace) if some device's records are not in time order and
// Error(invalid_argument) if window <= 0.
DeviceWindows windowize(std::span<const TraceRecord> trace, Nanoseconds window,
                        DirectionFilter filter = DirectionFilter::all);

struct CategoryStats {
  std::string category;
  std::size_t devices = 0;
  std::size_t active_windows = 0;
  Nanoseconds window = kDefaultWindow;
  double tcp_avg_pkts = 0, tcp_peak_pkts = 0;
  double udp_avg_pkts = 0, udp_peak_pkts = 0;
  double tcp_avg_bytes = 0, tcp_peak_bytes = 0;
  double udp_avg_bytes = 0, udp_peak_bytes = 0;
};

// Throws Error(learn) for a device missing from category_map.
std::map<std::string, CategoryStats> aggregate(
    const DeviceWindows& windows, const std::map<std::string, std::string>& category_map,
    Nanoseconds window = kDefaultWindow);

std::map<std::string, std::string> parse_category_map(std::string_view json_text);

enum class ThresholdPolicy : std::uint8_t { peaks, averages };

const char* to_string(ThresholdPolicy p) noexcept;
std::optional<ThresholdPolicy> parse_policy(std::string_view text) noexcept;

struct Granularity {
  std::uint64_t packet_round_to = 10;
  std::uint64_t byte_round_to = 1000;
};

enum class LimitProtocol : std::uint8_t { tcp, udp };

struct SuggestedLimits {
  ThresholdPolicy policy = ThresholdPolicy::peaks;
  RateLimit packet_limit;  // per minute
  RateLimit byte_limit;    // per minute, bytes
};

// ceil(statistic / granularity) * granularity, with the statistic rescaled
// from the analysis window to one minute. Throws Error(learn) when the
// selected statistic is zero.
SuggestedLimits suggest_limits(const CategoryStats& stats, ThresholdPolicy policy,
                               const Granularity& granularity,
                               LimitProtocol protocol = LimitProtocol::tcp);

// Rounds one statistic up to a multiple of `round_to`.
std::uint64_t round_up_to(double statistic, std::uint64_t round_to);

// Category table with packet rows then byte rows:
// category,TCP,TCP Max,UDP,UDP Max
std::string format_category_table(const std::map<std::string, CategoryStats>& stats);

}  // namespace mudguard
