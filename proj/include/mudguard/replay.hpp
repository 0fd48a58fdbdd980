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

// Replays a trace through a fresh datapath in virtual time (trace
// timestamps, no sleeping) and reports pass/drop accounting overall and per
// report window.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mudguard/datapath.hpp"
#include "mudguard/trace.hpp"

namespace mudguard {

struct AddressRemap {
  enum class Fallback : std::uint8_t { keep, drop_record };

  std::map<IpAddress, IpAddress> mapping;
  // What to do with a frame neither of whose addresses is mapped.
  Fallback fallback = Fallback::keep;

  // Throws Error(validation) if two sources map to one target within a
  // family, or a mapping changes family.
  void validate() const;
  AddressRemap inverse() const;
};

// {"map": {"old": "new", ...}, "default": "keep" | "drop-record"}
AddressRemap parse_remap(std::string_view json_text);

// Substitutes mapped addresses in the frame bytes and recomputes checksums.
// Unparseable frames pass through untouched.
std::vector<TraceFrame> rewrite(std::vector<TraceFrame> stream, const AddressRemap& remap);

struct WindowSample {
  Nanoseconds window_start{0};
  std::uint64_t passed_pkts = 0;
  std::uint64_t dropped_pkts = 0;
  std::uint64_t passed_bytes = 0;
  std::uint64_t dropped_bytes = 0;
  friend bool operator==(const WindowSample&, const WindowSample&) = default;
};

struct ReplayReport {
  std::string mode;
  std::uint64_t total_packets = 0;
  std::uint64_t total_bytes = 0;
  std::uint64_t passed_packets = 0;
  std::uint64_t passed_bytes = 0;
  std::uint64_t dropped_packets = 0;
  std::uint64_t dropped_bytes = 0;
  std::uint64_t aborted_packets = 0;
  std::uint64_t aborted_bytes = 0;
  // Verdict reason -> count, for drops and aborts.
  std::map<std::string, std::uint64_t> drop_reason_histogram;
  // Contiguous windows from the first frame's timestamp.
  std::vector<WindowSample> per_window_series;

  double packet_drop_rate() const noexcept {
    return total_packets == 0 ? 0 : double(dropped_packets) / double(total_packets);
  }
  double byte_drop_rate() const noexcept {
    return total_bytes == 0 ? 0 : double(dropped_bytes) / double(total_bytes);
  }
  friend bool operator==(const ReplayReport&, const ReplayReport&) = default;
};

struct ReplayOptions {
  LimiterMode mode = LimiterMode::window;
  Direction direction = Direction::from_device;
  Nanoseconds report_window = kDefaultWindow;
  DatapathConfig datapath;
  // Shard frames by device address and replay shards on separate threads.
  bool parallel = false;
};

ReplayReport replay(std::span<const TraceFrame> stream, std::span<const FlowRule> rules,
                    const ReplayOptions& options);

enum class ReportFormat : std::uint8_t { csv, json };

std::string report_to_csv(const ReplayReport& report);
std::string report_to_json(const ReplayReport& report, int indent = 2);
ReplayReport report_from_json(std::string_view json_text);

// Throws Error(io) if the path is not writable.
void emit_report(const ReplayReport& report, const std::string& path, ReportFormat format);

}  // namespace mudguard
