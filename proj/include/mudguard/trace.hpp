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

// Trace records and frames: the CSV trace format, classic pcap reading and
// writing, and conversion between the two.
//
// CSV columns:
//   timestamp_ns,device_id,direction,protocol,length[,src,dst,src_port,dst_port[,tcp_flags]]
// direction is "outgoing" or "incoming"; protocol is tcp, udp or other
// (icmp is accepted too). The address columns are needed only to
// synthesize frames for replay.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mudguard/flow.hpp"
#include "mudguard/packet.hpp"

namespace mudguard {

enum class TraceDirection : std::uint8_t { outgoing, incoming };
enum class TraceProtocol : std::uint8_t { tcp, udp, icmp, other };

const char* to_string(TraceDirection d) noexcept;
const char* to_string(TraceProtocol p) noexcept;

struct TraceRecord {
  Nanoseconds timestamp{0};
  std::string device_id;
  TraceDirection direction = TraceDirection::outgoing;
  TraceProtocol protocol = TraceProtocol::tcp;
  std::uint32_t length = 0;
  std::optional<IpAddress> src;
  std::optional<IpAddress> dst;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint8_t tcp_flags = tcp_flags::ack;
  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

// Throws Error(parse) with the 1-based line number in the message.
std::vector<TraceRecord> parse_trace_csv(std::string_view text);
std::vector<TraceRecord> load_trace_csv(const std::string& path);
std::string format_trace_csv(const std::vector<TraceRecord>& records);

struct TraceFrame {
  std::vector<std::uint8_t> bytes;
  Nanoseconds timestamp{0};
  std::uint32_t wire_length = 0;  // original length; 0 means bytes.size()

  std::uint32_t length() const noexcept {
    return wire_length != 0 ? wire_length : static_cast<std::uint32_t>(bytes.size());
  }
};

enum class TraceFormat : std::uint8_t { pcap, csv };

// Guesses from the file extension; ".csv" is csv, anything else pcap.
TraceFormat guess_trace_format(const std::string& path) noexcept;

// Parses classic pcap (microsecond or nanosecond magic, either byte order,
// Ethernet link type). Throws Error(trace) on a corrupt header.
std::vector<TraceFrame> parse_pcap(std::string_view data);
std::string format_pcap(const std::vector<TraceFrame>& frames, bool nanosecond = true);

// Minimal valid frames carrying each record's 5-tuple and length. Throws
// Error(trace) for records without addresses.
std::vector<TraceFrame> synthesize_frames(const std::vector<TraceRecord>& records);

// Loads a trace as frames ordered by timestamp. An out-of-order input is
// stably sorted and `*was_sorted` (if given) is set to false.
std::vector<TraceFrame> load_trace(const std::string& path, TraceFormat format,
                                   bool* was_sorted = nullptr);

// Turns frames into records for the learner. A frame is outgoing when its
// source address belongs to a known device and incoming when its
// destination does; frames touching no known device are skipped.
std::vector<TraceRecord> records_from_frames(
    const std::vector<TraceFrame>& frames,
    const std::map<IpAddress, std::string>& devices);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view data);

}  // namespace mudguard
