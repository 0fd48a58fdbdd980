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

// Ethernet -> IPv4/IPv6 -> TCP/UDP/ICMP header parsing, flow key
// construction, and construction of minimal frames for synthetic traces.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mudguard/flow.hpp"

namespace mudguard {

enum class L4Protocol : std::uint8_t { tcp, udp, icmp, other };

const char* to_string(L4Protocol p) noexcept;

namespace tcp_flags {
inline constexpr std::uint8_t fin = 0x01;
inline constexpr std::uint8_t syn = 0x02;
inline constexpr std::uint8_t rst = 0x04;
inline constexpr std::uint8_t psh = 0x08;
inline constexpr std::uint8_t ack = 0x10;
}  // namespace tcp_flags

struct ParsedPacket {
  IpAddress src;
  IpAddress dst;
  L4Protocol protocol = L4Protocol::other;
  std::uint8_t ip_protocol = 0;  // raw protocol / next-header number
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint8_t tcp_flags = 0;
  std::uint32_t length = 0;  // bytes on the wire
  Nanoseconds timestamp{0};
};

// Returns nullopt for truncated frames, unknown ethertypes, and bad IP
// headers. wire_length overrides the frame size for length accounting
// (captures may be truncated); 0 means use frame.size().
std::optional<ParsedPacket> parse_headers(std::span<const std::uint8_t> frame,
                                          Nanoseconds timestamp,
                                          std::uint32_t wire_length = 0);

// Key for an allowlist lookup. Returns nullopt for protocols the allowlist
// cannot hold (anything other than tcp/udp/icmp).
std::optional<FlowKey> build_key(const ParsedPacket& pkt, Direction direction);

// Header fields for a synthesized frame. Addresses must share a family.
struct FrameSpec {
  IpAddress src;
  IpAddress dst;
  L4Protocol protocol = L4Protocol::tcp;
  std::uint16_t src_port = 0;
  std::uint16_t dst_port = 0;
  std::uint8_t tcp_flags = tcp_flags::ack;
  std::uint32_t length = 0;  // total frame length; raised to the header minimum
};

// Smallest frame FrameSpec can describe: Ethernet + IP + transport header.
std::size_t minimal_frame_size(AddressFamily family, L4Protocol protocol) noexcept;

// Ethernet with fixed dummy MACs, IP header with a valid checksum, and a
// transport header with a valid checksum. Payload bytes are zero.
std::vector<std::uint8_t> build_frame(const FrameSpec& spec);

// Rewrites IP source and/or destination in place and recomputes the IPv4
// header checksum and the TCP/UDP/ICMPv6 checksum. Replacement addresses must
// keep the family. Returns false if the frame cannot be parsed.
bool rewrite_addresses(std::vector<std::uint8_t>& frame,
                       const std::optional<IpAddress>& new_src,
                       const std::optional<IpAddress>& new_dst);

// Internet checksum (RFC 1071) over data, folded to 16 bits.
std::uint16_t internet_checksum(std::span<const std::uint8_t> data,
                                std::uint32_t initial = 0) noexcept;

}  // namespace mudguard
