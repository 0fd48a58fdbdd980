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

// In-memory model of a MUD document (RFC 8520 layout) extended with
// per-ACE packet and byte rate limits inside the "actions" object.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mudguard/ip_address.hpp"

namespace mudguard {

enum class RatePeriod : std::uint8_t { second, minute, hour, day };

const char* to_string(RatePeriod period) noexcept;
std::uint64_t period_seconds(RatePeriod period) noexcept;

// count is packets, or bytes after kb/mb expansion. count == 0 means no limit.
struct RateLimit {
  std::uint64_t count = 0;
  RatePeriod period = RatePeriod::second;

  bool unlimited() const noexcept { return count == 0; }
  friend bool operator==(const RateLimit&, const RateLimit&) = default;
};

// Grammar: <count>[kb|mb]/<period>. kb and mb are decimal multipliers.
RateLimit parse_rate(std::string_view text);

// Renders a limit so that parse_rate() returns an equal value. Byte rates
// use the kb/mb suffix when the count divides evenly.
std::string render_rate(const RateLimit& limit, bool bytes);

enum class Forwarding : std::uint8_t { accept, drop };

const char* to_string(Forwarding f) noexcept;

enum class IpProtocol : std::uint8_t { tcp = 6, udp = 17, icmp = 1 };

const char* to_string(IpProtocol p) noexcept;

enum class Direction : std::uint8_t { from_device, to_device };

const char* to_string(Direction d) noexcept;
std::optional<Direction> parse_direction(std::string_view text) noexcept;

enum class PortRole : std::uint8_t { source, destination };

struct PortMatch {
  std::uint16_t port = 0;
  PortRole role = PortRole::destination;
  friend bool operator==(const PortMatch&, const PortMatch&) = default;
};

// Unknown JSON members kept verbatim (serialized JSON text per key) so that
// vendor extensions survive a parse/serialize round trip.
using ExtraMembers = std::map<std::string, std::string>;

struct MatchCriteria {
  std::optional<std::string> src_dns_name;
  std::optional<std::string> dst_dns_name;
  std::optional<IpAddress> src_address;
  std::optional<IpAddress> dst_address;
  std::optional<IpProtocol> protocol;
  std::optional<PortMatch> port;
  std::optional<Direction> direction_initiated;
  ExtraMembers extra;
  friend bool operator==(const MatchCriteria&, const MatchCriteria&) = default;
};

struct ActionGroup {
  Forwarding forwarding = Forwarding::drop;
  std::optional<RateLimit> packet_rate;
  std::optional<RateLimit> byte_rate;
  ExtraMembers extra;
  friend bool operator==(const ActionGroup&, const ActionGroup&) = default;
};

struct Ace {
  std::string name;
  MatchCriteria matches;
  ActionGroup actions;
  ExtraMembers extra;
  friend bool operator==(const Ace&, const Ace&) = default;
};

struct Acl {
  std::string name;
  AddressFamily address_family = AddressFamily::ipv4;
  std::vector<Ace> aces;
  ExtraMembers extra;
  friend bool operator==(const Acl&, const Acl&) = default;
};

struct MudFile {
  int mud_version = 1;
  std::string mud_url;
  std::string last_update;
  std::optional<int> cache_validity;  // hours
  bool is_supported = true;
  std::optional<std::string> system_info;
  std::vector<std::string> from_device_policy;
  std::vector<std::string> to_device_policy;
  std::vector<Acl> acls;
  ExtraMembers extra;      // unknown members of the "ietf-mud:mud" container
  ExtraMembers root_extra; // unknown top-level members

  const Acl* find_acl(std::string_view name) const noexcept;
  friend bool operator==(const MudFile&, const MudFile&) = default;
};

// Throws Error(parse) with a byte offset on malformed JSON, Error(validation)
// for model violations such as dangling ACL references, and
// Error(rate_grammar) for bad rate strings. "reject" forwarding is read as
// drop.
MudFile parse_mud_file(std::string_view text);

std::string serialize_mud_file(const MudFile& mud, int indent = 2);

// Checks the cross-reference and per-ACL invariants; throws Error(validation).
void validate(const MudFile& mud);

}  // namespace mudguard
