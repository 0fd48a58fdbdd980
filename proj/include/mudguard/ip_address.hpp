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

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace mudguard {

enum class AddressFamily : std::uint8_t { ipv4 = 4, ipv6 = 6 };

const char* to_string(AddressFamily family) noexcept;

// An IPv4 or IPv6 host address stored in network byte order. IPv4 addresses
// occupy the first four bytes; the rest stay zero so that comparison and
// hashing work on the whole array.
class IpAddress {
 public:
  IpAddress() = default;

  static IpAddress v4(std::array<std::uint8_t, 4> bytes) noexcept;
  static IpAddress v6(const std::array<std::uint8_t, 16>& bytes) noexcept;
  static IpAddress from_bytes(AddressFamily family,
                              std::span<const std::uint8_t> bytes);

  // Accepts dotted quad or RFC 4291 text. Returns nullopt on bad input.
  static std::optional<IpAddress> parse(std::string_view text);

  AddressFamily family() const noexcept { return family_; }
  bool is_v4() const noexcept { return family_ == AddressFamily::ipv4; }
  std::size_t size() const noexcept { return is_v4() ? 4 : 16; }
  std::span<const std::uint8_t> bytes() const noexcept {
    return {bytes_.data(), size()};
  }

  std::string to_string() const;

  friend auto operator<=>(const IpAddress&, const IpAddress&) = default;
  friend bool operator==(const IpAddress&, const IpAddress&) = default;

 private:
  AddressFamily family_ = AddressFamily::ipv4;
  std::array<std::uint8_t, 16> bytes_{};
};

// Parses an address that must be valid; throws Error(invalid_argument).
IpAddress parse_address_or_throw(std::string_view text);

}  // namespace mudguard

template <>
struct std::hash<mudguard::IpAddress> {
  std::size_t operator()(const mudguard::IpAddress& a) const noexcept;
};
