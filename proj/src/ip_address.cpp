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

#include "mudguard/ip_address.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <cstring>

#include "mudguard/error.hpp"

namespace mudguard {

const char* to_string(AddressFamily family) noexcept {
  return family == AddressFamily::ipv4 ? "ipv4" : "ipv6";
}

IpAddress IpAddress::v4(std::array<std::uint8_t, 4> bytes) noexcept {
  IpAddress a;
  a.family_ = AddressFamily::ipv4;
  std::copy(bytes.begin(), bytes.end(), a.bytes_.begin());
  return a;
}

IpAddress IpAddress::v6(const std::array<std::uint8_t, 16>& bytes) noexcept {
  IpAddress a;
  a.family_ = AddressFamily::ipv6;
  a.bytes_ = bytes;
  return a;
}

IpAddress IpAddress::from_bytes(AddressFamily family,
                                std::span<const std::uint8_t> bytes) {
  const std::size_t want = family == AddressFamily::ipv4 ? 4 : 16;
  if (bytes.size() != want) {
    throw Error(ErrorKind::invalid_argument, "address byte length mismatch");
  }
  IpAddress a;
  a.family_ = family;
  std::copy(bytes.begin(), bytes.end(), a.bytes_.begin());
  return a;
}

std::optional<IpAddress> IpAddress::parse(std::string_view text) {
  if (text.empty() || text.size() >= INET6_ADDRSTRLEN) return std::nullopt;
  char buf[INET6_ADDRSTRLEN];
  std::memcpy(buf, text.data(), text.size());
  buf[text.size()] = '\0';

  IpAddress a;
  if (text.find(':') == std::string_view::npos) {
    if (inet_pton(AF_INET, buf, a.bytes_.data()) != 1) return std::nullopt;
    a.family_ = AddressFamily::ipv4;
  } else {
    if (inet_pton(AF_INET6, buf, a.bytes_.data()) != 1) return std::nullopt;
    a.family_ = AddressFamily::ipv6;
  }
  return a;
}

std::string IpAddress::to_string() const {
  char buf[INET6_ADDRSTRLEN] = {};
  inet_ntop(is_v4() ? AF_INET : AF_INET6, bytes_.data(), buf, sizeof buf);
  return buf;
}

IpAddress parse_address_or_throw(std::string_view text) {
  auto a = IpAddress::parse(text);
  if (!a) {
    throw Error(ErrorKind::invalid_argument,
                "invalid IP address '" + std::string(text) + "'");
  }
  return *a;
}

}  // namespace mudguard

std::size_t std::hash<mudguard::IpAddress>::operator()(
    const mudguard::IpAddress& a) const noexcept {
  // FNV-1a over family + bytes.
  std::size_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint8_t b) {
    h ^= b;
    h *= 1099511628211ull;
  };
  mix(static_cast<std::uint8_t>(a.family()));
  for (auto b : a.bytes()) mix(b);
  return h;
}
