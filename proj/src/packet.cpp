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

#include "mudguard/packet.hpp"

#include <algorithm>
#include <array>

#include "mudguard/error.hpp"

namespace mudguard {

namespace {

constexpr std::size_t kEthHeader = 14;
constexpr std::size_t kIpv4MinHeader = 20;
constexpr std::size_t kIpv6Header = 40;
constexpr std::size_t kTcpHeader = 20;
constexpr std::size_t kUdpHeader = 8;
constexpr std::size_t kIcmpHeader = 8;

constexpr std::uint16_t kEtherIpv4 = 0x0800;
constexpr std::uint16_t kEtherIpv6 = 0x86dd;
constexpr std::uint16_t kEtherVlan = 0x8100;
constexpr std::uint16_t kEtherQinQ = 0x88a8;

constexpr std::uint8_t kProtoIcmp = 1;
constexpr std::uint8_t kProtoTcp = 6;
constexpr std::uint8_t kProtoUdp = 17;
constexpr std::uint8_t kProtoIcmpv6 = 58;

std::uint16_t load16(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint16_t>((b[off] << 8) | b[off + 1]);
}

void store16(std::span<std::uint8_t> b, std::size_t off, std::uint16_t v) {
  b[off] = static_cast<std::uint8_t>(v >> 8);
  b[off + 1] = static_cast<std::uint8_t>(v);
}

void store32(std::span<std::uint8_t> b, std::size_t off, std::uint32_t v) {
  store16(b, off, static_cast<std::uint16_t>(v >> 16));
  store16(b, off + 2, static_cast<std::uint16_t>(v));
}

// Offsets of the layers inside a frame, as found by locate().
struct Layout {
  std::size_t l3 = 0;
  std::size_t l4 = 0;
  std::size_t l3_end = 0;  // end of the IP datagram, clamped to the frame
  AddressFamily family = AddressFamily::ipv4;
  std::uint8_t protocol = 0;
  bool has_l4 = false;  // false for non-first fragments
};

std::optional<Layout> locate(std::span<const std::uint8_t> f) {
  if (f.size() < kEthHeader) return std::nullopt;
  std::size_t off = 12;
  std::uint16_t ethertype = load16(f, off);
  off += 2;
  for (int tags = 0; ethertype == kEtherVlan || ethertype == kEtherQinQ; ++tags) {
    if (tags == 2 || f.size() < off + 4) return std::nullopt;
    ethertype = load16(f, off + 2);
    off += 4;
  }

  Layout l;
  l.l3 = off;
  if (ethertype == kEtherIpv4) {
    if (f.size() < off + kIpv4MinHeader) return std::nullopt;
    if ((f[off] >> 4) != 4) return std::nullopt;
    const std::size_t ihl = std::size_t(f[off] & 0x0f) * 4;
    if (ihl < kIpv4MinHeader || f.size() < off + ihl) return std::nullopt;
    const std::size_t total = load16(f, off + 2);
    if (total < ihl) return std::nullopt;
    l.family = AddressFamily::ipv4;
    l.protocol = f[off + 9];
    l.l4 = off + ihl;
    l.l3_end = std::min(f.size(), off + total);
    const std::uint16_t frag_offset = load16(f, off + 6) & 0x1fff;
    l.has_l4 = frag_offset == 0;
    return l;
  }
  if (ethertype == kEtherIpv6) {
    if (f.size() < off + kIpv6Header) return std::nullopt;
    if ((f[off] >> 4) != 6) return std::nullopt;
    l.family = AddressFamily::ipv6;
    l.l3_end = std::min(f.size(), off + kIpv6Header + load16(f, off + 4));
    std::uint8_t next = f[off + 6];
    std::size_t pos = off + kIpv6Header;
    l.has_l4 = true;
    // Walk extension headers.
    for (int guard = 0; guard < 8; ++guard) {
      if (next == 0 || next == 43 || next == 60) {
        if (f.size() < pos + 2) return std::nullopt;
        const std::uint8_t following = f[pos];
        pos += (std::size_t(f[pos + 1]) + 1) * 8;
        next = following;
      } else if (next == 44) {
        if (f.size() < pos + 8) return std::nullopt;
        const std::uint8_t following = f[pos];
        if ((load16(f, pos + 2) & 0xfff8) != 0) l.has_l4 = false;
        pos += 8;
        next = following;
      } else if (next == 51) {
        if (f.size() < pos + 2) return std::nullopt;
        const std::uint8_t following = f[pos];
        pos += (std::size_t(f[pos + 1]) + 2) * 4;
        next = following;
      } else {
        break;
      }
    }
    if (pos > f.size()) return std::nullopt;
    l.protocol = next;
    l.l4 = pos;
    return l;
  }
  return std::nullopt;
}

std::uint32_t sum_words(std::span<const std::uint8_t> data, std::uint32_t acc) {
  std::size_t i = 0;
  for (; i + 1 < data.size(); i += 2) acc += std::uint32_t(data[i] << 8 | data[i + 1]);
  if (i < data.size()) acc += std::uint32_t(data[i]) << 8;
  return acc;
}

std::uint16_t fold(std::uint32_t acc) {
  while (acc >> 16) acc = (acc & 0xffff) + (acc >> 16);
  return static_cast<std::uint16_t>(~acc & 0xffff);
}

std::uint32_t pseudo_header_sum(std::span<const std::uint8_t> f, const Layout& l,
                                std::size_t l4_length) {
  std::uint32_t acc = 0;
  if (l.family == AddressFamily::ipv4) {
    acc = sum_words(f.subspan(l.l3 + 12, 8), acc);
    acc += l.protocol;
    acc += static_cast<std::uint32_t>(l4_length);
  } else {
    acc = sum_words(f.subspan(l.l3 + 8, 32), acc);
    acc += static_cast<std::uint32_t>(l4_length >> 16);
    acc += static_cast<std::uint32_t>(l4_length & 0xffff);
    acc += l.protocol;
  }
  return acc;
}

// Recomputes the IPv4 header checksum and the transport checksum.
void fix_checksums(std::span<std::uint8_t> f, const Layout& l) {
  if (l.family == AddressFamily::ipv4) {
    const std::size_t ihl = l.l4 - l.l3;
    store16(f, l.l3 + 10, 0);
    store16(f, l.l3 + 10, internet_checksum(f.subspan(l.l3, ihl)));
  }
  if (!l.has_l4 || l.l4 >= l.l3_end) return;
  auto seg = f.subspan(l.l4, l.l3_end - l.l4);
  std::size_t csum_off = 0;
  bool pseudo = true;
  switch (l.protocol) {
    case kProtoTcp:
      if (seg.size() < kTcpHeader) return;
      csum_off = 16;
      break;
    case kProtoUdp:
      if (seg.size() < kUdpHeader) return;
      csum_off = 6;
      break;
    case kProtoIcmpv6:
      if (seg.size() < 4) return;
      csum_off = 2;
      break;
    case kProtoIcmp:
      if (seg.size() < 4) return;
      csum_off = 2;
      pseudo = false;
      break;
    default:
      return;
  }
  store16(seg, csum_off, 0);
  const std::uint32_t acc = pseudo ? pseudo_header_sum(f, l, seg.size()) : 0;
  std::uint16_t c = internet_checksum(seg, acc);
  if (c == 0 && l.protocol == kProtoUdp) c = 0xffff;
  store16(seg, csum_off, c);
}

}  // namespace

const char* to_string(L4Protocol p) noexcept {
  switch (p) {
    case L4Protocol::tcp: return "tcp";
    case L4Protocol::udp: return "udp";
    case L4Protocol::icmp: return "icmp";
    case L4Protocol::other: return "other";
  }
  return "?";
}

std::uint16_t internet_checksum(std::span<const std::uint8_t> data,
                                std::uint32_t initial) noexcept {
  return fold(sum_words(data, initial));
}

std::optional<ParsedPacket> parse_headers(std::span<const std::uint8_t> frame,
                                          Nanoseconds timestamp,
                                          std::uint32_t wire_length) {
  const auto layout = locate(frame);
  if (!layout) return std::nullopt;
  const Layout& l = *layout;

  ParsedPacket p;
  p.timestamp = timestamp;
  p.length = wire_length != 0 ? wire_length : static_cast<std::uint32_t>(frame.size());
  p.ip_protocol = l.protocol;
  if (l.family == AddressFamily::ipv4) {
    p.src = IpAddress::from_bytes(l.family, frame.subspan(l.l3 + 12, 4));
    p.dst = IpAddress::from_bytes(l.family, frame.subspan(l.l3 + 16, 4));
  } else {
    p.src = IpAddress::from_bytes(l.family, frame.subspan(l.l3 + 8, 16));
    p.dst = IpAddress::from_bytes(l.family, frame.subspan(l.l3 + 24, 16));
  }

  const std::size_t avail = frame.size() - std::min(frame.size(), l.l4);
  switch (l.protocol) {
    case kProtoTcp:
      p.protocol = L4Protocol::tcp;
      if (!l.has_l4) break;
      if (avail < kTcpHeader) return std::nullopt;
      p.src_port = load16(frame, l.l4);
      p.dst_port = load16(frame, l.l4 + 2);
      p.tcp_flags = frame[l.l4 + 13];
      break;
    case kProtoUdp:
      p.protocol = L4Protocol::udp;
      if (!l.has_l4) break;
      if (avail < kUdpHeader) return std::nullopt;
      p.src_port = load16(frame, l.l4);
      p.dst_port = load16(frame, l.l4 + 2);
      break;
    case kProtoIcmp:
    case kProtoIcmpv6:
      if ((l.protocol == kProtoIcmp) != (l.family == AddressFamily::ipv4)) {
        p.protocol = L4Protocol::other;
        break;
      }
      p.protocol = L4Protocol::icmp;
      if (l.has_l4 && avail < 4) return std::nullopt;
      break;
    default:
      p.protocol = L4Protocol::other;
      break;
  }
  return p;
}

std::optional<FlowKey> build_key(const ParsedPacket& pkt, Direction direction) {
  FlowKey k;
  k.src = pkt.src;
  k.dst = pkt.dst;
  k.direction = direction;
  switch (pkt.protocol) {
    case L4Protocol::tcp: k.protocol = IpProtocol::tcp; break;
    case L4Protocol::udp: k.protocol = IpProtocol::udp; break;
    case L4Protocol::icmp: k.protocol = IpProtocol::icmp; break;
    case L4Protocol::other: return std::nullopt;
  }
  if (k.protocol == IpProtocol::icmp) {
    k.port = 0;
  } else {
    k.port = direction == Direction::from_device ? pkt.dst_port : pkt.src_port;
  }
  return k;
}

std::size_t minimal_frame_size(AddressFamily family, L4Protocol protocol) noexcept {
  std::size_t n = kEthHeader + (family == AddressFamily::ipv4 ? kIpv4MinHeader : kIpv6Header);
  switch (protocol) {
    case L4Protocol::tcp: return n + kTcpHeader;
    case L4Protocol::udp: return n + kUdpHeader;
    case L4Protocol::icmp: return n + kIcmpHeader;
    case L4Protocol::other: return n;
  }
  return n;
}

std::vector<std::uint8_t> build_frame(const FrameSpec& spec) {
  if (spec.src.family() != spec.dst.family()) {
    throw Error(ErrorKind::invalid_argument, "frame addresses mix families");
  }
  const AddressFamily fam = spec.src.family();
  const std::size_t size =
      std::max<std::size_t>(spec.length, minimal_frame_size(fam, spec.protocol));
  const std::size_t l3_header = fam == AddressFamily::ipv4 ? kIpv4MinHeader : kIpv6Header;
  if (size - kEthHeader > 65535 + (fam == AddressFamily::ipv6 ? l3_header : 0)) {
    throw Error(ErrorKind::invalid_argument, "frame too large for an IP datagram");
  }

  std::vector<std::uint8_t> f(size, 0);
  std::span<std::uint8_t> b(f);
  static constexpr std::array<std::uint8_t, 12> kMacs = {
      0x02, 0x00, 0x00, 0x00, 0x00, 0x02,   // dst
      0x02, 0x00, 0x00, 0x00, 0x00, 0x01};  // src
  std::copy(kMacs.begin(), kMacs.end(), f.begin());

  std::uint8_t proto = 0;
  switch (spec.protocol) {
    case L4Protocol::tcp: proto = kProtoTcp; break;
    case L4Protocol::udp: proto = kProtoUdp; break;
    case L4Protocol::icmp: proto = fam == AddressFamily::ipv4 ? kProtoIcmp : kProtoIcmpv6; break;
    case L4Protocol::other: proto = 253; break;  // RFC 3692 experimental
  }

  const std::size_t l3 = kEthHeader;
  const std::size_t l4 = l3 + l3_header;
  if (fam == AddressFamily::ipv4) {
    store16(b, 12, kEtherIpv4);
    f[l3] = 0x45;
    store16(b, l3 + 2, static_cast<std::uint16_t>(size - l3));
    store16(b, l3 + 6, 0x4000);  // DF
    f[l3 + 8] = 64;
    f[l3 + 9] = proto;
    std::copy_n(spec.src.bytes().begin(), 4, f.begin() + l3 + 12);
    std::copy_n(spec.dst.bytes().begin(), 4, f.begin() + l3 + 16);
  } else {
    store16(b, 12, kEtherIpv6);
    store32(b, l3, 0x60000000u);
    store16(b, l3 + 4, static_cast<std::uint16_t>(size - l4));
    f[l3 + 6] = proto;
    f[l3 + 7] = 64;
    std::copy_n(spec.src.bytes().begin(), 16, f.begin() + l3 + 8);
    std::copy_n(spec.dst.bytes().begin(), 16, f.begin() + l3 + 24);
  }

  switch (spec.protocol) {
    case L4Protocol::tcp:
      store16(b, l4, spec.src_port);
      store16(b, l4 + 2, spec.dst_port);
      f[l4 + 12] = 5 << 4;
      f[l4 + 13] = spec.tcp_flags;
      store16(b, l4 + 14, 65535);
      break;
    case L4Protocol::udp:
      store16(b, l4, spec.src_port);
      store16(b, l4 + 2, spec.dst_port);
      store16(b, l4 + 4, static_cast<std::uint16_t>(size - l4));
      break;
    case L4Protocol::icmp:
      f[l4] = fam == AddressFamily::ipv4 ? 8 : 128;  // echo request
      break;
    case L4Protocol::other:
      break;
  }

  Layout l;
  l.l3 = l3;
  l.l4 = l4;
  l.l3_end = size;
  l.family = fam;
  l.protocol = proto;
  l.has_l4 = true;
  fix_checksums(b, l);
  return f;
}

bool rewrite_addresses(std::vector<std::uint8_t>& frame,
                       const std::optional<IpAddress>& new_src,
                       const std::optional<IpAddress>& new_dst) {
  const auto layout = locate(frame);
  if (!layout) return false;
  const Layout& l = *layout;
  for (const auto* a : {&new_src, &new_dst}) {
    if (*a && (*a)->family() != l.family) {
      throw Error(ErrorKind::invalid_argument,
                  "address rewrite cannot change the address family");
    }
  }
  const std::size_t len = l.family == AddressFamily::ipv4 ? 4 : 16;
  const std::size_t src_off = l.l3 + (l.family == AddressFamily::ipv4 ? 12 : 8);
  if (new_src) std::copy_n(new_src->bytes().begin(), len, frame.begin() + src_off);
  if (new_dst) std::copy_n(new_dst->bytes().begin(), len, frame.begin() + src_off + len);
  fix_checksums(frame, l);
  return true;
}

}  // namespace mudguard
