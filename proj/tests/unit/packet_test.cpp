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

#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "test_util.hpp"

namespace mudguard {
namespace {

using testing::ip;
using Bytes = std::vector<std::uint8_t>;

// Ethernet + IPv4 (20 bytes) + TCP (20 bytes), 10.0.0.2:49152 -> 93.184.216.34:443,
// SYN, written out field by field.
const Bytes kIpv4Tcp = {
    // Ethernet: dst, src, ethertype 0x0800
    0x02, 0x00, 0x00, 0x00, 0x00, 0x02, 0x02, 0x00, 0x00, 0x00, 0x00, 0x01, 0x08, 0x00,
    // IPv4: ver/ihl, tos, total length 40, id, flags/frag, ttl 64, proto 6, csum
    0x45, 0x00, 0x00, 0x28, 0x12, 0x34, 0x40, 0x00, 0x40, 0x06, 0x00, 0x00,
    10, 0, 0, 2,  // src
    93, 184, 216, 34,  // dst
    // TCP: sport 49152, dport 443, seq, ack, offset 5, flags SYN, window, csum, urg
    0xc0, 0x00, 0x01, 0xbb, 0, 0, 0, 1, 0, 0, 0, 0, 0x50, 0x02, 0xff, 0xff, 0, 0, 0, 0};

// Ethernet + IPv6 (40 bytes) + UDP (8 bytes) + 4 payload bytes,
// 2001:db8::1:5353 -> 2001:db8::2:53.
const Bytes kIpv6Udp = {
    0x02, 0x00, 0x00, 0x00, 0x00, 0x02, 0x02, 0x00, 0x00, 0x00, 0x00, 0x01, 0x86, 0xdd,
    // IPv6: version 6, payload length 12, next header 17, hop limit 64
    0x60, 0x00, 0x00, 0x00, 0x00, 0x0c, 0x11, 0x40,
    0x20, 0x01, 0x0d, 0xb8, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1,
    0x20, 0x01, 0x0d, 0xb8, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 2,
    // UDP: sport 5353, dport 53, length 12, csum
    0x14, 0xe9, 0x00, 0x35, 0x00, 0x0c, 0x00, 0x00, 0xde, 0xad, 0xbe, 0xef};

TEST(ParseHeaders, Ipv4TcpByteFixture) {
  const auto p = parse_headers(kIpv4Tcp, Nanoseconds(5));
  ASSERT_TRUE(p);
  EXPECT_EQ(p->protocol, L4Protocol::tcp);
  EXPECT_EQ(p->ip_protocol, 6);
  EXPECT_EQ(p->src, ip("10.0.0.2"));
  EXPECT_EQ(p->dst, ip("93.184.216.34"));
  EXPECT_EQ(p->src_port, 49152);
  EXPECT_EQ(p->dst_port, 443);
  EXPECT_EQ(p->tcp_flags, tcp_flags::syn);
  EXPECT_EQ(p->length, kIpv4Tcp.size());
  EXPECT_EQ(p->timestamp, Nanoseconds(5));
}

TEST(ParseHeaders, Ipv6UdpByteFixture) {
  const auto p = parse_headers(kIpv6Udp, Nanoseconds(0));
  ASSERT_TRUE(p);
  EXPECT_EQ(p->protocol, L4Protocol::udp);
  EXPECT_EQ(p->src, ip("2001:db8::1"));
  EXPECT_EQ(p->dst, ip("2001:db8::2"));
  EXPECT_EQ(p->src_port, 5353);
  EXPECT_EQ(p->dst_port, 53);
  EXPECT_EQ(p->length, 66u);
}

TEST(ParseHeaders, WireLengthOverridesCapturedLength) {
  const auto p = parse_headers(kIpv4Tcp, Nanoseconds(0), 1514);
  ASSERT_TRUE(p);
  EXPECT_EQ(p->length, 1514u);
}

TEST(ParseHeaders, VlanTagIsSkipped) {
  Bytes f(kIpv4Tcp.begin(), kIpv4Tcp.begin() + 12);
  for (std::uint8_t b : {0x81, 0x00, 0x00, 0x64}) f.push_back(b);  // VLAN 100
  f.insert(f.end(), kIpv4Tcp.begin() + 12, kIpv4Tcp.end());
  const auto p = parse_headers(f, Nanoseconds(0));
  ASSERT_TRUE(p);
  EXPECT_EQ(p->dst_port, 443);
  EXPECT_EQ(p->dst, ip("93.184.216.34"));
}

TEST(ParseHeaders, Ipv4OptionsMoveTheTransportHeader) {
  Bytes f(kIpv4Tcp.begin(), kIpv4Tcp.begin() + 34);
  f[14] = 0x46;  // IHL 6: one 4-byte option word
  f[17] = 44;
  for (int i = 0; i < 4; ++i) f.push_back(0x01);  // NOP options
  f.insert(f.end(), kIpv4Tcp.begin() + 34, kIpv4Tcp.end());
  const auto p = parse_headers(f, Nanoseconds(0));
  ASSERT_TRUE(p);
  EXPECT_EQ(p->src_port, 49152);
  EXPECT_EQ(p->dst_port, 443);
}

TEST(ParseHeaders, Ipv6HopByHopHeaderIsSkipped) {
  Bytes f(kIpv6Udp.begin(), kIpv6Udp.begin() + 54);
  f[20] = 0;     // next header: hop-by-hop
  f[19] = 20;    // payload length grows by 8
  const Bytes hbh = {17, 0, 1, 4, 0, 0, 0, 0};  // next UDP, len 0 (8 bytes), PadN
  f.insert(f.end(), hbh.begin(), hbh.end());
  f.insert(f.end(), kIpv6Udp.begin() + 54, kIpv6Udp.end());
  const auto p = parse_headers(f, Nanoseconds(0));
  ASSERT_TRUE(p);
  EXPECT_EQ(p->protocol, L4Protocol::udp);
  EXPECT_EQ(p->dst_port, 53);
}

TEST(ParseHeaders, TruncationIsMalformed) {
  EXPECT_FALSE(parse_headers(Bytes(kIpv4Tcp.begin(), kIpv4Tcp.begin() + 13), Nanoseconds(0)));
  EXPECT_FALSE(parse_headers(Bytes{}, Nanoseconds(0)));
  // Every strict prefix that cuts into a header is rejected.
  for (std::size_t n = 0; n < kIpv4Tcp.size(); ++n) {
    EXPECT_FALSE(parse_headers(Bytes(kIpv4Tcp.begin(), kIpv4Tcp.begin() + n), Nanoseconds(0)))
        << n;
  }
  for (std::size_t n = 0; n < 62; ++n) {
    EXPECT_FALSE(parse_headers(Bytes(kIpv6Udp.begin(), kIpv6Udp.begin() + n), Nanoseconds(0)))
        << n;
  }
}

TEST(ParseHeaders, UnknownEthertypeAndBadVersionAreMalformed) {
  Bytes arp = kIpv4Tcp;
  arp[12] = 0x08;
  arp[13] = 0x06;
  EXPECT_FALSE(parse_headers(arp, Nanoseconds(0)));
  Bytes bad = kIpv4Tcp;
  bad[14] = 0x65;
  EXPECT_FALSE(parse_headers(bad, Nanoseconds(0)));
}

TEST(ParseHeaders, NonFirstFragmentHasNoPorts) {
  Bytes f = kIpv4Tcp;
  f[20] = 0x00;
  f[21] = 0x10;  // fragment offset 16 * 8 bytes
  const auto p = parse_headers(f, Nanoseconds(0));
  ASSERT_TRUE(p);
  EXPECT_EQ(p->protocol, L4Protocol::tcp);
  EXPECT_EQ(p->src_port, 0);
  EXPECT_EQ(p->dst_port, 0);
}

TEST(ParseHeaders, RandomBytesNeverCrash) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> byte(0, 255), len(0, 120);
  for (int i = 0; i < 20000; ++i) {
    Bytes f(static_cast<std::size_t>(len(rng)));
    for (auto& b : f) b = static_cast<std::uint8_t>(byte(rng));
    if (f.size() > 13 && i % 2 == 0) {
      f[12] = 0x08;
      f[13] = 0x00;
    }
    (void)parse_headers(f, Nanoseconds(0));
  }
}

TEST(BuildKey, FromDeviceUsesDestinationPort) {
  ParsedPacket p;
  p.src = ip("10.0.0.2");
  p.dst = ip("192.0.2.9");
  p.protocol = L4Protocol::tcp;
  p.src_port = 50000;
  p.dst_port = 8883;
  EXPECT_EQ(build_key(p, Direction::from_device),
            (FlowKey{ip("10.0.0.2"), ip("192.0.2.9"), Direction::from_device, IpProtocol::tcp,
                     8883}));
}

TEST(BuildKey, ToDeviceUsesSourcePort) {
  ParsedPacket p;
  p.src = ip("192.0.2.9");
  p.dst = ip("10.0.0.2");
  p.protocol = L4Protocol::tcp;
  p.src_port = 8883;
  p.dst_port = 50000;
  EXPECT_EQ(build_key(p, Direction::to_device),
            (FlowKey{ip("192.0.2.9"), ip("10.0.0.2"), Direction::to_device, IpProtocol::tcp,
                     8883}));
}

TEST(BuildKey, IcmpUsesPortZeroAndOtherHasNoKey) {
  ParsedPacket p;
  p.src = ip("10.0.0.2");
  p.dst = ip("192.0.2.9");
  p.protocol = L4Protocol::icmp;
  EXPECT_EQ(build_key(p, Direction::from_device)->port, 0);
  EXPECT_EQ(build_key(p, Direction::from_device)->protocol, IpProtocol::icmp);
  p.protocol = L4Protocol::other;
  EXPECT_FALSE(build_key(p, Direction::from_device));
}

// Verifies an IPv4 header checksum by summing the header including the
// stored checksum; a correct header sums to 0xffff.
bool ipv4_checksum_ok(const Bytes& f, std::size_t l3) {
  std::uint32_t sum = 0;
  const std::size_t ihl = (f[l3] & 0x0f) * 4u;
  for (std::size_t i = 0; i < ihl; i += 2) sum += (f[l3 + i] << 8) | f[l3 + i + 1];
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return sum == 0xffff;
}

// Same check for the transport checksum over the IPv4 pseudo-header.
bool l4_checksum_ok_v4(const Bytes& f, std::size_t l3) {
  const std::size_t ihl = (f[l3] & 0x0f) * 4u;
  const std::size_t total = (f[l3 + 2] << 8) | f[l3 + 3];
  const std::size_t l4 = l3 + ihl, l4len = total - ihl;
  std::uint32_t sum = 0;
  for (std::size_t i = 12; i < 20; i += 2) sum += (f[l3 + i] << 8) | f[l3 + i + 1];
  sum += f[l3 + 9];
  sum += static_cast<std::uint32_t>(l4len);
  for (std::size_t i = 0; i < l4len; i += 2) {
    sum += (f[l4 + i] << 8) | (i + 1 < l4len ? f[l4 + i + 1] : 0);
  }
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return sum == 0xffff;
}

TEST(BuildFrame, SynthesizedFramesParseBackToTheirSpec) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> port(1, 65535), proto(0, 2), len(0, 1514);
  std::uniform_int_distribution<int> octet(1, 254);
  for (int i = 0; i < 2000; ++i) {
    FrameSpec s;
    const bool v6 = i % 3 == 0;
    if (v6) {
      std::array<std::uint8_t, 16> a{0x20, 0x01, 0x0d, 0xb8}, b{0x20, 0x01, 0x0d, 0xb8};
      a[15] = static_cast<std::uint8_t>(octet(rng));
      b[15] = static_cast<std::uint8_t>(octet(rng));
      s.src = IpAddress::v6(a);
      s.dst = IpAddress::v6(b);
    } else {
      s.src = IpAddress::v4({10, 0, 0, static_cast<std::uint8_t>(octet(rng))});
      s.dst = IpAddress::v4({192, 0, 2, static_cast<std::uint8_t>(octet(rng))});
    }
    s.protocol = static_cast<L4Protocol>(proto(rng));
    if (s.protocol != L4Protocol::icmp) {
      s.src_port = static_cast<std::uint16_t>(port(rng));
      s.dst_port = static_cast<std::uint16_t>(port(rng));
    }
    s.tcp_flags = tcp_flags::syn | tcp_flags::ack;
    s.length = static_cast<std::uint32_t>(len(rng));
    const Bytes f = build_frame(s);
    const std::size_t min = minimal_frame_size(s.src.family(), s.protocol);
    EXPECT_EQ(f.size(), std::max<std::size_t>(s.length, min));
    const auto p = parse_headers(f, Nanoseconds(0));
    ASSERT_TRUE(p);
    EXPECT_EQ(p->src, s.src);
    EXPECT_EQ(p->dst, s.dst);
    EXPECT_EQ(p->protocol, s.protocol);
    EXPECT_EQ(p->src_port, s.src_port);
    EXPECT_EQ(p->dst_port, s.dst_port);
    if (s.protocol == L4Protocol::tcp) {
      EXPECT_EQ(p->tcp_flags, s.tcp_flags);
    }
    if (!v6) {
      EXPECT_TRUE(ipv4_checksum_ok(f, 14));
      if (s.protocol != L4Protocol::icmp) {
        EXPECT_TRUE(l4_checksum_ok_v4(f, 14));
      }
    }
  }
}

TEST(RewriteAddresses, SubstitutesAndKeepsChecksumsValid) {
  FrameSpec s;
  s.src = ip("10.0.0.5");
  s.dst = ip("52.1.2.3");
  s.protocol = L4Protocol::udp;
  s.src_port = 1234;
  s.dst_port = 53;
  s.length = 90;
  Bytes f = build_frame(s);
  ASSERT_TRUE(rewrite_addresses(f, ip("192.168.1.20"), std::nullopt));
  const auto p = parse_headers(f, Nanoseconds(0));
  ASSERT_TRUE(p);
  EXPECT_EQ(p->src, ip("192.168.1.20"));
  EXPECT_EQ(p->dst, ip("52.1.2.3"));
  EXPECT_TRUE(ipv4_checksum_ok(f, 14));
  EXPECT_TRUE(l4_checksum_ok_v4(f, 14));
  EXPECT_THROW(rewrite_addresses(f, ip("2001:db8::1"), std::nullopt), std::exception);
  Bytes junk = {1, 2, 3};
  EXPECT_FALSE(rewrite_addresses(junk, ip("10.0.0.1"), std::nullopt));
}

TEST(InternetChecksum, KnownVector) {
  // RFC 1071 example words 0001 f203 f4f5 f6f7 sum to 0xddf2; checksum is ~.
  const Bytes data = {0x00, 0x01, 0xf2, 0x03, 0xf4, 0xf5, 0xf6, 0xf7};
  EXPECT_EQ(internet_checksum(data), static_cast<std::uint16_t>(~0xddf2 & 0xffff));
}

}  // namespace
}  // namespace mudguard
