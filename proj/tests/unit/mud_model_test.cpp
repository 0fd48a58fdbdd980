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

#include "mudguard/mud_model.hpp"

#include <gtest/gtest.h>

#include <random>
#include <string>

#include "mudguard/error.hpp"
#include "mudguard/trace.hpp"
#include "test_util.hpp"

namespace mudguard {
namespace {

using testing::fixture;

// Wraps one ACE body into a minimal valid document.
std::string doc_with_actions(const std::string& actions) {
  return R"({
  "ietf-mud:mud": {
    "mud-version": 1,
    "mud-url": "https://mud.example.com/x.json",
    "last-update": "2026-01-01T00:00:00+00:00",
    "is-supported": true,
    "from-device-policy": {"access-lists": {"access-list": [{"name": "a"}]}}
  },
  "ietf-access-control-list:acls": {"acl": [
    {"name": "a", "type": "ipv4-acl-type", "aces": {"ace": [
      {"name": "e", "matches": {"ipv4": {"protocol": 6, "ietf-acldns:dst-dnsname": "h.example"}},
       "actions": )" + actions + R"(}]}}]}
})";
}

const char* kTwoAclFourAce = R"({
  "ietf-mud:mud": {
    "mud-version": 1,
    "mud-url": "https://mud.example.com/cam.json",
    "last-update": "2026-03-01T12:00:00+00:00",
    "cache-validity": 24,
    "is-supported": true,
    "systeminfo": "Camera",
    "from-device-policy": {"access-lists": {"access-list": [{"name": "from-cam"}]}},
    "to-device-policy": {"access-lists": {"access-list": [{"name": "to-cam"}]}},
    "x-vendor": {"keep": [1, 2]}
  },
  "ietf-access-control-list:acls": {"acl": [
    {"name": "from-cam", "type": "ipv4-acl-type", "aces": {"ace": [
      {"name": "f0", "matches": {"ipv4": {"protocol": 6, "ietf-acldns:dst-dnsname": "cloud.example"},
                                 "tcp": {"destination-port": {"operator": "eq", "port": 443},
                                         "ietf-mud:direction-initiated": "from-device"}},
       "actions": {"packet-rate": "50/second", "byte-rate": "50kb/minute", "forwarding": "accept"}},
      {"name": "f1", "matches": {"ipv4": {"protocol": 17, "destination-ipv4-network": "198.51.100.5/32"},
                                 "udp": {"destination-port": {"operator": "eq", "port": 123}}},
       "actions": {"forwarding": "accept"}}]}},
    {"name": "to-cam", "type": "ipv4-acl-type", "aces": {"ace": [
      {"name": "t0", "matches": {"ipv4": {"protocol": 6, "ietf-acldns:src-dnsname": "cloud.example"},
                                 "tcp": {"source-port": {"operator": "eq", "port": 443}}},
       "actions": {"packet-rate": "0/second", "forwarding": "accept"}},
      {"name": "t1", "matches": {"ipv4": {"protocol": 1}},
       "actions": {"forwarding": "reject"}}]}}]}
})";

TEST(ParseRate, ActionsListingValues) {
  EXPECT_EQ(parse_rate("50/second"), (RateLimit{50, RatePeriod::second}));
  EXPECT_EQ(parse_rate("50kb/minute"), (RateLimit{50000, RatePeriod::minute}));
  EXPECT_EQ(parse_rate("2mb/hour"), (RateLimit{2000000, RatePeriod::hour}));
  EXPECT_EQ(parse_rate("7/day"), (RateLimit{7, RatePeriod::day}));
}

TEST(ParseRate, ZeroIsTheNoLimitSentinel) {
  const RateLimit r = parse_rate("0/minute");
  EXPECT_EQ(r, (RateLimit{0, RatePeriod::minute}));
  EXPECT_TRUE(r.unlimited());
}

TEST(ParseRate, RejectsBadGrammar) {
  for (const char* bad : {"", "/second", "fifty/second", "50", "50/week", "50gb/second",
                          "-5/second", "50 /second", "50/Second", "5.5/second",
                          "99999999999999999999999/second"}) {
    try {
      parse_rate(bad);
      ADD_FAILURE() << "accepted '" << bad << "'";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::rate_grammar) << bad;
    }
  }
}

TEST(ParseRate, RenderRoundTripsOverRandomValues) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::uint64_t> count(0, 5'000'000'000ULL);
  std::uniform_int_distribution<int> period(0, 3);
  for (int i = 0; i < 5000; ++i) {
    RateLimit r{count(rng), static_cast<RatePeriod>(period(rng))};
    if (i % 3 == 0) r.count = (r.count % 1000) * 1000;  // exercise the kb/mb forms
    for (bool bytes : {false, true}) {
      EXPECT_EQ(parse_rate(render_rate(r, bytes)), r) << render_rate(r, bytes);
    }
  }
}

TEST(ParseRate, ByteRendersUseDecimalSuffixes) {
  EXPECT_EQ(render_rate({50000, RatePeriod::minute}, true), "50kb/minute");
  EXPECT_EQ(render_rate({3000000, RatePeriod::second}, true), "3mb/second");
  EXPECT_EQ(render_rate({1234, RatePeriod::second}, true), "1234/second");
  EXPECT_EQ(render_rate({50000, RatePeriod::minute}, false), "50000/minute");
}

TEST(ParseMud, ActionsListingFragment) {
  const MudFile m = parse_mud_file(doc_with_actions(
      R"({"packet-rate": "50/second", "byte-rate": "50kb/minute", "forwarding": "accept"})"));
  const ActionGroup& a = m.acls.at(0).aces.at(0).actions;
  EXPECT_EQ(a.forwarding, Forwarding::accept);
  EXPECT_EQ(a.packet_rate, (RateLimit{50, RatePeriod::second}));
  EXPECT_EQ(a.byte_rate, (RateLimit{50000, RatePeriod::minute}));
}

TEST(ParseMud, DropWithoutRates) {
  const MudFile m = parse_mud_file(doc_with_actions(R"({"forwarding": "drop"})"));
  const ActionGroup& a = m.acls.at(0).aces.at(0).actions;
  EXPECT_EQ(a.forwarding, Forwarding::drop);
  EXPECT_FALSE(a.packet_rate.has_value());
  EXPECT_FALSE(a.byte_rate.has_value());
}

TEST(ParseMud, RejectIsReadAsDrop) {
  const MudFile m = parse_mud_file(doc_with_actions(R"({"forwarding": "reject"})"));
  EXPECT_EQ(m.acls.at(0).aces.at(0).actions.forwarding, Forwarding::drop);
}

TEST(ParseMud, AbsentRateDiffersFromZeroRate) {
  const MudFile absent = parse_mud_file(doc_with_actions(R"({"forwarding": "accept"})"));
  const MudFile zero =
      parse_mud_file(doc_with_actions(R"({"packet-rate": "0/second", "forwarding": "accept"})"));
  EXPECT_NE(absent.acls[0].aces[0].actions, zero.acls[0].aces[0].actions);
  EXPECT_FALSE(absent.acls[0].aces[0].actions.packet_rate.has_value());
  EXPECT_TRUE(zero.acls[0].aces[0].actions.packet_rate->unlimited());
}

TEST(ParseMud, BadRateIsARateGrammarError) {
  try {
    parse_mud_file(doc_with_actions(R"({"packet-rate": "50/fortnight", "forwarding": "accept"})"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::rate_grammar);
  }
}

TEST(ParseMud, MalformedJsonReportsByteOffset) {
  const std::string text = R"({"ietf-mud:mud": {"mud-version": 1,, }})";
  try {
    parse_mud_file(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse);
    ASSERT_TRUE(e.byte_offset().has_value());
    EXPECT_EQ(*e.byte_offset(), text.find(",,") + 2);
  }
}

TEST(ParseMud, DanglingPolicyReferenceNamesTheAcl) {
  std::string text = kTwoAclFourAce;
  text.replace(text.find(R"("name": "to-cam"}]}})"), 16, R"("name": "ghost" )");
  try {
    parse_mud_file(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::validation);
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
}

TEST(ParseMud, ModelViolationsAreValidationErrors) {
  const std::string base = kTwoAclFourAce;
  auto expect_invalid = [](std::string text, const char* why) {
    try {
      parse_mud_file(text);
      ADD_FAILURE() << why;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::validation) << why << ": " << e.what();
    }
  };
  {
    std::string t = base;
    t.replace(t.find(R"("mud-version": 1)"), 16, R"("mud-version": 0)");
    expect_invalid(t, "mud-version 0");
  }
  {
    std::string t = base;
    t.replace(t.find(R"("name": "f1")"), 12, R"("name": "f0")");
    expect_invalid(t, "duplicate ACE name");
  }
  {
    std::string t = base;
    t.replace(t.find(R"({"name": "to-cam", "type")"), 17, R"({"name": "from-cam")");
    expect_invalid(t, "duplicate ACL name");
  }
  {
    std::string t = base;
    t.replace(t.find(R"("198.51.100.5/32")"), 17, R"("2001:db8::5/128")");
    expect_invalid(t, "IPv6 address in an IPv4 ACL");
  }
}

TEST(ParseMud, FixtureFieldsAndExtensions) {
  const MudFile m = parse_mud_file(kTwoAclFourAce);
  EXPECT_EQ(m.mud_url, "https://mud.example.com/cam.json");
  EXPECT_EQ(m.cache_validity, 24);
  EXPECT_EQ(m.system_info, "Camera");
  ASSERT_EQ(m.acls.size(), 2u);
  const Ace& f0 = m.acls[0].aces[0];
  EXPECT_EQ(f0.matches.dst_dns_name, "cloud.example");
  EXPECT_EQ(f0.matches.protocol, IpProtocol::tcp);
  EXPECT_EQ(f0.matches.port, (PortMatch{443, PortRole::destination}));
  EXPECT_EQ(f0.matches.direction_initiated, Direction::from_device);
  const Ace& f1 = m.acls[0].aces[1];
  EXPECT_EQ(f1.matches.dst_address, testing::ip("198.51.100.5"));
  const Ace& t0 = m.acls[1].aces[0];
  EXPECT_EQ(t0.matches.port, (PortMatch{443, PortRole::source}));
  EXPECT_EQ(m.acls[1].aces[1].matches.protocol, IpProtocol::icmp);
  EXPECT_EQ(m.extra.count("x-vendor"), 1u);
}

TEST(Serialize, TwoAclFourAceRoundTripIsIdempotent) {
  const MudFile once = parse_mud_file(kTwoAclFourAce);
  const std::string text = serialize_mud_file(once);
  const MudFile twice = parse_mud_file(text);
  EXPECT_EQ(once, twice);
  EXPECT_EQ(serialize_mud_file(twice), text);
}

TEST(Serialize, ActionsFragmentKeepsItsThreeKeys) {
  const MudFile m = parse_mud_file(doc_with_actions(
      R"({"packet-rate": "50/second", "byte-rate": "50kb/minute", "forwarding": "accept"})"));
  const std::string out = serialize_mud_file(m);
  EXPECT_NE(out.find(R"("packet-rate": "50/second")"), std::string::npos);
  EXPECT_NE(out.find(R"("byte-rate": "50kb/minute")"), std::string::npos);
  EXPECT_NE(out.find(R"("forwarding": "accept")"), std::string::npos);
}

TEST(Serialize, EmptyAclList) {
  MudFile m;
  m.mud_url = "https://mud.example.com/empty.json";
  m.last_update = "2026-01-01T00:00:00+00:00";
  const std::string out = serialize_mud_file(m);
  EXPECT_NE(out.find(R"("acl": [])"), std::string::npos);
  EXPECT_EQ(parse_mud_file(out), m);
}

TEST(Serialize, EveryShippedFixtureRoundTrips) {
  for (const char* name : {"appliances-peaks.json", "appliances-averages.json",
                           "smarthubs-peaks.json", "smarthubs-averages.json",
                           "single-trusted-host.json", "broken-unresolvable.json"}) {
    const MudFile m = parse_mud_file(read_file(fixture(name)));
    EXPECT_EQ(parse_mud_file(serialize_mud_file(m)), m) << name;
  }
}

TEST(Serialize, ThresholdFixturesCarryTheirLimits) {
  struct Row {
    const char* file;
    RateLimit pkts, bytes;
  } rows[] = {
      {"appliances-peaks.json", {250, RatePeriod::minute}, {40000, RatePeriod::minute}},
      {"appliances-averages.json", {40, RatePeriod::minute}, {3000, RatePeriod::minute}},
      {"smarthubs-peaks.json", {1720, RatePeriod::minute}, {180000, RatePeriod::minute}},
      {"smarthubs-averages.json", {22, RatePeriod::minute}, {3000, RatePeriod::minute}},
  };
  for (const auto& r : rows) {
    const MudFile m = parse_mud_file(read_file(fixture(r.file)));
    const auto& a = m.acls.at(0).aces.at(0).actions;
    EXPECT_EQ(a.packet_rate, r.pkts) << r.file;
    EXPECT_EQ(a.byte_rate, r.bytes) << r.file;
  }
}

}  // namespace
}  // namespace mudguard
