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

#include <algorithm>
#include <charconv>
#include <limits>
#include <set>

#include "json.hpp"
#include "mudguard/error.hpp"

namespace mudguard {

using Json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kMudKey = "ietf-mud:mud";
constexpr std::string_view kAclsKey = "ietf-access-control-list:acls";
constexpr std::string_view kSrcDns = "ietf-acldns:src-dnsname";
constexpr std::string_view kDstDns = "ietf-acldns:dst-dnsname";
constexpr std::string_view kDirectionInitiated = "ietf-mud:direction-initiated";

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorKind::validation, what);
}

[[noreturn]] void bad_rate(std::string_view text, const std::string& why) {
  throw Error(ErrorKind::rate_grammar,
              "invalid rate '" + std::string(text) + "': " + why);
}

const Json& require(const Json& obj, std::string_view key,
                    const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    invalid(where + ": missing '" + std::string(key) + "'");
  }
  return *it;
}

const Json& require_object(const Json& obj, std::string_view key,
                           const std::string& where) {
  const Json& v = require(obj, key, where);
  if (!v.is_object()) {
    invalid(where + ": '" + std::string(key) + "' must be an object");
  }
  return v;
}

std::string get_string(const Json& v, const std::string& where) {
  if (!v.is_string()) invalid(where + " must be a string");
  return v.get<std::string>();
}

ExtraMembers collect_extra(const Json& obj,
                           std::initializer_list<std::string_view> known) {
  ExtraMembers extra;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      extra.emplace(it.key(), it.value().dump());
    }
  }
  return extra;
}

void emit_extra(Json& obj, const ExtraMembers& extra) {
  for (const auto& [key, text] : extra) obj[key] = Json::parse(text);
}

// "a.b.c.d", "a.b.c.d/32", or the v6 equivalents with /128. Only host
// prefixes can be expressed in an exact-match allowlist.
IpAddress parse_host_network(const std::string& text, AddressFamily family,
                             const std::string& where) {
  std::string addr = text;
  if (auto slash = text.find('/'); slash != std::string::npos) {
    addr = text.substr(0, slash);
    const std::string prefix = text.substr(slash + 1);
    const std::string full = family == AddressFamily::ipv4 ? "32" : "128";
    if (prefix != full) {
      invalid(where + ": only host prefixes (/" + full +
              ") are supported, got '" + text + "'");
    }
  }
  auto parsed = IpAddress::parse(addr);
  if (!parsed) invalid(where + ": invalid address '" + text + "'");
  if (parsed->family() != family) {
    invalid(where + ": address '" + text + "' does not match ACL family " +
            to_string(family));
  }
  return *parsed;
}

std::string host_network(const IpAddress& a) {
  return a.to_string() + (a.is_v4() ? "/32" : "/128");
}

std::optional<PortMatch> parse_port(const Json& l4, const std::string& where) {
  std::optional<PortMatch> result;
  for (auto [key, role] : {std::pair{"source-port", PortRole::source},
                           std::pair{"destination-port",
                                     PortRole::destination}}) {
    auto it = l4.find(key);
    if (it == l4.end()) continue;
    if (result) {
      invalid(where + ": matching on both source and destination port is "
                      "not supported");
    }
    const Json& p = *it;
    if (!p.is_object()) invalid(where + ": '" + key + "' must be an object");
    if (p.contains("lower-port") || p.contains("upper-port")) {
      invalid(where + ": port ranges are not supported");
    }
    if (auto op = p.find("operator"); op != p.end() && *op != "eq") {
      invalid(where + ": only the 'eq' port operator is supported");
    }
    const Json& port = require(p, "port", where + "." + key);
    if (!port.is_number_integer() || port.get<std::int64_t>() < 0 ||
        port.get<std::int64_t>() > 65535) {
      invalid(where + ": port must be an integer in 0..65535");
    }
    result = PortMatch{static_cast<std::uint16_t>(port.get<int>()), role};
  }
  return result;
}

MatchCriteria parse_matches(const Json& m, AddressFamily family,
                            const std::string& where) {
  if (!m.is_object()) invalid(where + " must be an object");
  MatchCriteria mc;
  const std::string l3_key = family == AddressFamily::ipv4 ? "ipv4" : "ipv6";
  const std::string other_l3 = family == AddressFamily::ipv4 ? "ipv6" : "ipv4";
  if (m.contains(other_l3)) {
    invalid(where + ": '" + other_l3 + "' match inside a " +
            to_string(family) + " ACL");
  }
  const std::string src_net = "source-" + l3_key + "-network";
  const std::string dst_net = "destination-" + l3_key + "-network";

  if (auto it = m.find(l3_key); it != m.end()) {
    const Json& l3 = *it;
    if (!l3.is_object()) invalid(where + "." + l3_key + " must be an object");
    if (auto p = l3.find("protocol"); p != l3.end()) {
      if (!p->is_number_integer()) invalid(where + ": protocol must be a number");
      switch (p->get<int>()) {
        case 6: mc.protocol = IpProtocol::tcp; break;
        case 17: mc.protocol = IpProtocol::udp; break;
        case 1:
        case 58: mc.protocol = IpProtocol::icmp; break;
        default:
          invalid(where + ": unsupported protocol " + p->dump());
      }
    }
    if (auto d = l3.find(kSrcDns); d != l3.end()) {
      mc.src_dns_name = get_string(*d, where + "." + std::string(kSrcDns));
    }
    if (auto d = l3.find(kDstDns); d != l3.end()) {
      mc.dst_dns_name = get_string(*d, where + "." + std::string(kDstDns));
    }
    if (auto n = l3.find(src_net); n != l3.end()) {
      mc.src_address =
          parse_host_network(get_string(*n, where + "." + src_net), family, where);
    }
    if (auto n = l3.find(dst_net); n != l3.end()) {
      mc.dst_address =
          parse_host_network(get_string(*n, where + "." + dst_net), family, where);
    }
    if (mc.src_dns_name && mc.src_address) {
      invalid(where + ": source has both a DNS name and a literal address");
    }
    if (mc.dst_dns_name && mc.dst_address) {
      invalid(where + ": destination has both a DNS name and a literal address");
    }
  }

  int l4_count = 0;
  for (auto [key, proto] : {std::pair{"tcp", IpProtocol::tcp},
                            std::pair{"udp", IpProtocol::udp},
                            std::pair{"icmp", IpProtocol::icmp}}) {
    auto it = m.find(key);
    if (it == m.end()) continue;
    ++l4_count;
    if (!it->is_object()) invalid(where + "." + key + " must be an object");
    if (mc.protocol && *mc.protocol != proto) {
      invalid(where + ": protocol number disagrees with '" + key + "' match");
    }
    mc.protocol = proto;
    if (proto != IpProtocol::icmp) {
      mc.port = parse_port(*it, where + "." + key);
    } else if (it->contains("source-port") || it->contains("destination-port")) {
      invalid(where + ": icmp matches cannot carry ports");
    }
    if (auto d = it->find(kDirectionInitiated); d != it->end()) {
      auto dir = parse_direction(get_string(*d, where + ".direction-initiated"));
      if (!dir) invalid(where + ": bad direction-initiated " + d->dump());
      mc.direction_initiated = dir;
    }
  }
  if (l4_count > 1) invalid(where + ": more than one transport match");

  mc.extra = collect_extra(m, {l3_key, "tcp", "udp", "icmp"});
  return mc;
}

ActionGroup parse_actions(const Json& a, const std::string& where) {
  if (!a.is_object()) invalid(where + " must be an object");
  ActionGroup g;
  const std::string fwd = get_string(require(a, "forwarding", where),
                                     where + ".forwarding");
  if (fwd == "accept") {
    g.forwarding = Forwarding::accept;
  } else if (fwd == "drop" || fwd == "reject") {
    g.forwarding = Forwarding::drop;
  } else {
    invalid(where + ": unknown forwarding '" + fwd + "'");
  }
  if (auto it = a.find("packet-rate"); it != a.end()) {
    if (!it->is_string()) {
      throw Error(ErrorKind::rate_grammar, where + ": packet-rate must be a string");
    }
    const auto text = it->get<std::string>();
    const auto amount = std::string_view(text).substr(0, text.find('/'));
    if (amount.ends_with("kb") || amount.ends_with("mb")) {
      bad_rate(text, "size suffixes apply only to byte-rate");
    }
    g.packet_rate = parse_rate(text);
  }
  if (auto it = a.find("byte-rate"); it != a.end()) {
    if (!it->is_string()) {
      throw Error(ErrorKind::rate_grammar, where + ": byte-rate must be a string");
    }
    g.byte_rate = parse_rate(it->get<std::string>());
  }
  g.extra = collect_extra(a, {"forwarding", "packet-rate", "byte-rate"});
  return g;
}

std::vector<std::string> parse_policy(const Json& mud, std::string_view key) {
  std::vector<std::string> names;
  auto it = mud.find(key);
  if (it == mud.end()) return names;
  const std::string where = std::string(key);
  if (!it->is_object()) invalid(where + " must be an object");
  auto lists = it->find("access-lists");
  if (lists == it->end()) return names;
  auto list = lists->find("access-list");
  if (list == lists->end()) return names;
  if (!list->is_array()) invalid(where + ".access-lists.access-list must be a list");
  for (const auto& entry : *list) {
    if (!entry.is_object()) invalid(where + ": access-list entries must be objects");
    names.push_back(get_string(require(entry, "name", where), where + ".name"));
  }
  return names;
}

Json policy_json(const std::vector<std::string>& names) {
  Json list = Json::array();
  for (const auto& n : names) list.push_back(Json{{"name", n}});
  return Json{{"access-lists", Json{{"access-list", list}}}};
}

Json matches_json(const MatchCriteria& mc, AddressFamily family) {
  Json m = Json::object();
  const std::string l3_key = family == AddressFamily::ipv4 ? "ipv4" : "ipv6";
  Json l3 = Json::object();
  if (mc.protocol) {
    int number = static_cast<int>(*mc.protocol);
    if (*mc.protocol == IpProtocol::icmp && family == AddressFamily::ipv6) {
      number = 58;
    }
    l3["protocol"] = number;
  }
  if (mc.src_dns_name) l3[std::string(kSrcDns)] = *mc.src_dns_name;
  if (mc.dst_dns_name) l3[std::string(kDstDns)] = *mc.dst_dns_name;
  if (mc.src_address) {
    l3["source-" + l3_key + "-network"] = host_network(*mc.src_address);
  }
  if (mc.dst_address) {
    l3["destination-" + l3_key + "-network"] = host_network(*mc.dst_address);
  }
  if (!l3.empty()) m[l3_key] = l3;

  if (mc.protocol) {
    Json l4 = Json::object();
    if (mc.port) {
      l4[mc.port->role == PortRole::source ? "source-port" : "destination-port"] =
          Json{{"operator", "eq"}, {"port", mc.port->port}};
    }
    if (mc.direction_initiated) {
      l4[std::string(kDirectionInitiated)] = to_string(*mc.direction_initiated);
    }
    // The protocol number is already in the L3 container.
    if (!l4.empty()) m[to_string(*mc.protocol)] = l4;
  }
  emit_extra(m, mc.extra);
  return m;
}

}  // namespace

const char* to_string(RatePeriod period) noexcept {
  switch (period) {
    case RatePeriod::second: return "second";
    case RatePeriod::minute: return "minute";
    case RatePeriod::hour: return "hour";
    case RatePeriod::day: return "day";
  }
  return "?";
}

std::uint64_t period_seconds(RatePeriod period) noexcept {
  switch (period) {
    case RatePeriod::second: return 1;
    case RatePeriod::minute: return 60;
    case RatePeriod::hour: return 3600;
    case RatePeriod::day: return 86400;
  }
  return 1;
}

const char* to_string(Forwarding f) noexcept {
  return f == Forwarding::accept ? "accept" : "drop";
}

const char* to_string(IpProtocol p) noexcept {
  switch (p) {
    case IpProtocol::tcp: return "tcp";
    case IpProtocol::udp: return "udp";
    case IpProtocol::icmp: return "icmp";
  }
  return "?";
}

const char* to_string(Direction d) noexcept {
  return d == Direction::from_device ? "from-device" : "to-device";
}

std::optional<Direction> parse_direction(std::string_view text) noexcept {
  if (text == "from-device") return Direction::from_device;
  if (text == "to-device") return Direction::to_device;
  return std::nullopt;
}

RateLimit parse_rate(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) bad_rate(text, "missing '/<period>'");
  std::string_view amount = text.substr(0, slash);
  const std::string_view period = text.substr(slash + 1);

  std::uint64_t multiplier = 1;
  if (amount.size() >= 2) {
    const auto suffix = amount.substr(amount.size() - 2);
    if (suffix == "kb") {
      multiplier = 1000;
      amount.remove_suffix(2);
    } else if (suffix == "mb") {
      multiplier = 1000000;
      amount.remove_suffix(2);
    }
  }
  if (amount.empty()) bad_rate(text, "missing count");
  if (!std::all_of(amount.begin(), amount.end(),
                   [](char c) { return c >= '0' && c <= '9'; })) {
    bad_rate(text, "count must be a non-negative integer with optional kb/mb");
  }
  std::uint64_t count = 0;
  auto [ptr, ec] =
      std::from_chars(amount.data(), amount.data() + amount.size(), count);
  if (ec != std::errc{} || ptr != amount.data() + amount.size()) {
    bad_rate(text, "count out of range");
  }
  if (count > std::numeric_limits<std::uint64_t>::max() / multiplier) {
    bad_rate(text, "count out of range");
  }

  RateLimit limit;
  limit.count = count * multiplier;
  if (period == "second") {
    limit.period = RatePeriod::second;
  } else if (period == "minute") {
    limit.period = RatePeriod::minute;
  } else if (period == "hour") {
    limit.period = RatePeriod::hour;
  } else if (period == "day") {
    limit.period = RatePeriod::day;
  } else {
    bad_rate(text, "unknown period '" + std::string(period) + "'");
  }
  return limit;
}

std::string render_rate(const RateLimit& limit, bool bytes) {
  std::string amount;
  if (bytes && limit.count != 0 && limit.count % 1000000 == 0) {
    amount = std::to_string(limit.count / 1000000) + "mb";
  } else if (bytes && limit.count != 0 && limit.count % 1000 == 0) {
    amount = std::to_string(limit.count / 1000) + "kb";
  } else {
    amount = std::to_string(limit.count);
  }
  return amount + "/" + to_string(limit.period);
}

const Acl* MudFile::find_acl(std::string_view name) const noexcept {
  for (const auto& acl : acls) {
    if (acl.name == name) return &acl;
  }
  return nullptr;
}

void validate(const MudFile& mud) {
  if (mud.mud_version < 1) invalid("mud-version must be >= 1");

  std::set<std::string> acl_names;
  for (const auto& acl : mud.acls) {
    if (!acl_names.insert(acl.name).second) {
      invalid("duplicate ACL name '" + acl.name + "'");
    }
    std::set<std::string> ace_names;
    for (const auto& ace : acl.aces) {
      const std::string where = "acl '" + acl.name + "' ace '" + ace.name + "'";
      if (!ace_names.insert(ace.name).second) {
        invalid("duplicate ACE name '" + ace.name + "' in acl '" + acl.name + "'");
      }
      const auto& m = ace.matches;
      for (const auto* a : {&m.src_address, &m.dst_address}) {
        if (*a && (*a)->family() != acl.address_family) {
          invalid(where + ": address family does not match the ACL");
        }
      }
      if (m.src_dns_name && m.src_address) {
        invalid(where + ": source has both a DNS name and a literal address");
      }
      if (m.dst_dns_name && m.dst_address) {
        invalid(where + ": destination has both a DNS name and a literal address");
      }
      if (m.port && (!m.protocol || *m.protocol == IpProtocol::icmp)) {
        invalid(where + ": port match requires tcp or udp");
      }
    }
  }
  for (const auto* policy : {&mud.from_device_policy, &mud.to_device_policy}) {
    for (const auto& name : *policy) {
      if (!acl_names.count(name)) {
        invalid("policy references unknown ACL '" + name + "'");
      }
    }
  }
}

MudFile parse_mud_file(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse, e.what(), e.byte);
  }
  if (!root.is_object()) invalid("MUD document must be a JSON object");

  MudFile mud;
  const Json& m = require_object(root, kMudKey, "document");
  const std::string where = std::string(kMudKey);

  const Json& version = require(m, "mud-version", where);
  if (!version.is_number_integer()) invalid(where + ".mud-version must be an integer");
  mud.mud_version = version.get<int>();
  mud.mud_url = get_string(require(m, "mud-url", where), where + ".mud-url");
  if (auto it = m.find("last-update"); it != m.end()) {
    mud.last_update = get_string(*it, where + ".last-update");
  }
  if (auto it = m.find("cache-validity"); it != m.end()) {
    if (!it->is_number_integer() || it->get<int>() < 1) {
      invalid(where + ".cache-validity must be a positive integer");
    }
    mud.cache_validity = it->get<int>();
  }
  if (auto it = m.find("is-supported"); it != m.end()) {
    if (!it->is_boolean()) invalid(where + ".is-supported must be a boolean");
    mud.is_supported = it->get<bool>();
  }
  if (auto it = m.find("systeminfo"); it != m.end()) {
    mud.system_info = get_string(*it, where + ".systeminfo");
  }
  mud.from_device_policy = parse_policy(m, "from-device-policy");
  mud.to_device_policy = parse_policy(m, "to-device-policy");
  mud.extra = collect_extra(m, {"mud-version", "mud-url", "last-update",
                                "cache-validity", "is-supported", "systeminfo",
                                "from-device-policy", "to-device-policy"});

  if (auto acls = root.find(kAclsKey); acls != root.end()) {
    if (!acls->is_object()) invalid(std::string(kAclsKey) + " must be an object");
    if (auto list = acls->find("acl"); list != acls->end()) {
      if (!list->is_array()) invalid("acls.acl must be a list");
      for (const auto& a : *list) {
        if (!a.is_object()) invalid("acl entries must be objects");
        Acl acl;
        acl.name = get_string(require(a, "name", "acl"), "acl.name");
        const std::string awhere = "acl '" + acl.name + "'";
        const std::string type = get_string(require(a, "type", awhere), awhere + ".type");
        if (type == "ipv4-acl-type") {
          acl.address_family = AddressFamily::ipv4;
        } else if (type == "ipv6-acl-type") {
          acl.address_family = AddressFamily::ipv6;
        } else {
          invalid(awhere + ": unsupported type '" + type + "'");
        }
        if (auto aces = a.find("aces"); aces != a.end()) {
          auto ace_list = aces->find("ace");
          if (ace_list != aces->end()) {
            if (!ace_list->is_array()) invalid(awhere + ".aces.ace must be a list");
            for (const auto& e : *ace_list) {
              if (!e.is_object()) invalid(awhere + ": ace entries must be objects");
              Ace ace;
              ace.name = get_string(require(e, "name", awhere), awhere + ".ace.name");
              const std::string ewhere = awhere + " ace '" + ace.name + "'";
              if (auto mm = e.find("matches"); mm != e.end()) {
                ace.matches = parse_matches(*mm, acl.address_family, ewhere + ".matches");
              }
              ace.actions = parse_actions(require(e, "actions", ewhere), ewhere + ".actions");
              ace.extra = collect_extra(e, {"name", "matches", "actions"});
              acl.aces.push_back(std::move(ace));
            }
          }
        }
        acl.extra = collect_extra(a, {"name", "type", "aces"});
        mud.acls.push_back(std::move(acl));
      }
    }
  }
  mud.root_extra = collect_extra(root, {kMudKey, kAclsKey});

  validate(mud);
  return mud;
}

std::string serialize_mud_file(const MudFile& mud, int indent) {
  Json m = Json::object();
  m["mud-version"] = mud.mud_version;
  m["mud-url"] = mud.mud_url;
  m["last-update"] = mud.last_update;
  if (mud.cache_validity) m["cache-validity"] = *mud.cache_validity;
  m["is-supported"] = mud.is_supported;
  if (mud.system_info) m["systeminfo"] = *mud.system_info;
  if (!mud.from_device_policy.empty()) {
    m["from-device-policy"] = policy_json(mud.from_device_policy);
  }
  if (!mud.to_device_policy.empty()) {
    m["to-device-policy"] = policy_json(mud.to_device_policy);
  }
  emit_extra(m, mud.extra);

  Json acl_list = Json::array();
  for (const auto& acl : mud.acls) {
    Json ace_list = Json::array();
    for (const auto& ace : acl.aces) {
      Json actions = Json::object();
      if (ace.actions.packet_rate) {
        actions["packet-rate"] = render_rate(*ace.actions.packet_rate, false);
      }
      if (ace.actions.byte_rate) {
        actions["byte-rate"] = render_rate(*ace.actions.byte_rate, true);
      }
      actions["forwarding"] = to_string(ace.actions.forwarding);
      emit_extra(actions, ace.actions.extra);

      Json e = Json::object();
      e["name"] = ace.name;
      e["matches"] = matches_json(ace.matches, acl.address_family);
      e["actions"] = actions;
      emit_extra(e, ace.extra);
      ace_list.push_back(e);
    }
    Json a = Json::object();
    a["name"] = acl.name;
    a["type"] = acl.address_family == AddressFamily::ipv4 ? "ipv4-acl-type"
                                                          : "ipv6-acl-type";
    a["aces"] = Json{{"ace", ace_list}};
    emit_extra(a, acl.extra);
    acl_list.push_back(a);
  }

  Json root = Json::object();
  root[std::string(kMudKey)] = m;
  root[std::string(kAclsKey)] = Json{{"acl", acl_list}};
  emit_extra(root, mud.root_extra);
  return root.dump(indent);
}

}  // namespace mudguard
