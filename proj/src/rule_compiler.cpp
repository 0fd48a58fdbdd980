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

#include "mudguard/rule_compiler.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "mudguard/error.hpp"

namespace mudguard {

using Json = nlohmann::ordered_json;

DeviceContext parse_device_context(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text.begin(), json_text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse, e.what(), e.byte);
  }
  auto fail = [](const std::string& what) {
    throw Error(ErrorKind::validation, "device context: " + what);
  };
  if (!j.is_object()) fail("must be a JSON object");

  DeviceContext ctx;
  if (auto it = j.find("device_id"); it != j.end()) {
    if (!it->is_string()) fail("device_id must be a string");
    ctx.device_id = it->get<std::string>();
  }
  if (auto it = j.find("addresses"); it != j.end()) {
    if (!it->is_array()) fail("addresses must be a list");
    for (const auto& a : *it) {
      auto addr = a.is_string() ? IpAddress::parse(a.get<std::string>())
                                : std::nullopt;
      if (!addr) fail("bad device address " + a.dump());
      ctx.device_addresses.push_back(*addr);
    }
  }
  if (auto it = j.find("dns"); it != j.end()) {
    if (!it->is_object()) fail("dns must be an object");
    for (auto e = it->begin(); e != it->end(); ++e) {
      if (!e.value().is_array() || e.value().empty()) {
        fail("dns entry '" + e.key() + "' must be a non-empty list");
      }
      std::vector<IpAddress> addrs;
      for (const auto& a : e.value()) {
        auto addr = a.is_string() ? IpAddress::parse(a.get<std::string>())
                                  : std::nullopt;
        if (!addr) fail("bad address " + a.dump() + " for '" + e.key() + "'");
        if (!addrs.empty() && addrs.front().family() != addr->family()) {
          fail("dns entry '" + e.key() + "' mixes address families");
        }
        addrs.push_back(*addr);
      }
      ctx.dns_map.emplace(e.key(), std::move(addrs));
    }
  }
  return ctx;
}

DeviceContext load_device_context(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open device context '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_device_context(ss.str());
}

std::uint64_t rate_to_window(const RateLimit& limit, Nanoseconds window) {
  if (window.count() <= 0) {
    throw Error(ErrorKind::invalid_argument, "window must be positive");
  }
  if (limit.count == 0) return 0;
  using u128 = unsigned __int128;
  const u128 period_ns = u128(period_seconds(limit.period)) * 1000000000u;
  const u128 num = u128(limit.count) * u128(window.count());
  const u128 result = (num + period_ns - 1) / period_ns;
  if (result > std::numeric_limits<std::uint64_t>::max()) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(result);
}

namespace {

struct Emitter {
  const DeviceContext& ctx;
  Nanoseconds window;
  CompiledPolicy& out;
  std::set<FlowKey> seen;

  void warn(const Acl& acl, const Ace& ace, std::string msg) {
    out.warnings.push_back({acl.name, ace.name, std::move(msg)});
  }

  std::vector<IpAddress> resolve_remote(const Acl& acl, const Ace& ace,
                                        Direction dir) {
    const auto& m = ace.matches;
    const auto& dns = dir == Direction::from_device ? m.dst_dns_name : m.src_dns_name;
    const auto& literal = dir == Direction::from_device ? m.dst_address : m.src_address;
    if (literal) return {*literal};
    if (!dns) return {};
    auto it = ctx.dns_map.find(*dns);
    if (it == ctx.dns_map.end()) {
      throw Error(ErrorKind::compile, "cannot resolve host '" + *dns +
                                          "' (acl '" + acl.name + "', ace '" +
                                          ace.name + "')");
    }
    std::vector<IpAddress> result;
    for (const auto& a : it->second) {
      if (a.family() == acl.address_family) result.push_back(a);
    }
    if (result.empty()) {
      warn(acl, ace, "host '" + *dns + "' has no " +
                         to_string(acl.address_family) + " address");
    }
    return result;
  }

  void emit(const Acl& acl, const Ace& ace, Direction dir) {
    if (ace.actions.forwarding != Forwarding::accept) return;
    const auto& m = ace.matches;

    std::vector<IpAddress> devices;
    const auto& device_literal = dir == Direction::from_device ? m.src_address : m.dst_address;
    for (const auto& a : ctx.device_addresses) {
      if (a.family() != acl.address_family) continue;
      if (device_literal && *device_literal != a) continue;
      devices.push_back(a);
    }
    if (devices.empty()) {
      warn(acl, ace, std::string("no device address of family ") +
                         to_string(acl.address_family) + "; skipped");
      return;
    }

    const auto remotes = resolve_remote(acl, ace, dir);
    if (remotes.empty()) {
      if (!m.src_dns_name && !m.dst_dns_name && !m.src_address && !m.dst_address) {
        warn(acl, ace, "no remote endpoint; cannot be expressed as an exact-match rule");
      }
      return;
    }

    std::uint16_t port = 0;
    if (m.port) {
      const PortRole key_role =
          dir == Direction::from_device ? PortRole::destination : PortRole::source;
      if (m.port->role == key_role) {
        port = m.port->port;
      } else {
        warn(acl, ace, "port role does not match the key's port for this "
                       "direction; using any-port wildcard");
      }
    }

    std::vector<IpProtocol> protocols;
    if (m.protocol) {
      protocols.push_back(*m.protocol);
    } else {
      protocols = {IpProtocol::tcp, IpProtocol::udp, IpProtocol::icmp};
    }

    const std::uint64_t max_packets =
        ace.actions.packet_rate ? rate_to_window(*ace.actions.packet_rate, window) : 0;
    const std::uint64_t max_bytes =
        ace.actions.byte_rate ? rate_to_window(*ace.actions.byte_rate, window) : 0;

    for (const auto proto : protocols) {
      for (const auto& remote : remotes) {
        for (const auto& device : devices) {
          FlowRule rule;
          rule.key.direction = dir;
          rule.key.protocol = proto;
          rule.key.port = proto == IpProtocol::icmp ? 0 : port;
          rule.key.src = dir == Direction::from_device ? device : remote;
          rule.key.dst = dir == Direction::from_device ? remote : device;
          rule.max_packets = max_packets;
          rule.max_bytes = max_bytes;
          rule.window = window;
          rule.origin = {acl.name, ace.name};
          if (!seen.insert(rule.key).second) {
            warn(acl, ace, "duplicate key " + rule.key.to_string() +
                               "; first rule kept");
            continue;
          }
          out.rules.push_back(std::move(rule));
        }
      }
    }
  }
};

}  // namespace

CompiledPolicy compile(const MudFile& mud, const DeviceContext& ctx,
                       Nanoseconds window) {
  if (window.count() <= 0) {
    throw Error(ErrorKind::invalid_argument, "window must be positive");
  }
  validate(mud);

  CompiledPolicy out;
  Emitter emitter{ctx, window, out, {}};
  for (auto [policy, dir] :
       {std::pair{&mud.from_device_policy, Direction::from_device},
        std::pair{&mud.to_device_policy, Direction::to_device}}) {
    if (policy->empty()) continue;
    for (const auto& name : *policy) {
      const Acl* acl = mud.find_acl(name);
      for (const auto& ace : acl->aces) emitter.emit(*acl, ace, dir);
    }
    for (const auto& device : ctx.device_addresses) {
      out.default_drops.push_back({device, dir});
    }
  }
  return out;
}

std::string rules_to_json(const CompiledPolicy& policy, int indent) {
  Json rules = Json::array();
  for (const auto& r : policy.rules) {
    rules.push_back(Json{
        {"src", r.key.src.to_string()},
        {"dst", r.key.dst.to_string()},
        {"direction", to_string(r.key.direction)},
        {"protocol", to_string(r.key.protocol)},
        {"port", r.key.port},
        {"max_packets_per_window", r.max_packets},
        {"max_bytes_per_window", r.max_bytes},
        {"window_seconds",
         std::chrono::duration<double>(r.window).count()},
        {"origin", Json{{"acl", r.origin.acl}, {"ace", r.origin.ace}}},
    });
  }
  Json drops = Json::array();
  for (const auto& d : policy.default_drops) {
    drops.push_back(Json{{"device_address", d.device_address.to_string()},
                         {"direction", to_string(d.direction)}});
  }
  Json warnings = Json::array();
  for (const auto& w : policy.warnings) {
    warnings.push_back(Json{{"acl", w.acl}, {"ace", w.ace}, {"message", w.message}});
  }
  Json j = Json::object();
  j["policy_count"] = policy.policy_count();
  j["rules"] = rules;
  j["default_drops"] = drops;
  j["warnings"] = warnings;
  return j.dump(indent);
}

}  // namespace mudguard
