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

#include "mudguard/manager.hpp"

#include <cmath>
#include <filesystem>
#include <set>

#include "httplib.h"
#include "json.hpp"
#include "mudguard/trace.hpp"

namespace mudguard {

using Json = nlohmann::ordered_json;

namespace {

double elapsed_ms(Nanoseconds start, Nanoseconds end) {
  // Millisecond values with microsecond resolution.
  return std::round(double((end - start).count()) / 1e3) / 1e3;
}

std::string fetch_file(std::string_view path, const std::string& base) {
  std::filesystem::path p{std::string(path)};
  if (p.is_relative() && !base.empty()) p = std::filesystem::path(base) / p;
  return read_file(p.string());
}

std::string fetch_http(const std::string& url, std::chrono::milliseconds timeout) {
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string origin = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  if (!client.is_valid()) {
    throw Error(ErrorKind::fetch, "unsupported URL: " + url);
  }
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  client.set_follow_location(true);

  const auto start = steady_now();
  auto res = client.Get(path);
  if (!res) {
    const auto err = res.error();
    const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                           (err == httplib::Error::Read && steady_now() - start >= timeout);
    if (timed_out) {
      throw Error(ErrorKind::timeout, "timed out fetching " + url);
    }
    throw Error(ErrorKind::fetch, "cannot fetch " + url + ": " + httplib::to_string(err));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(ErrorKind::fetch,
                "HTTP status " + std::to_string(res->status) + " fetching " + url);
  }
  return res->body;
}

}  // namespace

Nanoseconds steady_now() {
  return std::chrono::duration_cast<Nanoseconds>(
      std::chrono::steady_clock::now().time_since_epoch());
}

std::string fetch_url(const std::string& url, std::chrono::milliseconds timeout,
                      const std::string& file_base) {
  constexpr std::string_view kFile = "file://";
  if (url.starts_with(kFile)) {
    return fetch_file(std::string_view(url).substr(kFile.size()), file_base);
  }
  if (url.starts_with("http://") || url.starts_with("https://")) {
    return fetch_http(url, timeout);
  }
  throw Error(ErrorKind::invalid_argument, "unsupported URL scheme: " + url);
}

MudFetcher::MudFetcher(Clock clock, std::chrono::milliseconds timeout, std::string file_base)
    : clock_(std::move(clock)), timeout_(timeout), file_base_(std::move(file_base)) {}

bool MudFetcher::fresh(const Entry& e) const {
  const Nanoseconds validity = e.mud.cache_validity
                                   ? Nanoseconds(std::chrono::hours(*e.mud.cache_validity))
                                   : Nanoseconds(kDefaultCacheValidity);
  return clock_() - e.fetched_at < validity;
}

bool MudFetcher::cached(const std::string& url) const {
  auto it = cache_.find(url);
  return it != cache_.end() && fresh(it->second);
}

void MudFetcher::invalidate(const std::string& url) { cache_.erase(url); }

MudFetcher::Result MudFetcher::fetch(const std::string& url) {
  if (auto it = cache_.find(url); it != cache_.end()) {
    if (fresh(it->second)) return {it->second.mud, true, 0};
    cache_.erase(it);
  }
  const std::string text = fetch_url(url, timeout_, file_base_);
  ++remote_fetches_;
  const auto start = steady_now();
  MudFile mud = parse_mud_file(text);
  const double parse_ms = elapsed_ms(start, steady_now());
  cache_.insert_or_assign(url, Entry{mud, clock_()});
  return {std::move(mud), false, parse_ms};
}

const char* to_string(DeviceEvent::Kind kind) noexcept {
  return kind == DeviceEvent::Kind::join ? "join" : "leave";
}

std::vector<DeviceEvent> parse_events(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text.begin(), json_text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse, e.what(), e.byte);
  }
  if (!j.is_array()) throw Error(ErrorKind::validation, "events must be a JSON list");
  std::vector<DeviceEvent> events;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& item = j[i];
    const std::string where = "event " + std::to_string(i) + ": ";
    if (!item.is_object()) throw Error(ErrorKind::validation, where + "not an object");
    DeviceEvent ev;
    const auto kind = item.value("kind", std::string());
    if (kind == "join") {
      ev.kind = DeviceEvent::Kind::join;
    } else if (kind == "leave") {
      ev.kind = DeviceEvent::Kind::leave;
    } else {
      throw Error(ErrorKind::validation, where + "kind must be 'join' or 'leave'");
    }
    if (!item.contains("device_id") || !item["device_id"].is_string() ||
        item["device_id"].get<std::string>().empty()) {
      throw Error(ErrorKind::validation, where + "missing device_id");
    }
    ev.device_id = item["device_id"].get<std::string>();
    if (item.contains("mud_url")) {
      if (ev.kind == DeviceEvent::Kind::leave) {
        throw Error(ErrorKind::validation, where + "leave must not carry mud_url");
      }
      if (!item["mud_url"].is_string()) throw Error(ErrorKind::validation, where + "bad mud_url");
      ev.mud_url = item["mud_url"].get<std::string>();
    }
    if (ev.kind == DeviceEvent::Kind::join && ev.mud_url.empty()) {
      throw Error(ErrorKind::validation, where + "join requires mud_url");
    }
    if (item.contains("addresses")) {
      if (!item["addresses"].is_array()) {
        throw Error(ErrorKind::validation, where + "addresses must be a list");
      }
      if (ev.kind == DeviceEvent::Kind::leave && !item["addresses"].empty()) {
        throw Error(ErrorKind::validation, where + "leave carries only device_id");
      }
      for (const auto& a : item["addresses"]) {
        if (!a.is_string()) throw Error(ErrorKind::validation, where + "bad address");
        ev.addresses.push_back(parse_address_or_throw(a.get<std::string>()));
      }
    }
    events.push_back(std::move(ev));
  }
  return events;
}

std::map<std::string, std::vector<IpAddress>> parse_dns_map(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text.begin(), json_text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse, e.what(), e.byte);
  }
  if (j.is_object() && j.contains("dns")) j = j["dns"];
  if (!j.is_object()) throw Error(ErrorKind::validation, "DNS map must be a JSON object");
  std::map<std::string, std::vector<IpAddress>> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    auto& addrs = out[it.key()];
    const auto& v = it.value();
    if (v.is_string()) {
      addrs.push_back(parse_address_or_throw(v.get<std::string>()));
    } else if (v.is_array()) {
      for (const auto& a : v) {
        if (!a.is_string()) throw Error(ErrorKind::validation, "bad address for " + it.key());
        addrs.push_back(parse_address_or_throw(a.get<std::string>()));
      }
    } else {
      throw Error(ErrorKind::validation, "bad DNS entry for " + it.key());
    }
    if (addrs.empty()) throw Error(ErrorKind::validation, "no addresses for " + it.key());
    for (const auto& a : addrs) {
      if (a.family() != addrs.front().family()) {
        throw Error(ErrorKind::validation, "DNS entry " + it.key() + " mixes address families");
      }
    }
  }
  return out;
}

Manager::Manager(Datapath& datapath, std::map<std::string, std::vector<IpAddress>> dns_map,
                 MudFetcher fetcher, Nanoseconds window)
    : datapath_(datapath),
      dns_map_(std::move(dns_map)),
      fetcher_(std::move(fetcher)),
      window_(window) {}

std::size_t Manager::installed_rule_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [id, dev] : installed_) n += dev.rules.size();
  return n;
}

EventOutcome Manager::on_device_event(const DeviceEvent& event) {
  EventOutcome out;
  out.device_id = event.device_id;
  out.kind = event.kind;
  try {
    if (event.kind == DeviceEvent::Kind::join) {
      join(event, out);
    } else {
      leave(event, out);
    }
  } catch (const Error& e) {
    out.ok = false;
    out.error = e.kind();
    out.message = e.what();
    out.rules_installed = 0;
    out.policies = 0;
  }
  return out;
}

void Manager::install_or_rollback(const std::vector<FlowRule>& remove,
                                  const std::vector<FlowRule>& add) {
  for (const auto& r : remove) datapath_.delete_rule(r.key);
  std::size_t done = 0;
  try {
    for (; done < add.size(); ++done) datapath_.insert_rule(add[done]);
  } catch (...) {
    for (std::size_t i = 0; i < done; ++i) datapath_.delete_rule(add[i].key);
    for (const auto& r : remove) datapath_.insert_rule(r);
    throw;
  }
}

void Manager::join(const DeviceEvent& event, EventOutcome& out) {
  if (event.addresses.empty()) {
    throw Error(ErrorKind::invalid_argument, "join for " + event.device_id + " has no addresses");
  }
  auto fetched = fetcher_.fetch(event.mud_url);
  out.from_cache = fetched.from_cache;
  out.parse_ms = fetched.parse_ms;

  const auto start = steady_now();
  DeviceContext ctx{event.device_id, event.addresses, dns_map_};
  CompiledPolicy policy = compile(fetched.mud, ctx, window_);

  const InstalledDevice* previous = nullptr;
  if (auto it = installed_.find(event.device_id); it != installed_.end()) previous = &it->second;

  // Keys owned by other devices would break the state/datapath coherence.
  std::set<FlowKey> foreign;
  for (const auto& [id, dev] : installed_) {
    if (id == event.device_id) continue;
    for (const auto& r : dev.rules) foreign.insert(r.key);
  }
  for (const auto& r : policy.rules) {
    if (foreign.count(r.key) != 0) {
      throw Error(ErrorKind::compile, "rule " + r.key.to_string() +
                                          " is already installed for another device");
    }
  }

  static const std::vector<FlowRule> kNone;
  install_or_rollback(previous ? previous->rules : kNone, policy.rules);
  out.enforce_ms = elapsed_ms(start, steady_now());
  out.rules_removed = previous ? previous->rules.size() : 0;
  out.rules_installed = policy.rules.size();
  out.policies = policy.policy_count();
  installed_[event.device_id] =
      InstalledDevice{event.mud_url, event.addresses, std::move(policy.rules), out.policies};
}

void Manager::leave(const DeviceEvent& event, EventOutcome& out) {
  auto it = installed_.find(event.device_id);
  if (it == installed_.end()) {
    throw Error(ErrorKind::not_found, "device " + event.device_id + " is not installed");
  }
  const auto start = steady_now();
  for (const auto& r : it->second.rules) datapath_.delete_rule(r.key);
  out.enforce_ms = elapsed_ms(start, steady_now());
  out.rules_removed = it->second.rules.size();
  installed_.erase(it);
}

std::string outcome_to_json(const EventOutcome& o) {
  Json j = Json::object();
  j["device_id"] = o.device_id;
  j["kind"] = to_string(o.kind);
  j["ok"] = o.ok;
  if (o.error) {
    j["error"] = to_string(*o.error);
    j["message"] = o.message;
  }
  j["rules_installed"] = o.rules_installed;
  j["rules_removed"] = o.rules_removed;
  j["policies"] = o.policies;
  j["from_cache"] = o.from_cache;
  j["parse_ms"] = o.parse_ms;
  j["enforce_ms"] = o.enforce_ms;
  return j.dump();
}

}  // namespace mudguard
