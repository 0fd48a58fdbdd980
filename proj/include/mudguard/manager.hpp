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

// Control plane: fetches MUD files, compiles them for joining devices,
// installs the rules into a datapath, and removes them when devices leave.
// Single-threaded; the manager is the only writer to its datapath's rule
// table.

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mudguard/datapath.hpp"
#include "mudguard/error.hpp"
#include "mudguard/mud_model.hpp"
#include "mudguard/rule_compiler.hpp"

namespace mudguard {

inline constexpr std::chrono::milliseconds kDefaultFetchTimeout{10000};
// Cache lifetime for documents without cache-validity.
inline constexpr std::chrono::hours kDefaultCacheValidity{48};

// Fetches http://, https:// or file:// URLs. A relative file:// path such as
// file://fixtures/x.json resolves against `file_base` (the working directory
// when empty). Throws Error(fetch) for unreachable servers and non-2xx
// statuses (status in the message), Error(timeout) on timeout, and Error(io)
// for unreadable files.
std::string fetch_url(const std::string& url,
                      std::chrono::milliseconds timeout = kDefaultFetchTimeout,
                      const std::string& file_base = {});

using Clock = std::function<Nanoseconds()>;

// Monotonic clock reading.
Nanoseconds steady_now();

class MudFetcher {
 public:
  struct Result {
    MudFile mud;
    bool from_cache = false;
    double parse_ms = 0;  // 0 on a cache hit
  };

  explicit MudFetcher(Clock clock = steady_now,
                      std::chrono::milliseconds timeout = kDefaultFetchTimeout,
                      std::string file_base = {});

  // Serves from cache while the entry is younger than its cache-validity.
  // Documents that fail to parse are not cached.
  Result fetch(const std::string& url);
  void invalidate(const std::string& url);
  void clear() noexcept { cache_.clear(); }

  bool cached(const std::string& url) const;
  // Number of fetches that went to the network or disk.
  std::uint64_t remote_fetches() const noexcept { return remote_fetches_; }

 private:
  struct Entry {
    MudFile mud;
    Nanoseconds fetched_at{0};
  };
  bool fresh(const Entry& e) const;

  Clock clock_;
  std::chrono::milliseconds timeout_;
  std::string file_base_;
  std::map<std::string, Entry> cache_;
  std::uint64_t remote_fetches_ = 0;
};

struct DeviceEvent {
  enum class Kind : std::uint8_t { join, leave };
  Kind kind = Kind::join;
  std::string device_id;
  std::string mud_url;  // join only
  std::vector<IpAddress> addresses;
  friend bool operator==(const DeviceEvent&, const DeviceEvent&) = default;
};

const char* to_string(DeviceEvent::Kind kind) noexcept;

// JSON list of {"kind", "device_id", "mud_url"?, "addresses"?}. Throws
// Error(validation) for a join without a URL or a leave carrying one.
std::vector<DeviceEvent> parse_events(std::string_view json_text);

// Either a flat {"host": ["addr", ...]} object or a device context file with
// a "dns" member.
std::map<std::string, std::vector<IpAddress>> parse_dns_map(std::string_view json_text);

struct EventOutcome {
  std::string device_id;
  DeviceEvent::Kind kind = DeviceEvent::Kind::join;
  bool ok = true;
  std::optional<ErrorKind> error;  // not_found for a leave of an unknown device
  std::string message;
  std::size_t rules_installed = 0;
  std::size_t rules_removed = 0;
  std::size_t policies = 0;
  bool from_cache = false;
  double parse_ms = 0;
  double enforce_ms = 0;
};

struct InstalledDevice {
  std::string mud_url;
  std::vector<IpAddress> addresses;
  std::vector<FlowRule> rules;
  std::size_t policies = 0;
  friend bool operator==(const InstalledDevice&, const InstalledDevice&) = default;
};

class Manager {
 public:
  Manager(Datapath& datapath, std::map<std::string, std::vector<IpAddress>> dns_map,
          MudFetcher fetcher = MudFetcher(), Nanoseconds window = kDefaultWindow);

  // Never throws domain errors: failures are reported in the outcome and
  // leave both the state and the datapath unchanged.
  EventOutcome on_device_event(const DeviceEvent& event);

  const std::map<std::string, InstalledDevice>& installed() const noexcept { return installed_; }
  std::size_t installed_rule_count() const noexcept;
  MudFetcher& fetcher() noexcept { return fetcher_; }
  const Datapath& datapath() const noexcept { return datapath_; }

 private:
  void join(const DeviceEvent& event, EventOutcome& out);
  void leave(const DeviceEvent& event, EventOutcome& out);
  void install_or_rollback(const std::vector<FlowRule>& remove,
                           const std::vector<FlowRule>& add);

  Datapath& datapath_;
  std::map<std::string, std::vector<IpAddress>> dns_map_;
  MudFetcher fetcher_;
  Nanoseconds window_;
  std::map<std::string, InstalledDevice> installed_;
};

std::string outcome_to_json(const EventOutcome& outcome);

}  // namespace mudguard
