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

// Userspace enforcement engine: an exact-match allowlist keyed by FlowKey,
// with per-rule counters and a pluggable limiter. Any packet whose key is
// absent is dropped.
//
// Threading: process_packet() and stats_snapshot() may be called from any
// number of threads. insert_rule(), delete_rule() and clear() must come from
// one control thread at a time; a rule change is published atomically, so a
// worker sees either the old or the new rule. Per-rule state is updated under
// a per-rule lock, so concurrent packets on one rule never lose increments.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "mudguard/flow.hpp"
#include "mudguard/limiter.hpp"
#include "mudguard/packet.hpp"

namespace mudguard {

enum class VerdictAction : std::uint8_t { pass, drop, abort };

enum class VerdictReason : std::uint8_t {
  allowed,
  no_rule,
  pkt_rate_exceeded,
  byte_rate_exceeded,
  malformed,
};

const char* to_string(VerdictAction a) noexcept;
const char* to_string(VerdictReason r) noexcept;

struct Verdict {
  VerdictAction action = VerdictAction::drop;
  VerdictReason reason = VerdictReason::no_rule;
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct FlowStats {
  std::uint64_t passed_packets = 0;
  std::uint64_t passed_bytes = 0;
  std::uint64_t dropped_packets = 0;
  std::uint64_t dropped_bytes = 0;
  FlowCounters current_window;
  Nanoseconds window_start{0};
};

struct DatapathTotals {
  std::uint64_t no_rule_packets = 0;
  std::uint64_t aborted_packets = 0;
};

struct DatapathConfig {
  std::size_t capacity = 4096;
  std::uint32_t burst = kDefaultBurst;
};

class Datapath {
 public:
  explicit Datapath(DatapathConfig config = {});
  ~Datapath();

  Datapath(const Datapath&) = delete;
  Datapath& operator=(const Datapath&) = delete;

  // Replaces an existing rule with the same key (counters restart at zero).
  // Throws Error(table_full) when a new key would exceed capacity.
  void insert_rule(const FlowRule& rule);

  // Returns false if the key was not present.
  bool delete_rule(const FlowKey& key);

  void clear();

  std::size_t size() const;
  std::size_t capacity() const noexcept { return config_.capacity; }
  const DatapathConfig& config() const noexcept { return config_; }
  bool contains(const FlowKey& key) const;
  std::vector<FlowKey> keys() const;

  // Counters and maxima for the rule, if installed.
  std::optional<FlowCounters> lookup(const FlowKey& key) const;

  Verdict process_packet(std::span<const std::uint8_t> frame, Nanoseconds timestamp,
                         Direction direction, LimiterMode mode,
                         std::uint32_t wire_length = 0);

  Verdict process_parsed(const ParsedPacket& pkt, Direction direction,
                         LimiterMode mode);

  std::optional<FlowStats> stats_snapshot(const FlowKey& key) const;

  DatapathTotals totals() const noexcept;

 private:
  struct Entry;
  using Table = std::unordered_map<FlowKey, std::unique_ptr<Entry>>;

  Entry* find_locked(const FlowKey& key) const;

  DatapathConfig config_;
  mutable std::shared_mutex table_mu_;
  Table table_;
  std::atomic<std::uint64_t> no_rule_packets_{0};
  std::atomic<std::uint64_t> aborted_packets_{0};
};

}  // namespace mudguard
