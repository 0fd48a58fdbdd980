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

#include "mudguard/datapath.hpp"

#include <mutex>

#include "mudguard/error.hpp"

namespace mudguard {

const char* to_string(VerdictAction a) noexcept {
  switch (a) {
    case VerdictAction::pass: return "pass";
    case VerdictAction::drop: return "drop";
    case VerdictAction::abort: return "abort";
  }
  return "?";
}

const char* to_string(VerdictReason r) noexcept {
  switch (r) {
    case VerdictReason::allowed: return "allowed";
    case VerdictReason::no_rule: return "no-rule";
    case VerdictReason::pkt_rate_exceeded: return "pkt-rate-exceeded";
    case VerdictReason::byte_rate_exceeded: return "byte-rate-exceeded";
    case VerdictReason::malformed: return "malformed";
  }
  return "?";
}

struct Datapath::Entry {
  Entry(const FlowRule& r, std::uint32_t burst)
      : rule(r), buckets(make_buckets(r, burst)) {
    counters.max_pkt_rate = r.max_packets;
    counters.max_bytes_rate = r.max_bytes;
    window.window_size = r.window;
  }

  FlowRule rule;
  mutable std::mutex mu;
  FlowCounters counters;
  WindowState window;
  BucketPair buckets;
  std::uint64_t passed_packets = 0;
  std::uint64_t passed_bytes = 0;
  std::uint64_t dropped_packets = 0;
  std::uint64_t dropped_bytes = 0;
};

Datapath::Datapath(DatapathConfig config) : config_(config) {
  if (config_.capacity == 0) {
    throw Error(ErrorKind::invalid_argument, "datapath capacity must be positive");
  }
  if (config_.burst == 0) {
    throw Error(ErrorKind::invalid_argument, "bucket burst must be positive");
  }
  table_.reserve(config_.capacity);
}

Datapath::~Datapath() = default;

void Datapath::insert_rule(const FlowRule& rule) {
  check_rule(rule);
  auto entry = std::make_unique<Entry>(rule, config_.burst);
  std::unique_lock lock(table_mu_);
  auto it = table_.find(rule.key);
  if (it != table_.end()) {
    it->second = std::move(entry);
    return;
  }
  if (table_.size() >= config_.capacity) {
    throw Error(ErrorKind::table_full,
                "allowlist full (" + std::to_string(config_.capacity) + " entries)");
  }
  table_.emplace(rule.key, std::move(entry));
}

bool Datapath::delete_rule(const FlowKey& key) {
  std::unique_lock lock(table_mu_);
  return table_.erase(key) != 0;
}

void Datapath::clear() {
  std::unique_lock lock(table_mu_);
  table_.clear();
}

std::size_t Datapath::size() const {
  std::shared_lock lock(table_mu_);
  return table_.size();
}

bool Datapath::contains(const FlowKey& key) const {
  std::shared_lock lock(table_mu_);
  return table_.count(key) != 0;
}

std::vector<FlowKey> Datapath::keys() const {
  std::shared_lock lock(table_mu_);
  std::vector<FlowKey> out;
  out.reserve(table_.size());
  for (const auto& [k, e] : table_) out.push_back(k);
  return out;
}

std::optional<FlowCounters> Datapath::lookup(const FlowKey& key) const {
  std::shared_lock lock(table_mu_);
  auto it = table_.find(key);
  if (it == table_.end()) return std::nullopt;
  std::lock_guard entry_lock(it->second->mu);
  return it->second->counters;
}

Datapath::Entry* Datapath::find_locked(const FlowKey& key) const {
  auto it = table_.find(key);
  if (it != table_.end()) return it->second.get();
  if (key.port != 0) {
    FlowKey wildcard = key;
    wildcard.port = 0;
    it = table_.find(wildcard);
    if (it != table_.end()) return it->second.get();
  }
  return nullptr;
}

Verdict Datapath::process_packet(std::span<const std::uint8_t> frame,
                                 Nanoseconds timestamp, Direction direction,
                                 LimiterMode mode, std::uint32_t wire_length) {
  const auto pkt = parse_headers(frame, timestamp, wire_length);
  if (!pkt) {
    aborted_packets_.fetch_add(1, std::memory_order_relaxed);
    return {VerdictAction::abort, VerdictReason::malformed};
  }
  return process_parsed(*pkt, direction, mode);
}

Verdict Datapath::process_parsed(const ParsedPacket& pkt, Direction direction,
                                 LimiterMode mode) {
  const auto key = build_key(pkt, direction);
  if (!key) {
    no_rule_packets_.fetch_add(1, std::memory_order_relaxed);
    return {VerdictAction::drop, VerdictReason::no_rule};
  }

  std::shared_lock lock(table_mu_);
  Entry* e = find_locked(*key);
  if (e == nullptr) {
    no_rule_packets_.fetch_add(1, std::memory_order_relaxed);
    return {VerdictAction::drop, VerdictReason::no_rule};
  }

  std::lock_guard entry_lock(e->mu);
  LimitDecision decision;
  if (mode == LimiterMode::window) {
    decision = window_check(e->counters, e->window, pkt.length, pkt.timestamp);
  } else {
    decision = bucket_check(e->buckets, pkt.length, pkt.timestamp);
    // Window counters still track passed traffic for reporting.
    advance_window(e->counters, e->window, pkt.timestamp);
    if (decision == LimitDecision::allow) {
      e->counters.packets += 1;
      e->counters.bytes += pkt.length;
    }
  }

  if (decision == LimitDecision::allow) {
    e->passed_packets += 1;
    e->passed_bytes += pkt.length;
    return {VerdictAction::pass, VerdictReason::allowed};
  }
  e->dropped_packets += 1;
  e->dropped_bytes += pkt.length;
  return {VerdictAction::drop, decision == LimitDecision::packets_exceeded
                                   ? VerdictReason::pkt_rate_exceeded
                                   : VerdictReason::byte_rate_exceeded};
}

std::optional<FlowStats> Datapath::stats_snapshot(const FlowKey& key) const {
  std::shared_lock lock(table_mu_);
  auto it = table_.find(key);
  if (it == table_.end()) return std::nullopt;
  const Entry& e = *it->second;
  std::lock_guard entry_lock(e.mu);
  FlowStats s;
  s.passed_packets = e.passed_packets;
  s.passed_bytes = e.passed_bytes;
  s.dropped_packets = e.dropped_packets;
  s.dropped_bytes = e.dropped_bytes;
  s.current_window = e.counters;
  s.window_start = e.window.window_start;
  return s;
}

DatapathTotals Datapath::totals() const noexcept {
  return {no_rule_packets_.load(std::memory_order_relaxed),
          aborted_packets_.load(std::memory_order_relaxed)};
}

}  // namespace mudguard
