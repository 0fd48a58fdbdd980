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

// Reference implementations used as test oracles. Each one recomputes its
// answer from first principles and shares no code with the library beyond
// plain data types.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mudguard/flow.hpp"
#include "mudguard/trace.hpp"

namespace mudguard::testing {

struct OraclePacket {
  FlowKey key;
  std::int64_t t_ns = 0;
  std::uint32_t length = 0;
};

enum class OracleVerdict { pass, no_rule, pkt_exceeded, byte_exceeded };

// Strict-window reference: the window of a packet is
// floor((t - first_t_of_rule) / W), and it passes iff the packets and bytes
// already passed in that window leave room for it. Inputs must be sorted.
inline std::vector<OracleVerdict> window_oracle(const std::vector<OraclePacket>& packets,
                                                const std::vector<FlowRule>& rules) {
  std::map<FlowKey, const FlowRule*> table;
  for (const auto& r : rules) table[r.key] = &r;
  std::map<FlowKey, std::int64_t> first_seen;
  // (rule, window index) -> (passed packets, passed bytes)
  std::map<std::pair<FlowKey, std::int64_t>, std::pair<std::uint64_t, std::uint64_t>> passed;

  std::vector<OracleVerdict> out;
  for (const auto& p : packets) {
    auto it = table.find(p.key);
    if (it == table.end() && p.key.port != 0) {
      FlowKey any = p.key;
      any.port = 0;
      it = table.find(any);
    }
    if (it == table.end()) {
      out.push_back(OracleVerdict::no_rule);
      continue;
    }
    const FlowRule& r = *it->second;
    const auto t0 = first_seen.try_emplace(r.key, p.t_ns).first->second;
    const std::int64_t idx = (p.t_ns - t0) / r.window.count();
    auto& [pk, by] = passed[{r.key, idx}];
    if (r.max_packets != 0 && pk + 1 > r.max_packets) {
      out.push_back(OracleVerdict::pkt_exceeded);
    } else if (r.max_bytes != 0 && by + p.length > r.max_bytes) {
      out.push_back(OracleVerdict::byte_exceeded);
    } else {
      pk += 1;
      by += p.length;
      out.push_back(OracleVerdict::pass);
    }
  }
  return out;
}

// Token-bucket reference, stepped packet by packet. Token levels are exact
// rationals with denominator W (the window in ns): a bucket refilling
// `max` tokens per window gains `max` units per elapsed nanosecond.
class BucketOracle {
 public:
  BucketOracle(std::uint64_t max_per_window, std::int64_t window_ns, std::uint64_t capacity)
      : max_(max_per_window), w_(window_ns), cap_(capacity) {}

  bool offer(std::int64_t t_ns, std::uint64_t cost) {
    using i128 = __int128;
    if (!seen_) {
      level_ = i128(cap_) * w_;
      last_ = t_ns;
      seen_ = true;
    }
    if (t_ns > last_) {
      level_ += i128(max_) * (t_ns - last_);
      if (level_ > i128(cap_) * w_) level_ = i128(cap_) * w_;
      last_ = t_ns;
    }
    return level_ >= i128(cost) * w_;
  }
  void take(std::uint64_t cost) { level_ -= static_cast<__int128>(cost) * w_; }

 private:
  std::uint64_t max_;
  std::int64_t w_;
  std::uint64_t cap_;
  __int128 level_ = 0;
  std::int64_t last_ = 0;
  bool seen_ = false;
};

inline std::vector<OracleVerdict> bucket_oracle(const std::vector<OraclePacket>& packets,
                                                const std::vector<FlowRule>& rules,
                                                std::uint64_t burst,
                                                std::uint64_t max_frame = 1514) {
  struct State {
    std::optional<BucketOracle> pkts, bytes;
  };
  std::map<FlowKey, std::pair<const FlowRule*, State>> table;
  for (const auto& r : rules) {
    State s;
    if (r.max_packets) s.pkts.emplace(r.max_packets, r.window.count(), burst);
    if (r.max_bytes) s.bytes.emplace(r.max_bytes, r.window.count(), burst * max_frame);
    table.insert_or_assign(r.key, std::make_pair(&r, std::move(s)));
  }
  std::vector<OracleVerdict> out;
  for (const auto& p : packets) {
    auto it = table.find(p.key);
    if (it == table.end() && p.key.port != 0) {
      FlowKey any = p.key;
      any.port = 0;
      it = table.find(any);
    }
    if (it == table.end()) {
      out.push_back(OracleVerdict::no_rule);
      continue;
    }
    State& s = it->second.second;
    const bool pk_ok = !s.pkts || s.pkts->offer(p.t_ns, 1);
    const bool by_ok = !s.bytes || s.bytes->offer(p.t_ns, p.length);
    if (!pk_ok) {
      out.push_back(OracleVerdict::pkt_exceeded);
    } else if (!by_ok) {
      out.push_back(OracleVerdict::byte_exceeded);
    } else {
      if (s.pkts) s.pkts->take(1);
      if (s.bytes) s.bytes->take(p.length);
      out.push_back(OracleVerdict::pass);
    }
  }
  return out;
}

struct OracleWindow {
  std::int64_t start_ns = 0;
  std::uint64_t tcp_packets = 0, tcp_bytes = 0;
  std::uint64_t udp_packets = 0, udp_bytes = 0;
  std::uint64_t other_packets = 0, other_bytes = 0;
};

// Floor bucketing: every record of a device lands in window
// floor((t - t0) / W), where t0 is that device's first timestamp. Only
// non-empty windows are returned, in time order.
inline std::map<std::string, std::vector<OracleWindow>> floor_bucket_oracle(
    const std::vector<TraceRecord>& records, std::int64_t window_ns) {
  std::map<std::string, std::int64_t> t0;
  std::map<std::string, std::map<std::int64_t, OracleWindow>> buckets;
  for (const auto& r : records) {
    const auto first = t0.try_emplace(r.device_id, r.timestamp.count()).first->second;
    const std::int64_t idx = (r.timestamp.count() - first) / window_ns;
    auto& w = buckets[r.device_id][idx];
    w.start_ns = first + idx * window_ns;
    if (r.protocol == TraceProtocol::tcp) {
      w.tcp_packets += 1;
      w.tcp_bytes += r.length;
    } else if (r.protocol == TraceProtocol::udp) {
      w.udp_packets += 1;
      w.udp_bytes += r.length;
    } else {
      w.other_packets += 1;
      w.other_bytes += r.length;
    }
  }
  std::map<std::string, std::vector<OracleWindow>> out;
  for (auto& [dev, m] : buckets) {
    for (auto& [idx, w] : m) out[dev].push_back(w);
  }
  return out;
}

}  // namespace mudguard::testing
