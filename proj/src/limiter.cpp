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

#include "mudguard/limiter.hpp"

#include <algorithm>

#include "mudguard/error.hpp"

namespace mudguard {

const char* to_string(LimiterMode mode) noexcept {
  return mode == LimiterMode::window ? "window" : "bucket";
}

void advance_window(FlowCounters& counters, WindowState& ws, Nanoseconds now) {
  if (!ws.started) {
    ws.window_start = now;
    ws.started = true;
    counters.packets = 0;
    counters.bytes = 0;
    return;
  }
  if (now < ws.window_start + ws.window_size) return;
  const auto k = (now - ws.window_start) / ws.window_size;
  ws.window_start += k * ws.window_size;
  counters.packets = 0;
  counters.bytes = 0;
}

LimitDecision window_check(FlowCounters& counters, WindowState& ws,
                           std::uint32_t length, Nanoseconds now) {
  advance_window(counters, ws, now);
  if (counters.max_pkt_rate != 0 && counters.packets + 1 > counters.max_pkt_rate) {
    return LimitDecision::packets_exceeded;
  }
  if (counters.max_bytes_rate != 0 &&
      counters.bytes + length > counters.max_bytes_rate) {
    return LimitDecision::bytes_exceeded;
  }
  counters.packets += 1;
  counters.bytes += length;
  return LimitDecision::allow;
}

TokenBucket::TokenBucket(std::uint64_t tokens_per_window, Nanoseconds window,
                         std::uint64_t capacity)
    : scale_(static_cast<u128>(window.count())),
      rate_(tokens_per_window),
      capacity_(capacity) {
  if (window.count() <= 0) {
    throw Error(ErrorKind::invalid_argument, "bucket window must be positive");
  }
  scaled_ = u128(capacity_) * scale_;
}

void TokenBucket::refill(Nanoseconds now) {
  if (!started_) {
    started_ = true;
    last_refill_ = now;
    return;
  }
  if (now <= last_refill_) return;
  const u128 cap = u128(capacity_) * scale_;
  const u128 elapsed = static_cast<u128>((now - last_refill_).count());
  last_refill_ = now;
  if (scaled_ >= cap) return;
  // elapsed < 2^63 and rate_ < 2^64, so the product fits.
  const u128 gained = elapsed * rate_;
  scaled_ = gained >= cap - scaled_ ? cap : scaled_ + gained;
}

bool TokenBucket::has(std::uint64_t n) const noexcept {
  return scaled_ >= u128(n) * scale_;
}

void TokenBucket::take(std::uint64_t n) noexcept { scaled_ -= u128(n) * scale_; }

bool TokenBucket::try_consume(std::uint64_t n, Nanoseconds now) {
  refill(now);
  if (!has(n)) return false;
  take(n);
  return true;
}

double TokenBucket::tokens() const noexcept {
  return static_cast<double>(scaled_) / static_cast<double>(scale_);
}

double TokenBucket::refill_per_second() const noexcept {
  return static_cast<double>(rate_) * 1e9 / static_cast<double>(scale_);
}

BucketPair make_buckets(const FlowRule& rule, std::uint32_t burst) {
  BucketPair b;
  b.max_pkt_rate = rule.max_packets;
  b.max_bytes_rate = rule.max_bytes;
  if (rule.max_packets != 0) {
    b.packets = TokenBucket(rule.max_packets, rule.window, burst);
  }
  if (rule.max_bytes != 0) {
    b.bytes = TokenBucket(rule.max_bytes, rule.window,
                          std::uint64_t(burst) * kMaxFrameBytes);
  }
  return b;
}

LimitDecision bucket_check(BucketPair& buckets, std::uint32_t length,
                           Nanoseconds now) {
  const bool limit_packets = buckets.max_pkt_rate != 0;
  const bool limit_bytes = buckets.max_bytes_rate != 0;
  if (limit_packets) buckets.packets.refill(now);
  if (limit_bytes) buckets.bytes.refill(now);
  if (limit_packets && !buckets.packets.has(1)) return LimitDecision::packets_exceeded;
  if (limit_bytes && !buckets.bytes.has(length)) return LimitDecision::bytes_exceeded;
  if (limit_packets) buckets.packets.take(1);
  if (limit_bytes) buckets.bytes.take(length);
  return LimitDecision::allow;
}

}  // namespace mudguard
