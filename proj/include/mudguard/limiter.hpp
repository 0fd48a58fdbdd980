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

// The two rate-limiter semantics used by the datapath.
//
// Strict window: counters reset at fixed window boundaries; a packet passes
// only if admitting it keeps the window's packet and byte totals within the
// maxima. Boundaries advance in whole multiples of the window size from the
// first packet seen.
//
// Token bucket: tokens accrue continuously at max/window per nanosecond up
// to a burst capacity; a packet passes if one packet token (and, with a byte
// limit, `length` byte tokens) are available.

#include <cstdint>

#include "mudguard/flow.hpp"

namespace mudguard {

enum class LimiterMode : std::uint8_t { window, bucket };

const char* to_string(LimiterMode mode) noexcept;

enum class LimitDecision : std::uint8_t { allow, packets_exceeded, bytes_exceeded };

// Per-rule counters for the current window. Maxima of 0 mean unlimited.
struct FlowCounters {
  std::uint64_t packets = 0;
  std::uint64_t bytes = 0;
  std::uint64_t max_pkt_rate = 0;
  std::uint64_t max_bytes_rate = 0;
  friend bool operator==(const FlowCounters&, const FlowCounters&) = default;
};

struct WindowState {
  Nanoseconds window_start{0};
  Nanoseconds window_size = kDefaultWindow;
  bool started = false;  // window_start is set by the first packet
};

// Moves the window forward so that `now` falls inside it, zeroing the
// counters when it moves. Timestamps earlier than window_start stay in the
// current window.
void advance_window(FlowCounters& counters, WindowState& ws, Nanoseconds now);

// Reset-then-evaluate. On allow the counters include the packet; on deny
// they are left unchanged.
LimitDecision window_check(FlowCounters& counters, WindowState& ws,
                           std::uint32_t length, Nanoseconds now);

// Continuous-refill bucket kept in exact integer arithmetic: one token is
// `window` scaled units and refill adds `tokens_per_window` units per
// nanosecond. Starts full.
class TokenBucket {
 public:
  TokenBucket() = default;
  TokenBucket(std::uint64_t tokens_per_window, Nanoseconds window,
              std::uint64_t capacity);

  // Refills up to `now`, then takes `n` tokens if available.
  bool try_consume(std::uint64_t n, Nanoseconds now);

  void refill(Nanoseconds now);
  bool has(std::uint64_t n) const noexcept;
  void take(std::uint64_t n) noexcept;

  double tokens() const noexcept;
  std::uint64_t capacity() const noexcept { return capacity_; }
  double refill_per_second() const noexcept;

 private:
  using u128 = unsigned __int128;
  u128 scaled_ = 0;
  u128 scale_ = 1;
  std::uint64_t rate_ = 0;
  std::uint64_t capacity_ = 0;
  Nanoseconds last_refill_{0};
  bool started_ = false;
};

inline constexpr std::uint32_t kDefaultBurst = 5;
// Byte buckets hold `burst` maximum-size Ethernet frames.
inline constexpr std::uint32_t kMaxFrameBytes = 1514;

struct BucketPair {
  TokenBucket packets;
  TokenBucket bytes;
  std::uint64_t max_pkt_rate = 0;
  std::uint64_t max_bytes_rate = 0;
};

BucketPair make_buckets(const FlowRule& rule, std::uint32_t burst);

// Both buckets must admit the packet; tokens are consumed only on allow.
LimitDecision bucket_check(BucketPair& buckets, std::uint32_t length,
                           Nanoseconds now);

}  // namespace mudguard
