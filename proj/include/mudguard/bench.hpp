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

#include <cstddef>
#include <string>
#include <vector>

#include "mudguard/limiter.hpp"

namespace mudguard {

// Distribution summary in nanoseconds. Percentiles interpolate linearly
// between order statistics; stddev is the population standard deviation.
struct TimingStats {
  std::size_t samples = 0;
  double min = 0;
  double median = 0;
  double avg = 0;
  double p90 = 0;
  double p99 = 0;
  double max = 0;
  double stddev = 0;
};

TimingStats summarize(std::vector<double> samples);

// Linear-interpolated percentile of sorted data, q in [0, 100].
double percentile_sorted(const std::vector<double>& sorted, double q);

struct BenchConfig {
  std::size_t rules = 255;
  std::size_t datapath_packets = 10000;
  LimiterMode mode = LimiterMode::window;
};

// insert: time per insert_rule for `rules` distinct keys. datapath: time per
// process_packet for packets matching one installed rule while all `rules`
// are present. remove: time per delete_rule for every rule.
struct BenchResult {
  TimingStats insert;
  TimingStats remove;
  TimingStats datapath;
  std::size_t table_size_after_insert = 0;
  std::size_t table_size_after_delete = 0;
};

BenchResult run_bench(const BenchConfig& config);

// Columns: Experiment, Min, Median, Avg, 90th, 99th, Max, Std.dev. (ns)
std::string format_bench_table(const BenchResult& result);

// UDP request/response round trips over 127.0.0.1, alternating blocks with
// and without every request passing through a datapath holding `rules`
// rules. Times are nanoseconds per round trip.
struct EchoConfig {
  std::size_t round_trips = 20000;
  std::size_t block = 500;
  std::size_t rules = 255;
  std::size_t payload = 64;
};

struct EchoResult {
  TimingStats baseline;
  TimingStats firewall;
  std::size_t firewall_drops = 0;

  // (firewall median - baseline median) / baseline median
  double median_change() const noexcept {
    return baseline.median == 0 ? 0 : (firewall.median - baseline.median) / baseline.median;
  }
};

// Throws Error(io) if sockets cannot be set up.
EchoResult run_echo_latency(const EchoConfig& config);

}  // namespace mudguard
