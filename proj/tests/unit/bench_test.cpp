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

#include "mudguard/bench.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mudguard/error.hpp"

namespace mudguard {
namespace {

TEST(Summarize, SingleSampleCollapses) {
  const auto s = summarize({42.0});
  EXPECT_EQ(s.samples, 1u);
  EXPECT_EQ(s.min, 42.0);
  EXPECT_EQ(s.median, 42.0);
  EXPECT_EQ(s.avg, 42.0);
  EXPECT_EQ(s.max, 42.0);
  EXPECT_EQ(s.p99, 42.0);
  EXPECT_EQ(s.stddev, 0.0);
}

TEST(Summarize, KnownSmallSet) {
  const auto s = summarize({4, 1, 3, 2});
  EXPECT_DOUBLE_EQ(s.min, 1);
  EXPECT_DOUBLE_EQ(s.max, 4);
  EXPECT_DOUBLE_EQ(s.median, 2.5);
  EXPECT_DOUBLE_EQ(s.avg, 2.5);
  EXPECT_DOUBLE_EQ(s.stddev, std::sqrt(1.25));
  // Order statistics 1..4 at q=90 sit at rank 2.7.
  EXPECT_DOUBLE_EQ(s.p90, 3.7);
}

TEST(Summarize, OrderingHoldsOnRandomData) {
  std::mt19937_64 rng(1);
  std::lognormal_distribution<double> d(5, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(1 + trial * 7);
    for (auto& x : v) x = d(rng);
    const auto s = summarize(v);
    ASSERT_LE(s.min, s.median);
    ASSERT_LE(s.median, s.p90);
    ASSERT_LE(s.p90, s.p99);
    ASSERT_LE(s.p99, s.max);
    ASSERT_LE(s.min, s.avg);
    ASSERT_LE(s.avg, s.max);
    ASSERT_NEAR(s.avg, std::accumulate(v.begin(), v.end(), 0.0) / double(v.size()), 1e-6);
  }
}

TEST(Summarize, EmptyIsAllZero) {
  const auto s = summarize({});
  EXPECT_EQ(s.samples, 0u);
  EXPECT_EQ(s.max, 0.0);
}

TEST(Bench, ChurnOf255RulesLeavesAnEmptyTable) {
  BenchConfig c;
  c.rules = 255;
  c.datapath_packets = 2000;
  const auto r = run_bench(c);
  EXPECT_EQ(r.insert.samples, 255u);
  EXPECT_EQ(r.remove.samples, 255u);
  EXPECT_EQ(r.datapath.samples, 2000u);
  EXPECT_EQ(r.table_size_after_insert, 255u);
  EXPECT_EQ(r.table_size_after_delete, 0u);
}

TEST(Bench, SingleRuleCollapsesTheDistribution) {
  BenchConfig c;
  c.rules = 1;
  c.datapath_packets = 1;
  const auto r = run_bench(c);
  EXPECT_EQ(r.insert.min, r.insert.median);
  EXPECT_EQ(r.insert.median, r.insert.avg);
  EXPECT_EQ(r.insert.avg, r.insert.max);
}

TEST(Bench, TableHasAllColumnsAndRows) {
  BenchConfig c;
  c.rules = 8;
  c.datapath_packets = 100;
  const auto table = format_bench_table(run_bench(c));
  for (const char* col : {"Min", "Median", "Avg", "90th", "99th", "Max", "Std.dev."}) {
    EXPECT_NE(table.find(col), std::string::npos) << col;
  }
  for (const char* row : {"Insert rule", "Delete rule", "Datapath"}) {
    EXPECT_NE(table.find(row), std::string::npos) << row;
  }
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 4);
}

TEST(Echo, RoundTripsThroughBothPaths) {
  EchoConfig c;
  c.round_trips = 400;
  c.block = 50;
  c.rules = 16;
  const auto r = run_echo_latency(c);
  EXPECT_EQ(r.baseline.samples + r.firewall.samples, 400u);
  EXPECT_EQ(r.firewall_drops, 0u);
  EXPECT_GT(r.baseline.median, 0.0);
  EXPECT_THROW(run_echo_latency(EchoConfig{0, 1, 1, 1}), Error);
}

}  // namespace
}  // namespace mudguard
