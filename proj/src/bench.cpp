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

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>
#include <thread>

#include "mudguard/datapath.hpp"
#include "mudguard/error.hpp"

namespace mudguard {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ns(Clock::time_point a, Clock::time_point b) {
  return static_cast<double>(std::chrono::duration_cast<Nanoseconds>(b - a).count());
}

FlowRule bench_rule(std::size_t i) {
  FlowRule r;
  r.key.src = IpAddress::v4({10, 0, 0, 1});
  r.key.dst = IpAddress::v4({10, static_cast<std::uint8_t>(1 + (i >> 16)),
                             static_cast<std::uint8_t>(i >> 8),
                             static_cast<std::uint8_t>(i)});
  r.key.direction = Direction::from_device;
  r.key.protocol = IpProtocol::tcp;
  r.key.port = 443;
  return r;
}

class Socket {
 public:
  Socket() : fd_(::socket(AF_INET, SOCK_DGRAM, 0)) {
    if (fd_ < 0) throw Error(ErrorKind::io, "socket(): " + std::string(std::strerror(errno)));
  }
  ~Socket() {
    if (fd_ >= 0) ::close(fd_);
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  int fd() const { return fd_; }

 private:
  int fd_;
};

sockaddr_in loopback(std::uint16_t port) {
  sockaddr_in a{};
  a.sin_family = AF_INET;
  a.sin_port = htons(port);
  a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  return a;
}

}  // namespace

double percentile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0;
  const double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

TimingStats summarize(std::vector<double> samples) {
  TimingStats s;
  s.samples = samples.size();
  if (samples.empty()) return s;
  std::sort(samples.begin(), samples.end());
  s.min = samples.front();
  s.max = samples.back();
  s.median = percentile_sorted(samples, 50);
  s.p90 = percentile_sorted(samples, 90);
  s.p99 = percentile_sorted(samples, 99);
  s.avg = std::accumulate(samples.begin(), samples.end(), 0.0) /
          static_cast<double>(samples.size());
  double var = 0;
  for (double x : samples) var += (x - s.avg) * (x - s.avg);
  s.stddev = std::sqrt(var / static_cast<double>(samples.size()));
  return s;
}

BenchResult run_bench(const BenchConfig& config) {
  if (config.rules == 0 || config.datapath_packets == 0) {
    throw Error(ErrorKind::invalid_argument, "bench needs at least one operation");
  }
  DatapathConfig dc;
  dc.capacity = std::max<std::size_t>(config.rules, 4096);
  Datapath dp(dc);

  std::vector<FlowRule> rules;
  rules.reserve(config.rules);
  for (std::size_t i = 0; i < config.rules; ++i) rules.push_back(bench_rule(i));

  BenchResult result;
  std::vector<double> samples;
  samples.reserve(std::max(config.rules, config.datapath_packets));
  for (const auto& r : rules) {
    const auto t0 = Clock::now();
    dp.insert_rule(r);
    samples.push_back(elapsed_ns(t0, Clock::now()));
  }
  result.insert = summarize(samples);
  result.table_size_after_insert = dp.size();

  FrameSpec spec;
  spec.src = rules.front().key.src;
  spec.dst = rules.front().key.dst;
  spec.protocol = L4Protocol::tcp;
  spec.src_port = 40000;
  spec.dst_port = 443;
  spec.length = 128;
  const auto frame = build_frame(spec);
  samples.clear();
  for (std::size_t i = 0; i < config.datapath_packets; ++i) {
    const auto t0 = Clock::now();
    const auto v = dp.process_packet(frame, Nanoseconds(static_cast<std::int64_t>(i) * 1000),
                                     Direction::from_device, config.mode);
    samples.push_back(elapsed_ns(t0, Clock::now()));
    if (v.action != VerdictAction::pass) {
      throw Error(ErrorKind::invalid_argument, "bench packet unexpectedly dropped");
    }
  }
  result.datapath = summarize(samples);

  samples.clear();
  for (const auto& r : rules) {
    const auto t0 = Clock::now();
    dp.delete_rule(r.key);
    samples.push_back(elapsed_ns(t0, Clock::now()));
  }
  result.remove = summarize(samples);
  result.table_size_after_delete = dp.size();
  return result;
}

std::string format_bench_table(const BenchResult& result) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %10s %10s %10s %10s %10s %10s %10s\n",
                "Experiment", "Min", "Median", "Avg", "90th", "99th", "Max",
                "Std.dev.");
  out += line;
  auto row = [&](const char* name, const TimingStats& s) {
    std::snprintf(line, sizeof line,
                  "%-12s %10.0f %10.2f %10.2f %10.2f %10.2f %10.0f %10.2f\n", name,
                  s.min, s.median, s.avg, s.p90, s.p99, s.max, s.stddev);
    out += line;
  };
  row("Insert rule", result.insert);
  row("Delete rule", result.remove);
  row("Datapath", result.datapath);
  return out;
}

EchoResult run_echo_latency(const EchoConfig& config) {
  if (config.round_trips == 0 || config.block == 0) {
    throw Error(ErrorKind::invalid_argument, "echo benchmark needs round trips");
  }
  Socket server;
  Socket client;
  sockaddr_in bind_addr = loopback(0);
  if (::bind(server.fd(), reinterpret_cast<sockaddr*>(&bind_addr), sizeof bind_addr) != 0) {
    throw Error(ErrorKind::io, "bind(): " + std::string(std::strerror(errno)));
  }
  socklen_t len = sizeof bind_addr;
  ::getsockname(server.fd(), reinterpret_cast<sockaddr*>(&bind_addr), &len);
  const std::uint16_t server_port = ntohs(bind_addr.sin_port);

  sockaddr_in client_addr = loopback(0);
  if (::bind(client.fd(), reinterpret_cast<sockaddr*>(&client_addr), sizeof client_addr) != 0) {
    throw Error(ErrorKind::io, "bind(): " + std::string(std::strerror(errno)));
  }
  len = sizeof client_addr;
  ::getsockname(client.fd(), reinterpret_cast<sockaddr*>(&client_addr), &len);
  const std::uint16_t client_port = ntohs(client_addr.sin_port);

  timeval tv{2, 0};
  ::setsockopt(client.fd(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  ::setsockopt(server.fd(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);

  // Requests are from-device traffic 127.0.0.1:client -> 127.0.0.1:server.
  Datapath dp(DatapathConfig{std::max<std::size_t>(config.rules, 4096), kDefaultBurst});
  for (std::size_t i = 1; i < config.rules; ++i) dp.insert_rule(bench_rule(i));
  FlowRule allow;
  allow.key.src = IpAddress::v4({127, 0, 0, 1});
  allow.key.dst = IpAddress::v4({127, 0, 0, 1});
  allow.key.protocol = IpProtocol::udp;
  allow.key.port = server_port;
  dp.insert_rule(allow);

  FrameSpec spec;
  spec.src = allow.key.src;
  spec.dst = allow.key.dst;
  spec.protocol = L4Protocol::udp;
  spec.src_port = client_port;
  spec.dst_port = server_port;
  spec.length = static_cast<std::uint32_t>(config.payload + minimal_frame_size(AddressFamily::ipv4, L4Protocol::udp));
  const auto frame = build_frame(spec);

  std::atomic<bool> filtering{false};
  std::atomic<bool> stop{false};
  std::atomic<std::size_t> drops{0};
  const auto start = Clock::now();

  std::thread echo([&] {
    std::vector<char> buf(65536);
    while (!stop.load(std::memory_order_relaxed)) {
      sockaddr_in peer{};
      socklen_t plen = sizeof peer;
      const auto n = ::recvfrom(server.fd(), buf.data(), buf.size(), 0,
                                reinterpret_cast<sockaddr*>(&peer), &plen);
      if (n <= 0) continue;
      if (filtering.load(std::memory_order_relaxed)) {
        const auto now = std::chrono::duration_cast<Nanoseconds>(Clock::now() - start);
        const auto v = dp.process_packet(frame, now, Direction::from_device, LimiterMode::window);
        if (v.action != VerdictAction::pass) {
          drops.fetch_add(1);
          continue;
        }
      }
      ::sendto(server.fd(), buf.data(), static_cast<std::size_t>(n), 0,
               reinterpret_cast<sockaddr*>(&peer), plen);
    }
  });

  std::vector<char> payload(config.payload, 'x');
  std::vector<char> reply(65536);
  const sockaddr_in to = loopback(server_port);
  std::vector<double> base, fw;
  base.reserve(config.round_trips / 2 + config.block);
  fw.reserve(config.round_trips / 2 + config.block);

  // Warm-up round trips are not recorded.
  auto round_trip = [&]() -> double {
    const auto t0 = Clock::now();
    ::sendto(client.fd(), payload.data(), payload.size(), 0,
             reinterpret_cast<const sockaddr*>(&to), sizeof to);
    const auto n = ::recv(client.fd(), reply.data(), reply.size(), 0);
    const auto t1 = Clock::now();
    return n > 0 ? elapsed_ns(t0, t1) : -1;
  };
  for (int i = 0; i < 200; ++i) round_trip();

  bool with_fw = false;
  std::size_t done = 0;
  while (done < config.round_trips) {
    filtering.store(with_fw);
    for (std::size_t i = 0; i < config.block && done < config.round_trips; ++i, ++done) {
      const double rtt = round_trip();
      if (rtt < 0) continue;
      (with_fw ? fw : base).push_back(rtt);
    }
    with_fw = !with_fw;
  }
  stop.store(true);
  // Unblock the echo thread.
  ::sendto(client.fd(), payload.data(), 1, 0, reinterpret_cast<const sockaddr*>(&to), sizeof to);
  echo.join();

  EchoResult r;
  r.baseline = summarize(std::move(base));
  r.firewall = summarize(std::move(fw));
  r.firewall_drops = drops.load();
  return r;
}

}  // namespace mudguard
