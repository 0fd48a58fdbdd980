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

#include "mudguard/learner.hpp"

#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "json.hpp"
#include "mudguard/error.hpp"

namespace mudguard {

namespace {

struct Cursor {
  Nanoseconds start{0};
  Nanoseconds last{0};
  bool open = false;
};

void add(WindowStats& w, const TraceRecord& r) {
  switch (r.protocol) {
    case TraceProtocol::tcp:
      w.tcp_packets += 1;
      w.tcp_bytes += r.length;
      break;
    case TraceProtocol::udp:
      w.udp_packets += 1;
      w.udp_bytes += r.length;
      break;
    default:
      w.other_packets += 1;
      w.other_bytes += r.length;
      break;
  }
}

bool keep(const TraceRecord& r, DirectionFilter filter) {
  switch (filter) {
    case DirectionFilter::all: return true;
    case DirectionFilter::outgoing: return r.direction == TraceDirection::outgoing;
    case DirectionFilter::incoming: return r.direction == TraceDirection::incoming;
  }
  return true;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

DeviceWindows windowize(std::span<const TraceRecord> trace, Nanoseconds window,
                        DirectionFilter filter) {
  if (window.count() <= 0) {
    throw Error(ErrorKind::invalid_argument, "window must be positive");
  }
  DeviceWindows out;
  std::unordered_map<std::string, Cursor> cursors;
  for (const auto& r : trace) {
    if (!keep(r, filter)) continue;
    Cursor& c = cursors[r.device_id];
    auto& windows = out[r.device_id];
    if (!c.open) {
      c.open = true;
      c.start = r.timestamp;
      c.last = r.timestamp;
      windows.push_back(WindowStats{c.start, r.device_id});
    } else {
      if (r.timestamp < c.last) {
        throw Error(ErrorKind::trace, "trace not sorted by time for device '" +
                                          r.device_id + "'");
      }
      c.last = r.timestamp;
      if (r.timestamp >= c.start + window) {
        c.start += ((r.timestamp - c.start) / window) * window;
        windows.push_back(WindowStats{c.start, r.device_id});
      }
    }
    add(windows.back(), r);
  }
  return out;
}

std::map<std::string, CategoryStats> aggregate(
    const DeviceWindows& windows, const std::map<std::string, std::string>& category_map,
    Nanoseconds window) {
  struct Acc {
    std::size_t devices = 0;
    std::size_t windows = 0;
    double sum[4] = {};       // tcp pkts, udp pkts, tcp bytes, udp bytes
    double peak_sum[4] = {};  // same order, sum of per-device maxima
  };
  std::map<std::string, Acc> acc;
  for (const auto& [device, list] : windows) {
    if (list.empty()) continue;
    auto it = category_map.find(device);
    if (it == category_map.end()) {
      throw Error(ErrorKind::learn, "device '" + device + "' has no category");
    }
    Acc& a = acc[it->second];
    a.devices += 1;
    double peak[4] = {};
    for (const auto& w : list) {
      const double v[4] = {double(w.tcp_packets), double(w.udp_packets),
                           double(w.tcp_bytes), double(w.udp_bytes)};
      for (int i = 0; i < 4; ++i) {
        a.sum[i] += v[i];
        peak[i] = std::max(peak[i], v[i]);
      }
      a.windows += 1;
    }
    for (int i = 0; i < 4; ++i) a.peak_sum[i] += peak[i];
  }

  std::map<std::string, CategoryStats> out;
  for (const auto& [category, a] : acc) {
    CategoryStats s;
    s.category = category;
    s.devices = a.devices;
    s.active_windows = a.windows;
    s.window = window;
    const double nw = static_cast<double>(a.windows);
    const double nd = static_cast<double>(a.devices);
    s.tcp_avg_pkts = a.sum[0] / nw;
    s.udp_avg_pkts = a.sum[1] / nw;
    s.tcp_avg_bytes = a.sum[2] / nw;
    s.udp_avg_bytes = a.sum[3] / nw;
    s.tcp_peak_pkts = a.peak_sum[0] / nd;
    s.udp_peak_pkts = a.peak_sum[1] / nd;
    s.tcp_peak_bytes = a.peak_sum[2] / nd;
    s.udp_peak_bytes = a.peak_sum[3] / nd;
    out.emplace(category, s);
  }
  return out;
}

std::map<std::string, std::string> parse_category_map(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text.begin(), json_text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse, e.what(), e.byte);
  }
  if (!j.is_object()) throw Error(ErrorKind::validation, "category map must be a JSON object");
  std::map<std::string, std::string> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_string()) {
      throw Error(ErrorKind::validation, "category for '" + it.key() + "' must be a string");
    }
    out.emplace(it.key(), it.value().get<std::string>());
  }
  return out;
}

const char* to_string(ThresholdPolicy p) noexcept {
  return p == ThresholdPolicy::peaks ? "peaks" : "averages";
}

std::optional<ThresholdPolicy> parse_policy(std::string_view text) noexcept {
  if (text == "peaks") return ThresholdPolicy::peaks;
  if (text == "averages") return ThresholdPolicy::averages;
  return std::nullopt;
}

std::uint64_t round_up_to(double statistic, std::uint64_t round_to) {
  if (round_to == 0) throw Error(ErrorKind::invalid_argument, "granularity must be positive");
  if (!(statistic > 0)) {
    throw Error(ErrorKind::learn, "cannot derive a limit from a zero statistic");
  }
  const double steps = std::ceil(statistic / static_cast<double>(round_to));
  return static_cast<std::uint64_t>(steps) * round_to;
}

SuggestedLimits suggest_limits(const CategoryStats& stats, ThresholdPolicy policy,
                               const Granularity& granularity, LimitProtocol protocol) {
  const bool peaks = policy == ThresholdPolicy::peaks;
  const bool tcp = protocol == LimitProtocol::tcp;
  double pkts = tcp ? (peaks ? stats.tcp_peak_pkts : stats.tcp_avg_pkts)
                    : (peaks ? stats.udp_peak_pkts : stats.udp_avg_pkts);
  double bytes = tcp ? (peaks ? stats.tcp_peak_bytes : stats.tcp_avg_bytes)
                     : (peaks ? stats.udp_peak_bytes : stats.udp_avg_bytes);
  if (stats.window != std::chrono::minutes(1)) {
    const double scale = 60e9 / static_cast<double>(stats.window.count());
    pkts *= scale;
    bytes *= scale;
  }
  SuggestedLimits s;
  s.policy = policy;
  s.packet_limit = {round_up_to(pkts, granularity.packet_round_to), RatePeriod::minute};
  s.byte_limit = {round_up_to(bytes, granularity.byte_round_to), RatePeriod::minute};
  return s;
}

std::string format_category_table(const std::map<std::string, CategoryStats>& stats) {
  std::string out = "category,TCP,TCP Max,UDP,UDP Max\n";
  for (const auto& [name, s] : stats) {
    out += name + " (pkts)," + fmt(s.tcp_avg_pkts) + "," + fmt(s.tcp_peak_pkts) + "," +
           fmt(s.udp_avg_pkts) + "," + fmt(s.udp_peak_pkts) + "\n";
  }
  for (const auto& [name, s] : stats) {
    out += name + " (bytes)," + fmt(s.tcp_avg_bytes) + "," + fmt(s.tcp_peak_bytes) + "," +
           fmt(s.udp_avg_bytes) + "," + fmt(s.udp_peak_bytes) + "\n";
  }
  return out;
}

}  // namespace mudguard
