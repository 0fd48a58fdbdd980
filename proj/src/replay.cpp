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

#include "mudguard/replay.hpp"

#include <algorithm>
#include <set>
#include <thread>

#include "json.hpp"
#include "mudguard/error.hpp"

namespace mudguard {

using Json = nlohmann::ordered_json;

void AddressRemap::validate() const {
  std::set<IpAddress> targets;
  for (const auto& [from, to] : mapping) {
    if (from.family() != to.family()) {
      throw Error(ErrorKind::validation, "remap " + from.to_string() + " -> " +
                                             to.to_string() + " changes address family");
    }
    if (!targets.insert(to).second) {
      throw Error(ErrorKind::validation, "remap is not injective: " + to.to_string() +
                                             " is the target of several addresses");
    }
  }
}

AddressRemap AddressRemap::inverse() const {
  AddressRemap inv;
  inv.fallback = fallback;
  for (const auto& [from, to] : mapping) inv.mapping.emplace(to, from);
  return inv;
}

AddressRemap parse_remap(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text.begin(), json_text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse, e.what(), e.byte);
  }
  if (!j.is_object()) throw Error(ErrorKind::validation, "remap must be a JSON object");
  AddressRemap remap;
  if (auto it = j.find("map"); it != j.end()) {
    if (!it->is_object()) throw Error(ErrorKind::validation, "remap 'map' must be an object");
    for (auto e = it->begin(); e != it->end(); ++e) {
      if (!e.value().is_string()) {
        throw Error(ErrorKind::validation, "remap target for '" + e.key() + "' must be a string");
      }
      remap.mapping.emplace(parse_address_or_throw(e.key()),
                            parse_address_or_throw(e.value().get<std::string>()));
    }
  }
  if (auto it = j.find("default"); it != j.end()) {
    if (*it == "keep") {
      remap.fallback = AddressRemap::Fallback::keep;
    } else if (*it == "drop-record") {
      remap.fallback = AddressRemap::Fallback::drop_record;
    } else {
      throw Error(ErrorKind::validation, "remap default must be 'keep' or 'drop-record'");
    }
  }
  remap.validate();
  return remap;
}

std::vector<TraceFrame> rewrite(std::vector<TraceFrame> stream, const AddressRemap& remap) {
  remap.validate();
  std::vector<TraceFrame> out;
  out.reserve(stream.size());
  for (auto& f : stream) {
    const auto pkt = parse_headers(f.bytes, f.timestamp, f.length());
    if (!pkt) {
      out.push_back(std::move(f));
      continue;
    }
    std::optional<IpAddress> src, dst;
    if (auto it = remap.mapping.find(pkt->src); it != remap.mapping.end()) src = it->second;
    if (auto it = remap.mapping.find(pkt->dst); it != remap.mapping.end()) dst = it->second;
    if (!src && !dst) {
      if (remap.fallback == AddressRemap::Fallback::keep) out.push_back(std::move(f));
      continue;
    }
    rewrite_addresses(f.bytes, src, dst);
    out.push_back(std::move(f));
  }
  return out;
}

namespace {

void run_shard(std::span<const TraceFrame* const> frames, std::span<const FlowRule* const> rules,
               const ReplayOptions& options, Nanoseconds origin, ReplayReport& report) {
  Datapath dp(options.datapath);
  for (const auto* r : rules) dp.insert_rule(*r);
  const auto window = options.report_window;
  for (const TraceFrame* f : frames) {
    const std::uint32_t len = f->length();
    report.total_packets += 1;
    report.total_bytes += len;
    const Verdict v = dp.process_packet(f->bytes, f->timestamp, options.direction,
                                        options.mode, f->wire_length);
    if (v.action == VerdictAction::abort) {
      report.aborted_packets += 1;
      report.aborted_bytes += len;
      report.drop_reason_histogram[to_string(v.reason)] += 1;
      continue;
    }
    const auto offset = f->timestamp - origin;
    const auto index = static_cast<std::size_t>(offset.count() < 0 ? 0 : offset / window);
    if (report.per_window_series.size() <= index) {
      const auto old = report.per_window_series.size();
      report.per_window_series.resize(index + 1);
      for (auto i = old; i <= index; ++i) {
        report.per_window_series[i].window_start = origin + static_cast<std::int64_t>(i) * window;
      }
    }
    WindowSample& w = report.per_window_series[index];
    if (v.action == VerdictAction::pass) {
      report.passed_packets += 1;
      report.passed_bytes += len;
      w.passed_pkts += 1;
      w.passed_bytes += len;
    } else {
      report.dropped_packets += 1;
      report.dropped_bytes += len;
      w.dropped_pkts += 1;
      w.dropped_bytes += len;
      report.drop_reason_histogram[to_string(v.reason)] += 1;
    }
  }
}

void merge_into(ReplayReport& into, const ReplayReport& part) {
  into.total_packets += part.total_packets;
  into.total_bytes += part.total_bytes;
  into.passed_packets += part.passed_packets;
  into.passed_bytes += part.passed_bytes;
  into.dropped_packets += part.dropped_packets;
  into.dropped_bytes += part.dropped_bytes;
  into.aborted_packets += part.aborted_packets;
  into.aborted_bytes += part.aborted_bytes;
  for (const auto& [reason, n] : part.drop_reason_histogram) into.drop_reason_histogram[reason] += n;
  if (into.per_window_series.size() < part.per_window_series.size()) {
    const auto old = into.per_window_series.size();
    into.per_window_series.resize(part.per_window_series.size());
    for (auto i = old; i < into.per_window_series.size(); ++i) {
      into.per_window_series[i].window_start = part.per_window_series[i].window_start;
    }
  }
  for (std::size_t i = 0; i < part.per_window_series.size(); ++i) {
    auto& w = into.per_window_series[i];
    const auto& p = part.per_window_series[i];
    w.passed_pkts += p.passed_pkts;
    w.dropped_pkts += p.dropped_pkts;
    w.passed_bytes += p.passed_bytes;
    w.dropped_bytes += p.dropped_bytes;
  }
}

// The device side of a frame for the replay direction.
std::optional<IpAddress> device_of(const TraceFrame& f, Direction dir) {
  const auto pkt = parse_headers(f.bytes, f.timestamp, f.length());
  if (!pkt) return std::nullopt;
  return dir == Direction::from_device ? pkt->src : pkt->dst;
}

const IpAddress& device_of(const FlowRule& r) {
  return r.key.direction == Direction::from_device ? r.key.src : r.key.dst;
}

}  // namespace

ReplayReport replay(std::span<const TraceFrame> stream, std::span<const FlowRule> rules,
                    const ReplayOptions& options) {
  if (options.report_window.count() <= 0) {
    throw Error(ErrorKind::invalid_argument, "report window must be positive");
  }
  ReplayReport report;
  report.mode = to_string(options.mode);
  if (stream.empty()) return report;

  Nanoseconds origin = stream.front().timestamp;
  for (const auto& f : stream) origin = std::min(origin, f.timestamp);

  if (!options.parallel) {
    std::vector<const TraceFrame*> frames;
    frames.reserve(stream.size());
    for (const auto& f : stream) frames.push_back(&f);
    std::vector<const FlowRule*> rule_ptrs;
    for (const auto& r : rules) rule_ptrs.push_back(&r);
    run_shard(frames, rule_ptrs, options, origin, report);
    return report;
  }

  // One shard per device address; unparseable frames go to their own shard.
  std::map<std::optional<IpAddress>, std::vector<const TraceFrame*>> frame_shards;
  for (const auto& f : stream) frame_shards[device_of(f, options.direction)].push_back(&f);
  std::map<IpAddress, std::vector<const FlowRule*>> rule_shards;
  for (const auto& r : rules) {
    if (r.key.direction == options.direction) rule_shards[device_of(r)].push_back(&r);
  }

  std::vector<std::pair<const std::vector<const TraceFrame*>*, std::vector<const FlowRule*>>> work;
  for (const auto& [device, frames] : frame_shards) {
    std::vector<const FlowRule*> shard_rules;
    if (device) {
      if (auto it = rule_shards.find(*device); it != rule_shards.end()) shard_rules = it->second;
    }
    work.emplace_back(&frames, std::move(shard_rules));
  }

  std::vector<ReplayReport> parts(work.size());
  const std::size_t threads =
      std::max<std::size_t>(1, std::min<std::size_t>(work.size(), std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = t; i < work.size(); i += threads) {
        run_shard(*work[i].first, work[i].second, options, origin, parts[i]);
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& p : parts) merge_into(report, p);
  return report;
}

std::string report_to_csv(const ReplayReport& report) {
  std::string out = "window_start,passed_pkts,dropped_pkts,passed_bytes,dropped_bytes\n";
  for (const auto& w : report.per_window_series) {
    out += std::to_string(w.window_start.count()) + "," + std::to_string(w.passed_pkts) + "," +
           std::to_string(w.dropped_pkts) + "," + std::to_string(w.passed_bytes) + "," +
           std::to_string(w.dropped_bytes) + "\n";
  }
  return out;
}

std::string report_to_json(const ReplayReport& report, int indent) {
  Json windows = Json::array();
  for (const auto& w : report.per_window_series) {
    windows.push_back(Json{{"window_start", w.window_start.count()},
                           {"passed_pkts", w.passed_pkts},
                           {"dropped_pkts", w.dropped_pkts},
                           {"passed_bytes", w.passed_bytes},
                           {"dropped_bytes", w.dropped_bytes}});
  }
  Json reasons = Json::object();
  for (const auto& [k, v] : report.drop_reason_histogram) reasons[k] = v;
  Json j = Json::object();
  j["mode"] = report.mode;
  j["windows"] = windows;
  j["drop_reasons"] = reasons;
  j["totals"] = Json{{"total_packets", report.total_packets},
                     {"total_bytes", report.total_bytes},
                     {"passed_packets", report.passed_packets},
                     {"passed_bytes", report.passed_bytes},
                     {"dropped_packets", report.dropped_packets},
                     {"dropped_bytes", report.dropped_bytes},
                     {"aborted_packets", report.aborted_packets},
                     {"aborted_bytes", report.aborted_bytes},
                     {"packet_drop_rate", report.packet_drop_rate()},
                     {"byte_drop_rate", report.byte_drop_rate()}};
  return j.dump(indent);
}

ReplayReport report_from_json(std::string_view json_text) {
  Json j;
  try {
    j = Json::parse(json_text.begin(), json_text.end());
    ReplayReport r;
    r.mode = j.at("mode").get<std::string>();
    const auto& t = j.at("totals");
    r.total_packets = t.at("total_packets").get<std::uint64_t>();
    r.total_bytes = t.at("total_bytes").get<std::uint64_t>();
    r.passed_packets = t.at("passed_packets").get<std::uint64_t>();
    r.passed_bytes = t.at("passed_bytes").get<std::uint64_t>();
    r.dropped_packets = t.at("dropped_packets").get<std::uint64_t>();
    r.dropped_bytes = t.at("dropped_bytes").get<std::uint64_t>();
    r.aborted_packets = t.at("aborted_packets").get<std::uint64_t>();
    r.aborted_bytes = t.at("aborted_bytes").get<std::uint64_t>();
    for (auto it = j.at("drop_reasons").begin(); it != j.at("drop_reasons").end(); ++it) {
      r.drop_reason_histogram[it.key()] = it.value().get<std::uint64_t>();
    }
    for (const auto& w : j.at("windows")) {
      WindowSample s;
      s.window_start = Nanoseconds(w.at("window_start").get<std::int64_t>());
      s.passed_pkts = w.at("passed_pkts").get<std::uint64_t>();
      s.dropped_pkts = w.at("dropped_pkts").get<std::uint64_t>();
      s.passed_bytes = w.at("passed_bytes").get<std::uint64_t>();
      s.dropped_bytes = w.at("dropped_bytes").get<std::uint64_t>();
      r.per_window_series.push_back(s);
    }
    return r;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse, e.what(), e.byte);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::validation, std::string("report: ") + e.what());
  }
}

void emit_report(const ReplayReport& report, const std::string& path, ReportFormat format) {
  write_file(path, format == ReportFormat::csv ? report_to_csv(report) : report_to_json(report) + "\n");
}

}  // namespace mudguard
