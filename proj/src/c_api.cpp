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

#include "mudguard/mudguard.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "json.hpp"
#include "mudguard/bench.hpp"
#include "mudguard/datapath.hpp"
#include "mudguard/error.hpp"
#include "mudguard/fixture_server.hpp"
#include "mudguard/generator.hpp"
#include "mudguard/learner.hpp"
#include "mudguard/manager.hpp"
#include "mudguard/mud_model.hpp"
#include "mudguard/replay.hpp"
#include "mudguard/rule_compiler.hpp"
#include "mudguard/trace.hpp"

using namespace mudguard;
using Json = nlohmann::ordered_json;

struct mg_mud {
  MudFile mud;
};
struct mg_device_ctx {
  DeviceContext ctx;
};
struct mg_policy {
  CompiledPolicy policy;
};
struct mg_datapath {
  explicit mg_datapath(DatapathConfig c) : dp(c) {}
  Datapath dp;
};
struct mg_report {
  ReplayReport report;
};
struct mg_manager {
  mg_manager(DatapathConfig c, std::map<std::string, std::vector<IpAddress>> dns, MudFetcher f,
             Nanoseconds window)
      : dp(c), manager(dp, std::move(dns), std::move(f), window) {}
  Datapath dp;
  Manager manager;
};
struct mg_fixture_server {
  explicit mg_fixture_server(std::string dir) : server(std::move(dir)) {}
  FixtureServer server;
};

namespace {

thread_local std::string g_last_error;

mg_status to_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return MG_ERR_INVALID_ARGUMENT;
    case ErrorKind::parse: return MG_ERR_PARSE;
    case ErrorKind::validation: return MG_ERR_VALIDATION;
    case ErrorKind::rate_grammar: return MG_ERR_RATE_GRAMMAR;
    case ErrorKind::compile: return MG_ERR_COMPILE;
    case ErrorKind::table_full: return MG_ERR_TABLE_FULL;
    case ErrorKind::not_found: return MG_ERR_NOT_FOUND;
    case ErrorKind::io: return MG_ERR_IO;
    case ErrorKind::fetch: return MG_ERR_FETCH;
    case ErrorKind::timeout: return MG_ERR_TIMEOUT;
    case ErrorKind::trace: return MG_ERR_TRACE;
    case ErrorKind::learn: return MG_ERR_LEARN;
  }
  return MG_ERR_INTERNAL;
}

template <class F>
mg_status guard(F&& f) noexcept {
  try {
    f();
    g_last_error.clear();
    return MG_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return MG_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MG_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return MG_ERR_INTERNAL;
  }
}

void require(bool cond, const char* what) {
  if (!cond) throw Error(ErrorKind::invalid_argument, what);
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p == nullptr) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size());
  p[s.size()] = '\0';
  return p;
}

Nanoseconds window_or_default(std::int64_t ns) {
  require(ns >= 0, "window must not be negative");
  return ns == 0 ? kDefaultWindow : Nanoseconds(ns);
}

DatapathConfig datapath_config(std::size_t capacity, std::uint32_t burst) {
  DatapathConfig c;
  if (capacity != 0) c.capacity = capacity;
  if (burst != 0) c.burst = burst;
  return c;
}

Json stats_json(const TimingStats& s) {
  return Json{{"samples", s.samples}, {"min", s.min},   {"median", s.median},
              {"avg", s.avg},         {"p90", s.p90},   {"p99", s.p99},
              {"max", s.max},         {"stddev", s.stddev}};
}

std::string ace_summary(const Ace& ace) {
  const auto& m = ace.matches;
  std::string line = std::string(to_string(ace.actions.forwarding));
  line += m.protocol ? std::string(" ") + to_string(*m.protocol) : std::string(" any");
  if (m.src_dns_name) line += " src-dnsname=" + *m.src_dns_name;
  if (m.dst_dns_name) line += " dst-dnsname=" + *m.dst_dns_name;
  if (m.src_address) line += " src=" + m.src_address->to_string();
  if (m.dst_address) line += " dst=" + m.dst_address->to_string();
  if (m.port) {
    line += m.port->role == PortRole::source ? " src-port=" : " dst-port=";
    line += std::to_string(m.port->port);
  }
  if (m.direction_initiated) line += std::string(" initiated=") + to_string(*m.direction_initiated);
  if (ace.actions.packet_rate) {
    line += " packet-rate=" + render_rate(*ace.actions.packet_rate, false);
  }
  if (ace.actions.byte_rate) line += " byte-rate=" + render_rate(*ace.actions.byte_rate, true);
  return line;
}

template <class T>
void set_if(const Json& j, const char* key, T& field) {
  if (auto it = j.find(key); it != j.end()) field = it->template get<T>();
}

void set_address(const Json& j, const char* key, IpAddress& field) {
  if (auto it = j.find(key); it != j.end()) field = parse_address_or_throw(it->get<std::string>());
}

void set_duration_s(const Json& j, const char* key, Nanoseconds& field) {
  if (auto it = j.find(key); it != j.end()) {
    field = Nanoseconds(static_cast<std::int64_t>(it->get<double>() * 1e9));
  }
}

}  // namespace

extern "C" {

const char* mg_version(void) { return "0.1.0"; }

const char* mg_status_name(mg_status status) {
  switch (status) {
    case MG_OK: return "ok";
    case MG_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case MG_ERR_PARSE: return "parse";
    case MG_ERR_VALIDATION: return "validation";
    case MG_ERR_RATE_GRAMMAR: return "rate-grammar";
    case MG_ERR_COMPILE: return "compile";
    case MG_ERR_TABLE_FULL: return "table-full";
    case MG_ERR_NOT_FOUND: return "not-found";
    case MG_ERR_IO: return "io";
    case MG_ERR_FETCH: return "fetch";
    case MG_ERR_TIMEOUT: return "timeout";
    case MG_ERR_TRACE: return "trace";
    case MG_ERR_LEARN: return "learn";
    case MG_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* mg_last_error(void) { return g_last_error.c_str(); }

void mg_string_free(char* s) { std::free(s); }

mg_status mg_mud_parse(const char* text, size_t len, mg_mud** out) {
  return guard([&] {
    require(text != nullptr && out != nullptr, "null argument");
    *out = new mg_mud{parse_mud_file(std::string_view(text, len))};
  });
}

mg_status mg_mud_load(const char* path, mg_mud** out) {
  return guard([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new mg_mud{parse_mud_file(read_file(path))};
  });
}

void mg_mud_free(mg_mud* mud) { delete mud; }

mg_status mg_mud_serialize(const mg_mud* mud, char** out) {
  return guard([&] {
    require(mud != nullptr && out != nullptr, "null argument");
    *out = dup_string(serialize_mud_file(mud->mud));
  });
}

mg_status mg_mud_summary(const mg_mud* mud, char** out) {
  return guard([&] {
    require(mud != nullptr && out != nullptr, "null argument");
    const MudFile& m = mud->mud;
    std::size_t aces = 0;
    for (const auto& acl : m.acls) aces += acl.aces.size();
    std::string s = "mud-url: " + m.mud_url + "\n";
    s += "mud-version: " + std::to_string(m.mud_version) + "\n";
    if (m.cache_validity) s += "cache-validity: " + std::to_string(*m.cache_validity) + "h\n";
    s += "acls: " + std::to_string(m.acls.size()) + ", aces: " + std::to_string(aces) + "\n";
    auto role = [&](const std::string& name) {
      std::string r;
      if (std::count(m.from_device_policy.begin(), m.from_device_policy.end(), name)) {
        r += " from-device";
      }
      if (std::count(m.to_device_policy.begin(), m.to_device_policy.end(), name)) {
        r += " to-device";
      }
      return r.empty() ? std::string(" unreferenced") : r;
    };
    for (const auto& acl : m.acls) {
      s += "acl " + acl.name + " (" + (acl.address_family == AddressFamily::ipv4 ? "ipv4" : "ipv6") +
           ")" + role(acl.name) + "\n";
      for (const auto& ace : acl.aces) s += "  ace " + ace.name + ": " + ace_summary(ace) + "\n";
    }
    *out = dup_string(s);
  });
}

mg_status mg_mud_counts(const mg_mud* mud, size_t* acls, size_t* aces) {
  return guard([&] {
    require(mud != nullptr, "null argument");
    std::size_t n = 0;
    for (const auto& acl : mud->mud.acls) n += acl.aces.size();
    if (acls) *acls = mud->mud.acls.size();
    if (aces) *aces = n;
  });
}

mg_status mg_rate_parse(const char* text, uint64_t* count, uint64_t* period_secs) {
  return guard([&] {
    require(text != nullptr, "null argument");
    const RateLimit r = parse_rate(text);
    if (count) *count = r.count;
    if (period_secs) *period_secs = period_seconds(r.period);
  });
}

mg_status mg_device_ctx_parse(const char* text, size_t len, mg_device_ctx** out) {
  return guard([&] {
    require(text != nullptr && out != nullptr, "null argument");
    *out = new mg_device_ctx{parse_device_context(std::string_view(text, len))};
  });
}

mg_status mg_device_ctx_load(const char* path, mg_device_ctx** out) {
  return guard([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new mg_device_ctx{load_device_context(path)};
  });
}

void mg_device_ctx_free(mg_device_ctx* ctx) { delete ctx; }

mg_status mg_compile(const mg_mud* mud, const mg_device_ctx* ctx, int64_t window_ns,
                     mg_policy** out) {
  return guard([&] {
    require(mud != nullptr && ctx != nullptr && out != nullptr, "null argument");
    *out = new mg_policy{compile(mud->mud, ctx->ctx, window_or_default(window_ns))};
  });
}

void mg_policy_free(mg_policy* policy) { delete policy; }

size_t mg_policy_rule_count(const mg_policy* policy) {
  return policy ? policy->policy.rules.size() : 0;
}

size_t mg_policy_count(const mg_policy* policy) {
  return policy ? policy->policy.policy_count() : 0;
}

mg_status mg_policy_to_json(const mg_policy* policy, char** out) {
  return guard([&] {
    require(policy != nullptr && out != nullptr, "null argument");
    *out = dup_string(rules_to_json(policy->policy));
  });
}

mg_status mg_datapath_create(size_t capacity, uint32_t burst, mg_datapath** out) {
  return guard([&] {
    require(out != nullptr, "null argument");
    *out = new mg_datapath(datapath_config(capacity, burst));
  });
}

void mg_datapath_free(mg_datapath* dp) { delete dp; }

mg_status mg_datapath_install(mg_datapath* dp, const mg_policy* policy) {
  return guard([&] {
    require(dp != nullptr && policy != nullptr, "null argument");
    const auto& rules = policy->policy.rules;
    std::size_t done = 0;
    try {
      for (; done < rules.size(); ++done) dp->dp.insert_rule(rules[done]);
    } catch (...) {
      for (std::size_t i = 0; i < done; ++i) dp->dp.delete_rule(rules[i].key);
      throw;
    }
  });
}

mg_status mg_datapath_remove(mg_datapath* dp, const mg_policy* policy) {
  return guard([&] {
    require(dp != nullptr && policy != nullptr, "null argument");
    for (const auto& r : policy->policy.rules) dp->dp.delete_rule(r.key);
  });
}

size_t mg_datapath_size(const mg_datapath* dp) { return dp ? dp->dp.size() : 0; }

mg_status mg_datapath_process(mg_datapath* dp, const uint8_t* frame, size_t len,
                              int64_t timestamp_ns, mg_direction direction, mg_mode mode,
                              mg_verdict* out) {
  return guard([&] {
    require(dp != nullptr && out != nullptr && (frame != nullptr || len == 0), "null argument");
    const Verdict v = dp->dp.process_packet(
        std::span<const std::uint8_t>(frame, len), Nanoseconds(timestamp_ns),
        direction == MG_TO_DEVICE ? Direction::to_device : Direction::from_device,
        mode == MG_MODE_BUCKET ? LimiterMode::bucket : LimiterMode::window);
    out->action = static_cast<mg_action>(v.action);
    out->reason = static_cast<mg_reason>(v.reason);
  });
}

mg_status mg_bench_run(size_t rules, size_t datapath_packets, mg_mode mode, char** table_out,
                       char** json_out) {
  return guard([&] {
    require(rules > 0, "rules must be positive");
    BenchConfig cfg;
    cfg.rules = rules;
    if (datapath_packets != 0) cfg.datapath_packets = datapath_packets;
    cfg.mode = mode == MG_MODE_BUCKET ? LimiterMode::bucket : LimiterMode::window;
    const BenchResult r = run_bench(cfg);
    if (table_out) *table_out = dup_string(format_bench_table(r));
    if (json_out) {
      Json j{{"rules", rules},
             {"insert", stats_json(r.insert)},
             {"delete", stats_json(r.remove)},
             {"datapath", stats_json(r.datapath)},
             {"table_size_after_insert", r.table_size_after_insert},
             {"table_size_after_delete", r.table_size_after_delete}};
      *json_out = dup_string(j.dump(2));
    }
  });
}

mg_status mg_echo_run(size_t round_trips, size_t rules, char** json_out) {
  return guard([&] {
    require(json_out != nullptr, "null argument");
    EchoConfig cfg;
    if (round_trips != 0) cfg.round_trips = round_trips;
    cfg.rules = rules;
    const EchoResult r = run_echo_latency(cfg);
    Json j{{"baseline", stats_json(r.baseline)},
           {"firewall", stats_json(r.firewall)},
           {"firewall_drops", r.firewall_drops},
           {"median_change", r.median_change()}};
    *json_out = dup_string(j.dump(2));
  });
}

mg_status mg_learn_run(const mg_learn_options* o, char** json_out) {
  return guard([&] {
    require(o != nullptr && o->trace_path != nullptr && o->categories_path != nullptr &&
                json_out != nullptr,
            "null argument");
    require(o->direction >= 0 && o->direction <= 2, "bad direction filter");
    const Nanoseconds window = window_or_default(o->window_ns);
    const auto categories = parse_category_map(read_file(o->categories_path));

    std::vector<TraceRecord> records;
    if (guess_trace_format(o->trace_path) == TraceFormat::csv) {
      records = load_trace_csv(o->trace_path);
    } else {
      require(o->devices_path != nullptr, "a pcap trace needs a device address map");
      const Json dev = Json::parse(read_file(o->devices_path));
      std::map<IpAddress, std::string> devices;
      for (auto it = dev.begin(); it != dev.end(); ++it) {
        devices.emplace(parse_address_or_throw(it.key()), it.value().get<std::string>());
      }
      records = records_from_frames(load_trace(o->trace_path, TraceFormat::pcap), devices);
    }
    std::stable_sort(records.begin(), records.end(),
                     [](const TraceRecord& a, const TraceRecord& b) { return a.timestamp < b.timestamp; });

    const auto windows =
        windowize(records, window, static_cast<DirectionFilter>(o->direction));
    const auto stats = aggregate(windows, categories, window);

    Json cats = Json::object();
    for (const auto& [name, s] : stats) {
      cats[name] = Json{{"devices", s.devices},
                        {"active_windows", s.active_windows},
                        {"tcp_avg_pkts", s.tcp_avg_pkts},
                        {"tcp_peak_pkts", s.tcp_peak_pkts},
                        {"udp_avg_pkts", s.udp_avg_pkts},
                        {"udp_peak_pkts", s.udp_peak_pkts},
                        {"tcp_avg_bytes", s.tcp_avg_bytes},
                        {"tcp_peak_bytes", s.tcp_peak_bytes},
                        {"udp_avg_bytes", s.udp_avg_bytes},
                        {"udp_peak_bytes", s.udp_peak_bytes}};
    }
    Json j{{"records", records.size()}, {"table", format_category_table(stats)}, {"categories", cats}};
    if (o->policy != nullptr) {
      const auto policy = parse_policy(o->policy);
      require(policy.has_value(), "policy must be 'peaks' or 'averages'");
      Granularity g;
      if (o->round_packets != 0) g.packet_round_to = o->round_packets;
      if (o->round_bytes != 0) g.byte_round_to = o->round_bytes;
      Json limits = Json::object();
      for (const auto& [name, s] : stats) {
        const auto l = suggest_limits(s, *policy, g);
        limits[name] = Json{{"policy", to_string(*policy)},
                            {"packet-rate", render_rate(l.packet_limit, false)},
                            {"byte-rate", render_rate(l.byte_limit, true)}};
      }
      j["limits"] = limits;
    }
    *json_out = dup_string(j.dump(2));
  });
}

mg_status mg_replay_run(const mg_replay_options* o, mg_report** out) {
  return guard([&] {
    require(o != nullptr && o->trace_path != nullptr && o->mud_path != nullptr &&
                o->device_ctx_path != nullptr && out != nullptr,
            "null argument");
    const MudFile mud = parse_mud_file(read_file(o->mud_path));
    const DeviceContext ctx = load_device_context(o->device_ctx_path);
    const CompiledPolicy policy = compile(mud, ctx);
    auto frames = load_trace(o->trace_path, guess_trace_format(o->trace_path));
    if (o->remap_path != nullptr) {
      frames = rewrite(std::move(frames), parse_remap(read_file(o->remap_path)));
    }
    ReplayOptions ro;
    ro.mode = o->mode == MG_MODE_BUCKET ? LimiterMode::bucket : LimiterMode::window;
    ro.direction = o->direction == MG_TO_DEVICE ? Direction::to_device : Direction::from_device;
    ro.report_window = window_or_default(o->report_window_ns);
    ro.datapath = datapath_config(o->capacity, o->burst);
    ro.parallel = o->parallel != 0;
    *out = new mg_report{replay(frames, policy.rules, ro)};
  });
}

void mg_report_free(mg_report* report) { delete report; }

mg_status mg_report_to_json(const mg_report* report, char** out) {
  return guard([&] {
    require(report != nullptr && out != nullptr, "null argument");
    *out = dup_string(report_to_json(report->report));
  });
}

mg_status mg_report_to_csv(const mg_report* report, char** out) {
  return guard([&] {
    require(report != nullptr && out != nullptr, "null argument");
    *out = dup_string(report_to_csv(report->report));
  });
}

mg_status mg_report_write(const mg_report* report, const char* path, const char* format) {
  return guard([&] {
    require(report != nullptr && path != nullptr && format != nullptr, "null argument");
    const std::string f = format;
    require(f == "csv" || f == "json", "report format must be 'csv' or 'json'");
    emit_report(report->report, path, f == "csv" ? ReportFormat::csv : ReportFormat::json);
  });
}

mg_status mg_report_totals(const mg_report* report, uint64_t* total, uint64_t* passed,
                           uint64_t* dropped, uint64_t* aborted) {
  return guard([&] {
    require(report != nullptr, "null argument");
    const auto& r = report->report;
    if (total) *total = r.total_packets;
    if (passed) *passed = r.passed_packets;
    if (dropped) *dropped = r.dropped_packets;
    if (aborted) *aborted = r.aborted_packets;
  });
}

uint64_t mg_report_max_window_passed(const mg_report* report) {
  if (report == nullptr) return 0;
  std::uint64_t m = 0;
  for (const auto& w : report->report.per_window_series) m = std::max(m, w.passed_pkts);
  return m;
}

mg_status mg_manager_create(const mg_manager_options* o, mg_manager** out) {
  return guard([&] {
    require(o != nullptr && out != nullptr, "null argument");
    std::map<std::string, std::vector<IpAddress>> dns;
    if (o->dns_path != nullptr) dns = parse_dns_map(read_file(o->dns_path));
    const auto timeout = o->timeout_ms == 0 ? kDefaultFetchTimeout
                                            : std::chrono::milliseconds(o->timeout_ms);
    MudFetcher fetcher(steady_now, timeout, o->file_base ? o->file_base : "");
    *out = new mg_manager(datapath_config(o->capacity, o->burst), std::move(dns),
                          std::move(fetcher), window_or_default(o->window_ns));
  });
}

void mg_manager_free(mg_manager* manager) { delete manager; }

mg_status mg_manager_apply_events(mg_manager* m, const char* events_json, size_t len, size_t skip,
                                  char** outcomes_out, size_t* total, size_t* failures,
                                  mg_status* first_failure) {
  return guard([&] {
    require(m != nullptr && events_json != nullptr, "null argument");
    const auto events = parse_events(std::string_view(events_json, len));
    std::string outcomes = "[";
    std::size_t failed = 0;
    mg_status first = MG_OK;
    for (std::size_t i = skip; i < events.size(); ++i) {
      const EventOutcome o = m->manager.on_device_event(events[i]);
      if (!o.ok && o.error != ErrorKind::not_found) {
        if (failed++ == 0) first = o.error ? to_status(*o.error) : MG_ERR_INTERNAL;
      }
      if (i != skip) outcomes += ",";
      outcomes += outcome_to_json(o);
    }
    outcomes += "]";
    if (outcomes_out) *outcomes_out = dup_string(outcomes);
    if (total) *total = events.size();
    if (failures) *failures = failed;
    if (first_failure) *first_failure = first;
  });
}

size_t mg_manager_rule_count(const mg_manager* m) {
  return m ? m->manager.installed_rule_count() : 0;
}

size_t mg_manager_device_count(const mg_manager* m) {
  return m ? m->manager.installed().size() : 0;
}

mg_status mg_manager_state_json(const mg_manager* m, char** out) {
  return guard([&] {
    require(m != nullptr && out != nullptr, "null argument");
    Json devices = Json::object();
    for (const auto& [id, dev] : m->manager.installed()) {
      Json addrs = Json::array();
      for (const auto& a : dev.addresses) addrs.push_back(a.to_string());
      Json keys = Json::array();
      for (const auto& r : dev.rules) keys.push_back(r.key.to_string());
      devices[id] = Json{{"mud_url", dev.mud_url},
                         {"addresses", addrs},
                         {"policies", dev.policies},
                         {"rules", keys}};
    }
    Json j{{"devices", devices}, {"datapath_rules", m->dp.size()}};
    *out = dup_string(j.dump(2));
  });
}

mg_status mg_fetch_url(const char* url, uint32_t timeout_ms, char** out, size_t* len) {
  return guard([&] {
    require(url != nullptr && out != nullptr, "null argument");
    const std::string body = fetch_url(
        url, timeout_ms == 0 ? kDefaultFetchTimeout : std::chrono::milliseconds(timeout_ms));
    *out = dup_string(body);
    if (len) *len = body.size();
  });
}

mg_status mg_fixture_server_start(const char* dir, const char* host, int port,
                                  mg_fixture_server** out, int* bound_port) {
  return guard([&] {
    require(dir != nullptr && out != nullptr, "null argument");
    auto server = std::make_unique<mg_fixture_server>(dir);
    const int p = server->server.start(host ? host : "127.0.0.1", port);
    if (bound_port) *bound_port = p;
    *out = server.release();
  });
}

void mg_fixture_server_stop(mg_fixture_server* server) { delete server; }

uint64_t mg_fixture_server_requests(const mg_fixture_server* server) {
  return server ? server->server.request_count() : 0;
}

mg_status mg_generate_trace(const char* kind, const char* params_json, const char* out_path,
                            size_t* records) {
  return guard([&] {
    require(kind != nullptr && out_path != nullptr, "null argument");
    Json p = Json::object();
    if (params_json != nullptr && *params_json != '\0') {
      try {
        p = Json::parse(params_json);
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::parse, e.what(), e.byte);
      }
    }
    std::vector<TraceRecord> out;
    try {
      if (std::string_view(kind) == "flood") {
        SynFloodConfig c;
        set_if(p, "device_id", c.device_id);
        set_address(p, "device", c.device);
        set_address(p, "target", c.target);
        set_if(p, "dst_port", c.dst_port);
        set_if(p, "packets_per_second", c.packets_per_second);
        set_duration_s(p, "duration_s", c.duration);
        set_duration_s(p, "start_s", c.start);
        set_if(p, "length", c.length);
        out = generate_syn_flood(c);
      } else if (std::string_view(kind) == "appliance") {
        ApplianceTraceConfig c;
        set_if(p, "device_id", c.device_id);
        set_address(p, "device", c.device);
        set_address(p, "server", c.server);
        set_if(p, "server_port", c.server_port);
        set_if(p, "minutes", c.minutes);
        set_if(p, "idle_probability", c.idle_probability);
        set_if(p, "busy_probability", c.busy_probability);
        set_if(p, "normal_min_packets", c.normal_min_packets);
        set_if(p, "normal_max_packets", c.normal_max_packets);
        set_if(p, "busy_min_packets", c.busy_min_packets);
        set_if(p, "busy_max_packets", c.busy_max_packets);
        set_if(p, "min_length", c.min_length);
        set_if(p, "max_length", c.max_length);
        set_if(p, "seed", c.seed);
        out = generate_appliance_trace(c);
      } else {
        throw Error(ErrorKind::invalid_argument, "trace kind must be 'flood' or 'appliance'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::invalid_argument, std::string("generator parameters: ") + e.what());
    }
    if (guess_trace_format(out_path) == TraceFormat::csv) {
      write_file(out_path, format_trace_csv(out));
    } else {
      write_file(out_path, format_pcap(synthesize_frames(out)));
    }
    if (records) *records = out.size();
  });
}

}  // extern "C"
