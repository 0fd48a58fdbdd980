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

// mudctl: command-line front end over the mudguard C API.
//
// Exit status: 0 on success, 2 for usage errors, 10 + mg_status for domain
// errors (e.g. 12 parse, 13 validation, 15 compile, 19 fetch, 20 timeout).

#include <signal.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "mudguard/mudguard.h"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitDomainBase = 10;

// Owns a string returned by the C API.
struct CString {
  char* p = nullptr;
  ~CString() { mg_string_free(p); }
  char** out() { return &p; }
  std::string str() const { return p ? std::string(p) : std::string(); }
};

struct Failure {
  mg_status status;
};

void check(mg_status st, const std::string& context) {
  if (st == MG_OK) return;
  std::cerr << "mudctl: " << context << ": " << mg_status_name(st) << ": " << mg_last_error()
            << "\n";
  throw Failure{st};
}

std::int64_t seconds_to_ns(double s) { return static_cast<std::int64_t>(s * 1e9); }

std::string read_input(const std::string& path) {
  std::ostringstream ss;
  if (path == "-") {
    ss << std::cin.rdbuf();
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      std::cerr << "mudctl: cannot read " << path << "\n";
      throw Failure{MG_ERR_IO};
    }
    ss << in.rdbuf();
  }
  return ss.str();
}

mg_mode to_mode(const std::string& m) { return m == "bucket" ? MG_MODE_BUCKET : MG_MODE_WINDOW; }

mg_direction to_direction(const std::string& d) {
  return d == "to-device" ? MG_TO_DEVICE : MG_FROM_DEVICE;
}

struct ParseArgs {
  std::string file;
  bool pretty = false;
};

int run_parse(const ParseArgs& a) {
  mg_mud* mud = nullptr;
  check(mg_mud_load(a.file.c_str(), &mud), a.file);
  CString summary;
  const mg_status st = mg_mud_summary(mud, summary.out());
  CString doc;
  const mg_status st2 = a.pretty ? mg_mud_serialize(mud, doc.out()) : MG_OK;
  mg_mud_free(mud);
  check(st, "summary");
  check(st2, "serialize");
  std::cout << summary.str();
  if (a.pretty) std::cout << doc.str() << "\n";
  return 0;
}

struct CompileArgs {
  std::string file;
  std::string device_ctx;
  double window_s = 60;
  std::string output;
};

int run_compile(const CompileArgs& a) {
  mg_mud* mud = nullptr;
  check(mg_mud_load(a.file.c_str(), &mud), a.file);
  mg_device_ctx* ctx = nullptr;
  mg_status st = mg_device_ctx_load(a.device_ctx.c_str(), &ctx);
  if (st != MG_OK) mg_mud_free(mud);
  check(st, a.device_ctx);
  mg_policy* policy = nullptr;
  st = mg_compile(mud, ctx, seconds_to_ns(a.window_s), &policy);
  mg_mud_free(mud);
  mg_device_ctx_free(ctx);
  check(st, "compile");
  CString json;
  st = mg_policy_to_json(policy, json.out());
  mg_policy_free(policy);
  check(st, "render rules");
  if (a.output.empty()) {
    std::cout << json.str() << "\n";
  } else {
    std::ofstream out(a.output, std::ios::binary);
    out << json.str() << "\n";
    if (!out) {
      std::cerr << "mudctl: cannot write " << a.output << "\n";
      throw Failure{MG_ERR_IO};
    }
  }
  return 0;
}

struct LearnArgs {
  std::string trace;
  std::string categories;
  std::string devices;
  double window_s = 60;
  std::string direction = "outgoing";
  std::string policy;
  std::uint64_t round_pkts = 0;
  std::uint64_t round_bytes = 0;
  bool json = false;
};

int run_learn(const LearnArgs& a) {
  mg_learn_options o{};
  o.trace_path = a.trace.c_str();
  o.categories_path = a.categories.c_str();
  o.devices_path = a.devices.empty() ? nullptr : a.devices.c_str();
  o.window_ns = seconds_to_ns(a.window_s);
  o.direction = a.direction == "all" ? 0 : a.direction == "outgoing" ? 1 : 2;
  o.policy = a.policy.empty() ? nullptr : a.policy.c_str();
  o.round_packets = a.round_pkts;
  o.round_bytes = a.round_bytes;
  CString out;
  check(mg_learn_run(&o, out.out()), "learn");
  if (a.json) {
    std::cout << out.str() << "\n";
    return 0;
  }
  const auto j = nlohmann::json::parse(out.str());
  std::cout << j["table"].get<std::string>();
  if (j.contains("limits")) {
    for (const auto& [name, l] : j["limits"].items()) {
      std::cout << name << " " << l["policy"].get<std::string>()
                << ": packet-rate " << l["packet-rate"].get<std::string>() << ", byte-rate "
                << l["byte-rate"].get<std::string>() << "\n";
    }
  }
  return 0;
}

struct ReplayArgs {
  std::string trace;
  std::string mud;
  std::string device_ctx;
  std::string mode = "window";
  std::string direction = "from-device";
  std::string remap;
  std::string report;
  std::string format;
  double report_window_s = 60;
  std::uint32_t burst = 0;
  std::size_t capacity = 0;
  bool parallel = false;
};

int run_replay(const ReplayArgs& a) {
  mg_replay_options o{};
  o.trace_path = a.trace.c_str();
  o.mud_path = a.mud.c_str();
  o.device_ctx_path = a.device_ctx.c_str();
  o.remap_path = a.remap.empty() ? nullptr : a.remap.c_str();
  o.mode = to_mode(a.mode);
  o.direction = to_direction(a.direction);
  o.report_window_ns = seconds_to_ns(a.report_window_s);
  o.burst = a.burst;
  o.capacity = a.capacity;
  o.parallel = a.parallel ? 1 : 0;
  mg_report* report = nullptr;
  check(mg_replay_run(&o, &report), "replay");
  mg_status st = MG_OK;
  if (!a.report.empty()) {
    std::string format = a.format;
    if (format.empty()) format = a.report.ends_with(".csv") ? "csv" : "json";
    st = mg_report_write(report, a.report.c_str(), format.c_str());
  }
  std::uint64_t total = 0, passed = 0, dropped = 0, aborted = 0;
  mg_report_totals(report, &total, &passed, &dropped, &aborted);
  const std::uint64_t max_window = mg_report_max_window_passed(report);
  mg_report_free(report);
  check(st, a.report);
  std::cout << "mode: " << a.mode << "\n"
            << "packets: " << total << "\n"
            << "passed: " << passed << "\n"
            << "dropped: " << dropped << "\n"
            << "aborted: " << aborted << "\n";
  std::printf("packet drop rate: %.4f%%\n", total ? 100.0 * double(dropped) / double(total) : 0.0);
  std::cout << "max passed per window: " << max_window << "\n";
  return 0;
}

struct BenchArgs {
  std::size_t rules = 255;
  std::size_t packets = 10000;
  std::string mode = "window";
  std::size_t echo = 0;
  bool json = false;
};

int run_bench(const BenchArgs& a) {
  CString table, json;
  check(mg_bench_run(a.rules, a.packets, to_mode(a.mode), table.out(), json.out()), "bench");
  std::cout << (a.json ? json.str() + "\n" : table.str());
  if (a.echo > 0) {
    CString echo;
    check(mg_echo_run(a.echo, a.rules, echo.out()), "echo");
    std::cout << echo.str() << "\n";
  }
  return 0;
}

struct ServeArgs {
  std::string dir;
  std::string host = "127.0.0.1";
  int port = 8080;
};

int run_serve(const ServeArgs& a) {
  // Block the signals before the server thread starts so only sigwait sees them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  mg_fixture_server* server = nullptr;
  int port = 0;
  check(mg_fixture_server_start(a.dir.c_str(), a.host.c_str(), a.port, &server, &port),
        "serve-fixtures");
  std::cout << "serving " << a.dir << " on http://" << a.host << ":" << port << "/" << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  std::cout << "served " << mg_fixture_server_requests(server) << " requests" << std::endl;
  mg_fixture_server_stop(server);
  return 0;
}

struct ManageArgs {
  std::string events;
  std::string dns;
  std::string file_base;
  std::uint32_t timeout_ms = 0;
  std::size_t capacity = 0;
  double poll_s = 0;
  std::size_t polls = 0;
  bool state = false;
};

int run_manage(const ManageArgs& a) {
  mg_manager_options o{};
  o.dns_path = a.dns.empty() ? nullptr : a.dns.c_str();
  o.file_base = a.file_base.empty() ? nullptr : a.file_base.c_str();
  o.timeout_ms = a.timeout_ms;
  o.capacity = a.capacity;
  mg_manager* manager = nullptr;
  check(mg_manager_create(&o, &manager), "manager");

  std::size_t applied = 0;
  mg_status first_failure = MG_OK;
  auto apply = [&] {
    const std::string text = read_input(a.events);
    CString outcomes;
    std::size_t total = 0, failures = 0;
    mg_status first = MG_OK;
    const mg_status st = mg_manager_apply_events(manager, text.data(), text.size(), applied,
                                                 outcomes.out(), &total, &failures, &first);
    if (st != MG_OK) {
      mg_manager_free(manager);
      check(st, a.events);
    }
    for (const auto& o : nlohmann::json::parse(outcomes.str())) std::cout << o.dump() << "\n";
    if (first_failure == MG_OK) first_failure = first;
    applied = std::max(applied, total);
  };

  apply();
  for (std::size_t i = 0; a.poll_s > 0 && a.events != "-" && (a.polls == 0 || i < a.polls); ++i) {
    std::this_thread::sleep_for(std::chrono::duration<double>(a.poll_s));
    apply();
  }
  if (a.state) {
    CString state;
    mg_manager_state_json(manager, state.out());
    std::cout << state.str() << "\n";
  }
  std::cerr << "devices: " << mg_manager_device_count(manager)
            << ", rules installed: " << mg_manager_rule_count(manager) << "\n";
  mg_manager_free(manager);
  return first_failure == MG_OK ? 0 : kExitDomainBase + first_failure;
}

struct GenArgs {
  std::string kind;
  std::string out;
  std::string params;
};

int run_gen(const GenArgs& a) {
  std::size_t records = 0;
  check(mg_generate_trace(a.kind.c_str(), a.params.empty() ? nullptr : a.params.c_str(),
                          a.out.c_str(), &records),
        "gen-trace");
  std::cout << "wrote " << records << " records to " << a.out << "\n";
  return 0;
}

struct FetchArgs {
  std::string url;
  std::uint32_t timeout_ms = 0;
};

int run_fetch(const FetchArgs& a) {
  CString body;
  std::size_t len = 0;
  check(mg_fetch_url(a.url.c_str(), a.timeout_ms, body.out(), &len), a.url);
  std::cout.write(body.p, static_cast<std::streamsize>(len));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mudguard MUD manager and traffic enforcement tool", "mudctl"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mg_version()));

  const auto modes = CLI::IsMember({"window", "bucket"});
  const auto directions = CLI::IsMember({"from-device", "to-device"});
  std::function<int()> action;

  ParseArgs parse;
  auto* p = app.add_subcommand("parse", "Validate a MUD file and summarize its ACLs");
  p->add_option("file", parse.file, "MUD file")->required();
  p->add_flag("--pretty", parse.pretty, "Also print the normalized document");
  p->callback([&] { action = [&] { return run_parse(parse); }; });

  CompileArgs comp;
  auto* c = app.add_subcommand("compile", "Compile a MUD file into flow rules (JSON)");
  c->add_option("file", comp.file, "MUD file")->required();
  c->add_option("--device-ctx", comp.device_ctx, "Device context JSON")->required();
  c->add_option("--window", comp.window_s, "Enforcement window in seconds")
      ->check(CLI::PositiveNumber);
  c->add_option("-o,--output", comp.output, "Write rules here instead of stdout");
  c->callback([&] { action = [&] { return run_compile(comp); }; });

  LearnArgs learn;
  auto* l = app.add_subcommand("learn", "Profile a trace per device category");
  l->add_option("trace", learn.trace, "Trace (.csv or pcap)")->required();
  l->add_option("--categories", learn.categories, "device_id -> category JSON")->required();
  l->add_option("--devices", learn.devices, "address -> device_id JSON (pcap traces)");
  l->add_option("--window", learn.window_s, "Window in seconds")->check(CLI::PositiveNumber);
  l->add_option("--direction", learn.direction, "Traffic to profile")
      ->check(CLI::IsMember({"all", "outgoing", "incoming"}));
  auto* policy = l->add_option("--policy", learn.policy, "Suggest limits from peaks or averages")
                     ->check(CLI::IsMember({"peaks", "averages"}));
  l->add_option("--round-pkts", learn.round_pkts, "Packet limit granularity")
      ->needs(policy)
      ->check(CLI::PositiveNumber);
  l->add_option("--round-bytes", learn.round_bytes, "Byte limit granularity")
      ->needs(policy)
      ->check(CLI::PositiveNumber);
  l->add_flag("--json", learn.json, "Print the full JSON result");
  l->callback([&] { action = [&] { return run_learn(learn); }; });

  ReplayArgs rep;
  auto* r = app.add_subcommand("replay", "Replay a trace through the datapath");
  r->add_option("trace", rep.trace, "Trace (.csv or pcap)")->required();
  r->add_option("--mud", rep.mud, "MUD file")->required();
  r->add_option("--device-ctx", rep.device_ctx, "Device context JSON")->required();
  r->add_option("--mode", rep.mode, "Limiter")->check(modes);
  r->add_option("--direction", rep.direction, "Direction of the replayed frames")
      ->check(directions);
  r->add_option("--remap", rep.remap, "Address remap JSON");
  r->add_option("--report", rep.report, "Write the per-window report here");
  r->add_option("--format", rep.format, "Report format (default from extension)")
      ->check(CLI::IsMember({"csv", "json"}));
  r->add_option("--report-window", rep.report_window_s, "Report window in seconds")
      ->check(CLI::PositiveNumber);
  r->add_option("--burst", rep.burst, "Token bucket burst")->check(CLI::PositiveNumber);
  r->add_option("--capacity", rep.capacity, "Rule table capacity")->check(CLI::PositiveNumber);
  r->add_flag("--parallel", rep.parallel, "Replay devices on separate threads");
  r->callback([&] { action = [&] { return run_replay(rep); }; });

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Time rule insert/delete and packet processing");
  b->add_option("--rules", bench.rules, "Rules to insert")->check(CLI::PositiveNumber);
  b->add_option("--packets", bench.packets, "Datapath samples")->check(CLI::PositiveNumber);
  b->add_option("--mode", bench.mode, "Limiter")->check(modes);
  b->add_option("--echo", bench.echo, "Also run a loopback echo with this many round trips");
  b->add_flag("--json", bench.json, "Print JSON instead of the table");
  b->callback([&] { action = [&] { return run_bench(bench); }; });

  ServeArgs serve;
  auto* s = app.add_subcommand("serve-fixtures", "Serve a directory of MUD files over HTTP");
  s->add_option("dir", serve.dir, "Directory")->required()->check(CLI::ExistingDirectory);
  s->add_option("--port", serve.port, "Port (0 picks one)")->check(CLI::Range(0, 65535));
  s->add_option("--host", serve.host, "Bind address");
  s->callback([&] { action = [&] { return run_serve(serve); }; });

  ManageArgs manage;
  auto* m = app.add_subcommand("manage", "Apply device join/leave events");
  m->add_option("--events", manage.events, "Events JSON file, or - for stdin")->required();
  m->add_option("--dns", manage.dns, "Host name -> addresses JSON");
  m->add_option("--file-base", manage.file_base, "Base directory for relative file:// URLs");
  m->add_option("--timeout-ms", manage.timeout_ms, "Fetch timeout")->check(CLI::PositiveNumber);
  m->add_option("--capacity", manage.capacity, "Rule table capacity")->check(CLI::PositiveNumber);
  auto* poll = m->add_option("--poll", manage.poll_s, "Re-read the events file every N seconds")
                   ->check(CLI::PositiveNumber);
  m->add_option("--polls", manage.polls, "Stop after this many re-reads (0 = forever)")
      ->needs(poll);
  m->add_flag("--state", manage.state, "Print the final manager state");
  m->callback([&] { action = [&] { return run_manage(manage); }; });

  GenArgs gen;
  auto* g = app.add_subcommand("gen-trace", "Write a synthetic trace");
  g->add_option("kind", gen.kind, "flood or appliance")
      ->required()
      ->check(CLI::IsMember({"flood", "appliance"}));
  g->add_option("-o,--out", gen.out, "Output (.csv or pcap)")->required();
  g->add_option("--params", gen.params, "Generator fields as a JSON object");
  g->callback([&] { action = [&] { return run_gen(gen); }; });

  FetchArgs fetch;
  auto* f = app.add_subcommand("fetch", "Fetch a MUD URL and print the body");
  f->add_option("url", fetch.url, "http(s):// or file:// URL")->required();
  f->add_option("--timeout-ms", fetch.timeout_ms, "Timeout")->check(CLI::PositiveNumber);
  f->callback([&] { action = [&] { return run_fetch(fetch); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    return action();
  } catch (const Failure& f) {
    return kExitDomainBase + f.status;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "mudctl: malformed library output: " << e.what() << "\n";
    return kExitDomainBase + MG_ERR_INTERNAL;
  }
}
