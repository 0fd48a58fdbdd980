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

#ifndef MUDGUARD_MUDGUARD_H_
#define MUDGUARD_MUDGUARD_H_

/* C interface to the mudguard library. Objects are opaque handles created
 * by mg_*_create / mg_*_load / mg_*_parse and released by the matching
 * mg_*_free. Every fallible call returns an mg_status; on failure a message
 * is available from mg_last_error() on the same thread. Strings returned
 * through char** out-parameters are owned by the caller and released with
 * mg_string_free(). */

#include <stddef.h>
#include <stdint.h>

#if defined(MUDGUARD_BUILDING)
#define MG_API __attribute__((visibility("default")))
#else
#define MG_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mg_status {
  MG_OK = 0,
  MG_ERR_INVALID_ARGUMENT = 1,
  MG_ERR_PARSE = 2,
  MG_ERR_VALIDATION = 3,
  MG_ERR_RATE_GRAMMAR = 4,
  MG_ERR_COMPILE = 5,
  MG_ERR_TABLE_FULL = 6,
  MG_ERR_NOT_FOUND = 7,
  MG_ERR_IO = 8,
  MG_ERR_FETCH = 9,
  MG_ERR_TIMEOUT = 10,
  MG_ERR_TRACE = 11,
  MG_ERR_LEARN = 12,
  MG_ERR_INTERNAL = 13
} mg_status;

typedef enum mg_direction { MG_FROM_DEVICE = 0, MG_TO_DEVICE = 1 } mg_direction;
typedef enum mg_mode { MG_MODE_WINDOW = 0, MG_MODE_BUCKET = 1 } mg_mode;
typedef enum mg_action { MG_PASS = 0, MG_DROP = 1, MG_ABORT = 2 } mg_action;
typedef enum mg_reason {
  MG_REASON_ALLOWED = 0,
  MG_REASON_NO_RULE = 1,
  MG_REASON_PKT_RATE_EXCEEDED = 2,
  MG_REASON_BYTE_RATE_EXCEEDED = 3,
  MG_REASON_MALFORMED = 4
} mg_reason;

typedef struct mg_verdict {
  mg_action action;
  mg_reason reason;
} mg_verdict;

typedef struct mg_mud mg_mud;
typedef struct mg_device_ctx mg_device_ctx;
typedef struct mg_policy mg_policy;
typedef struct mg_datapath mg_datapath;
typedef struct mg_report mg_report;
typedef struct mg_manager mg_manager;
typedef struct mg_fixture_server mg_fixture_server;

MG_API const char* mg_version(void);
MG_API const char* mg_status_name(mg_status status);
/* Message for the last failed call on this thread; "" after a success. */
MG_API const char* mg_last_error(void);
MG_API void mg_string_free(char* s);

/* ---- MUD documents ---- */
MG_API mg_status mg_mud_parse(const char* text, size_t len, mg_mud** out);
MG_API mg_status mg_mud_load(const char* path, mg_mud** out);
MG_API void mg_mud_free(mg_mud* mud);
/* Normalized, indented JSON. */
MG_API mg_status mg_mud_serialize(const mg_mud* mud, char** out);
/* Human-readable listing of ACLs, ACEs and rate fields. */
MG_API mg_status mg_mud_summary(const mg_mud* mud, char** out);
MG_API mg_status mg_mud_counts(const mg_mud* mud, size_t* acls, size_t* aces);

/* Parses "<n>[kb|mb]/<period>". */
MG_API mg_status mg_rate_parse(const char* text, uint64_t* count, uint64_t* period_seconds);

/* ---- Compilation ---- */
MG_API mg_status mg_device_ctx_parse(const char* text, size_t len, mg_device_ctx** out);
MG_API mg_status mg_device_ctx_load(const char* path, mg_device_ctx** out);
MG_API void mg_device_ctx_free(mg_device_ctx* ctx);

/* window_ns of 0 selects the default 60 s window. */
MG_API mg_status mg_compile(const mg_mud* mud, const mg_device_ctx* ctx, int64_t window_ns,
                            mg_policy** out);
MG_API void mg_policy_free(mg_policy* policy);
MG_API size_t mg_policy_rule_count(const mg_policy* policy);
/* Allow rules plus default-drop records. */
MG_API size_t mg_policy_count(const mg_policy* policy);
MG_API mg_status mg_policy_to_json(const mg_policy* policy, char** out);

/* ---- Datapath ---- */
/* capacity 0 and burst 0 select the defaults. */
MG_API mg_status mg_datapath_create(size_t capacity, uint32_t burst, mg_datapath** out);
MG_API void mg_datapath_free(mg_datapath* dp);
MG_API mg_status mg_datapath_install(mg_datapath* dp, const mg_policy* policy);
MG_API mg_status mg_datapath_remove(mg_datapath* dp, const mg_policy* policy);
MG_API size_t mg_datapath_size(const mg_datapath* dp);
MG_API mg_status mg_datapath_process(mg_datapath* dp, const uint8_t* frame, size_t len,
                                     int64_t timestamp_ns, mg_direction direction,
                                     mg_mode mode, mg_verdict* out);

/* ---- Benchmarks ---- */
/* Table text of insert/delete/datapath timings; json_out (optional)
 * receives the same statistics as JSON. */
MG_API mg_status mg_bench_run(size_t rules, size_t datapath_packets, mg_mode mode,
                              char** table_out, char** json_out);
/* Loopback UDP echo with and without the datapath; JSON result. */
MG_API mg_status mg_echo_run(size_t round_trips, size_t rules, char** json_out);

/* ---- Learner ---- */
typedef struct mg_learn_options {
  const char* trace_path;      /* .csv or pcap */
  const char* categories_path; /* {"device_id": "category"} */
  const char* devices_path;    /* pcap only: {"address": "device_id"}; may be NULL */
  int64_t window_ns;           /* 0 selects 60 s */
  int direction;               /* 0 all, 1 outgoing, 2 incoming */
  const char* policy;          /* "peaks", "averages", or NULL for none */
  uint64_t round_packets;      /* 0 selects 10 */
  uint64_t round_bytes;        /* 0 selects 1000 */
} mg_learn_options;

/* JSON: {"table": csv-text, "categories": {...}, "limits": {...}}. */
MG_API mg_status mg_learn_run(const mg_learn_options* options, char** json_out);

/* ---- Replay ---- */
typedef struct mg_replay_options {
  const char* trace_path;
  const char* mud_path;
  const char* device_ctx_path;
  const char* remap_path; /* may be NULL */
  mg_mode mode;
  mg_direction direction;
  int64_t report_window_ns; /* 0 selects 60 s */
  uint32_t burst;           /* 0 selects 5 */
  size_t capacity;          /* 0 selects 4096 */
  int parallel;
} mg_replay_options;

MG_API mg_status mg_replay_run(const mg_replay_options* options, mg_report** out);
MG_API void mg_report_free(mg_report* report);
MG_API mg_status mg_report_to_json(const mg_report* report, char** out);
MG_API mg_status mg_report_to_csv(const mg_report* report, char** out);
/* format: "csv" or "json". */
MG_API mg_status mg_report_write(const mg_report* report, const char* path, const char* format);
MG_API mg_status mg_report_totals(const mg_report* report, uint64_t* total_packets,
                                  uint64_t* passed_packets, uint64_t* dropped_packets,
                                  uint64_t* aborted_packets);
/* Largest per-window passed packet count. */
MG_API uint64_t mg_report_max_window_passed(const mg_report* report);

/* ---- Manager ---- */
typedef struct mg_manager_options {
  const char* dns_path;  /* may be NULL */
  const char* file_base; /* base for relative file:// URLs; may be NULL */
  uint32_t timeout_ms;   /* 0 selects 10000 */
  size_t capacity;       /* 0 selects 4096 */
  uint32_t burst;        /* 0 selects 5 */
  int64_t window_ns;     /* 0 selects 60 s */
} mg_manager_options;

MG_API mg_status mg_manager_create(const mg_manager_options* options, mg_manager** out);
MG_API void mg_manager_free(mg_manager* manager);
/* Parses a JSON list of events and applies those from index `skip` on, in
 * order. outcomes_out receives a JSON list with one outcome per applied
 * event. total (optional) receives the list length. failures (optional)
 * receives the number of applied events that failed for reasons other than
 * a leave of an unknown device, and first_failure (optional) the status of
 * the first such event (MG_OK if none). */
MG_API mg_status mg_manager_apply_events(mg_manager* manager, const char* events_json,
                                         size_t len, size_t skip, char** outcomes_out,
                                         size_t* total, size_t* failures,
                                         mg_status* first_failure);
MG_API size_t mg_manager_rule_count(const mg_manager* manager);
MG_API size_t mg_manager_device_count(const mg_manager* manager);
MG_API mg_status mg_manager_state_json(const mg_manager* manager, char** out);

/* ---- Fetching and the fixture server ---- */
MG_API mg_status mg_fetch_url(const char* url, uint32_t timeout_ms, char** out, size_t* len);
/* port 0 picks a free port; the bound port is stored in *bound_port. */
MG_API mg_status mg_fixture_server_start(const char* dir, const char* host, int port,
                                         mg_fixture_server** out, int* bound_port);
MG_API void mg_fixture_server_stop(mg_fixture_server* server);
MG_API uint64_t mg_fixture_server_requests(const mg_fixture_server* server);

/* ---- Synthetic traces ---- */
/* kind: "flood" or "appliance". params_json (may be NULL) overrides
 * generator fields by name. Writes CSV, or pcap when path does not end in
 * .csv. */
MG_API mg_status mg_generate_trace(const char* kind, const char* params_json,
                                   const char* out_path, size_t* records);

#ifdef __cplusplus
}
#endif

#endif /* MUDGUARD_MUDGUARD_H_ */
