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

// Plain-HTTP static file server for MUD fixtures. Files are served with
// their bytes unchanged; .json is sent as application/json.

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <thread>

namespace mudguard {

class FixtureServer {
 public:
  explicit FixtureServer(std::string root_dir);
  ~FixtureServer();
  FixtureServer(const FixtureServer&) = delete;
  FixtureServer& operator=(const FixtureServer&) = delete;

  // Binds and starts serving on a background thread. Port 0 picks a free
  // port. Returns the bound port; throws Error(io) on failure.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();

  int port() const noexcept { return port_; }
  std::uint64_t request_count() const noexcept { return requests_.load(); }
  bool running() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<std::uint64_t> requests_{0};
};

}  // namespace mudguard
