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

#include "mudguard/fixture_server.hpp"

#include <filesystem>

#include "httplib.h"
#include "mudguard/error.hpp"

namespace mudguard {

struct FixtureServer::Impl {
  httplib::Server server;
  std::string root;
};

FixtureServer::FixtureServer(std::string root_dir) : impl_(std::make_unique<Impl>()) {
  if (!std::filesystem::is_directory(root_dir)) {
    throw Error(ErrorKind::io, "not a directory: " + root_dir);
  }
  impl_->root = std::move(root_dir);
  auto& srv = impl_->server;
  srv.set_file_extension_and_mimetype_mapping("json", "application/json");
  if (!srv.set_mount_point("/", impl_->root)) {
    throw Error(ErrorKind::io, "cannot serve " + impl_->root);
  }
  // Counted before the response goes out, so a client never sees a reply
  // that is not yet counted.
  srv.set_pre_routing_handler([this](const httplib::Request&, httplib::Response&) {
    ++requests_;
    return httplib::Server::HandlerResponse::Unhandled;
  });
}

FixtureServer::~FixtureServer() { stop(); }

int FixtureServer::start(const std::string& host, int port) {
  auto& srv = impl_->server;
  const int bound = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
  if (bound <= 0) {
    throw Error(ErrorKind::io, "cannot bind " + host + ":" + std::to_string(port));
  }
  port_ = bound;
  thread_ = std::thread([&srv] { srv.listen_after_bind(); });
  srv.wait_until_ready();
  return port_;
}

void FixtureServer::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

bool FixtureServer::running() const noexcept { return impl_->server.is_running(); }

}  // namespace mudguard
