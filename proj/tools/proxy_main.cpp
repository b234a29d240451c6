// Copyright MeshGuard Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "meshguard/proxy.hpp"

namespace {

std::atomic<bool> g_stop{false};

void handle_signal(int) { g_stop = true; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"verifying proxy-side filter"};
  std::string bundle_file;
  std::string control_plane_addr;
  std::string status_addr = "127.0.0.1:0";
  std::string node_id = "proxy-" + std::to_string(::getpid());
  bool pass_through = false;
  bool quiet = false;
  app.add_option("--bundle", bundle_file, "trust bundle file")->required();
  app.add_option("--control-plane", control_plane_addr, "control plane host:port")->required();
  app.add_option("--status", status_addr, "status endpoint host:port (port 0 = pick free)");
  app.add_option("--node-id", node_id, "node identifier sent in discovery requests");
  app.add_flag("--pass-through", pass_through,
               "disable signature verification (testing only)");
  app.add_flag("--quiet", quiet, "suppress log output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::signal(SIGTERM, handle_signal);
  std::signal(SIGINT, handle_signal);
  std::signal(SIGPIPE, SIG_IGN);

  try {
    meshguard::HostPort control_plane = meshguard::parse_hostport(control_plane_addr);
    meshguard::HostPort status = meshguard::parse_hostport(status_addr);
    meshguard::ProxyRunner::Options options;
    options.bundle_file = bundle_file;
    options.control_plane_host = control_plane.host;
    options.control_plane_port = control_plane.port;
    options.status_host = status.host;
    options.status_port = status.port;
    options.node_id = node_id;
    options.pass_through = pass_through;
    options.quiet = quiet;
    meshguard::ProxyRunner runner(options);
    runner.start();
    std::printf("READY status=%s:%u node=%s\n", status.host.c_str(), runner.status_port(),
                node_id.c_str());
    std::fflush(stdout);
    while (!g_stop) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    runner.stop();
  } catch (const meshguard::Error& ex) {
    std::cerr << ex.what() << "\n";
    return 2;
  }
  return 0;
}
