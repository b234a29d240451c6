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

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "meshguard/control_plane.hpp"

namespace {

std::atomic<bool> g_stop{false};

void handle_signal(int) { g_stop = true; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"untrusted control-plane simulator"};
  std::string listen_addr = "127.0.0.1:15010";
  std::string admin_addr = "127.0.0.1:15000";
  bool quiet = false;
  app.add_option("--listen", listen_addr, "discovery listener host:port (port 0 = pick free)");
  app.add_option("--admin", admin_addr, "admin listener host:port");
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
    meshguard::HostPort xds = meshguard::parse_hostport(listen_addr);
    meshguard::HostPort admin = meshguard::parse_hostport(admin_addr);
    meshguard::ControlPlaneServer server(
        {xds.host, xds.port, admin.host, admin.port, quiet});
    server.start();
    std::printf("READY xds=%s:%u admin=%s:%u\n", xds.host.c_str(), server.xds_port(),
                admin.host.c_str(), server.admin_port());
    std::fflush(stdout);
    while (!g_stop) {
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    server.stop();
  } catch (const meshguard::Error& ex) {
    std::cerr << ex.what() << "\n";
    return 2;
  }
  return 0;
}
