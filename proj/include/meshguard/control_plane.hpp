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

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "meshguard/manifest.hpp"
#include "meshguard/wire.hpp"

namespace meshguard {

// The control plane is deliberately signature-blind: it stores whatever an
// administrator applies, forwards whatever envelopes are present, and never
// consults a verifiable configuration. All verification happens proxy-side.

/// Manifest store with a monotonic version counter. Every mutating admin
/// command bumps the counter by exactly one.
struct Store {
  std::map<std::pair<std::string, std::string>, Manifest> manifests;  // (kind, name)
  std::map<std::pair<ResourceType, std::string>, Tombstone> tombstones;
  std::int64_t version_counter = 0;
};

/// Stores the manifest (no verification by design) and bumps the version.
/// Throws Error(Errc::MalformedManifest) via manifest validation only.
std::int64_t apply_manifest(Store& store, Manifest manifest);

/// Removes a manifest; records the tombstone, when one is supplied, for
/// inclusion in every later push. Throws Error(Errc::NotFound) for unknown
/// (kind, name).
std::int64_t delete_manifest(Store& store, const std::string& kind, const std::string& name,
                             std::optional<Tombstone> tombstone);

/// Translates the full store into a state-of-the-world response. Manifests
/// that fail translation are skipped and reported through translation_errors
/// when given.
DiscoveryResponse build_response(const Store& store, std::string nonce,
                                 std::vector<std::string>* translation_errors = nullptr);

/// Random 16-hex-char push nonce.
std::string make_nonce();

/// Serves the discovery protocol on one listener and the admin protocol on
/// another. Admin commands: {"cmd": "apply", "manifest": {...}},
/// {"cmd": "delete", "kind", "name", "tombstone"?}, {"cmd": "status"}.
/// Mutations are serialized: each one is applied and pushed to every
/// connected proxy before the next is processed.
class ControlPlaneServer {
 public:
  struct Options {
    std::string xds_host = "127.0.0.1";
    std::uint16_t xds_port = 0;
    std::string admin_host = "127.0.0.1";
    std::uint16_t admin_port = 0;
    bool quiet = false;
  };

  explicit ControlPlaneServer(Options options);
  ~ControlPlaneServer();

  ControlPlaneServer(const ControlPlaneServer&) = delete;
  ControlPlaneServer& operator=(const ControlPlaneServer&) = delete;

  /// Binds both listeners and starts the accept threads.
  void start();
  void stop();

  std::uint16_t xds_port() const { return xds_port_; }
  std::uint16_t admin_port() const { return admin_port_; }

 private:
  struct ProxySession {
    int fd = -1;
    std::string node_id;
    bool closed = false;
  };
  struct NackRecord {
    std::string node_id;
    std::string version;
    std::string detail;
  };

  void accept_proxies();
  void accept_admin();
  void read_proxy_requests(std::shared_ptr<ProxySession> session);
  void serve_admin_connection(int fd);
  Document run_admin_command(const Document& command);
  void push_to_all_locked();
  void push_to_session_locked(ProxySession& session, const std::string& frame);
  void log(const std::string& line) const;

  Options options_;
  int xds_listen_fd_ = -1;
  int admin_listen_fd_ = -1;
  std::uint16_t xds_port_ = 0;
  std::uint16_t admin_port_ = 0;

  mutable std::mutex mutex_;  // guards store_, sessions_, nacks_
  Store store_;
  std::vector<std::shared_ptr<ProxySession>> sessions_;
  std::vector<NackRecord> nacks_;

  std::mutex threads_mutex_;
  std::vector<std::thread> threads_;
  bool stopping_ = false;
};

}  // namespace meshguard
