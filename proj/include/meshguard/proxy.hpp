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

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "meshguard/crypto.hpp"
#include "meshguard/selector.hpp"
#include "meshguard/verification.hpp"
#include "meshguard/wire.hpp"

namespace meshguard {

/// Everything a proxy trusts, loaded once at bootup: the owner public key
/// and the verifiable configuration. The bundle digest is logged at load as
/// the stand-in for attesting the filter's inputs during a measured boot.
struct TrustBundle {
  PublicKey owner_public_key{};
  VerifiableConfiguration verifiable_config;
  Digest bundle_digest{};
};

/// Parses and checks a trust bundle file: {owner_public_key: hex,
/// verifiable_config: {...}}. Throws Error(Errc::MalformedBundle) or
/// Error(Errc::KeyIdMismatch).
TrustBundle bootstrap(const std::string& bundle_file);
TrustBundle trust_bundle_from_document(const Document& doc);
Document trust_bundle_to_document(const TrustBundle& bundle);

struct RejectionRecord {
  std::string version;
  ResourceType rtype = ResourceType::RouteConfiguration;
  std::string name;
  std::string reason;
};

/// The proxy's applied configuration. Invariant: every applied resource
/// satisfies every fragment match under the trust bundle (re-checkable via
/// reverify_state).
struct ProxyState {
  std::map<std::pair<ResourceType, std::string>, ResourceConfig> applied;
  std::string applied_version;
  std::map<std::pair<ResourceType, std::string>, std::int64_t> pinned_serials;
  std::vector<RejectionRecord> rejection_log;
};

struct DeletionRef {
  ResourceType rtype = ResourceType::RouteConfiguration;
  std::string name;
  /// Serial of the tombstone that authorized the deletion; unset for
  /// non-confidential resources, which delete freely.
  std::optional<std::int64_t> serial;
};

/// Outcome of filtering one push: a strict partition of the response's
/// resources into accepted and rejected, plus the deletions implied by
/// resources that vanished from the state of the world.
struct FilterDecision {
  std::vector<ResourceConfig> accepted;
  std::vector<std::pair<ResourceConfig, std::string>> rejected;  // with reason
  std::vector<DeletionRef> deletions_honored;
  std::vector<std::pair<DeletionRef, std::string>> deletions_refused;  // with reason
};

/// The message filter: accepts non-confidential resources untouched,
/// requires an accepted envelope per matched fragment otherwise, and honors
/// deletions of confidential resources only with an owner tombstone whose
/// serial is at least the pinned one. Pure function of its arguments.
FilterDecision filter_response(const DiscoveryResponse& response, const TrustBundle& bundle,
                               const ProxyState& state);

/// Folds a decision into the state and builds the ACK. The ACK always names
/// the pushed version; error_detail lists rejected resources and refused
/// deletions when there are any (partial accept).
DiscoveryRequest apply_decision(ProxyState& state, const FilterDecision& decision,
                                const std::string& version, const std::string& nonce,
                                const std::string& node_id);

/// Re-verifies the entire applied state against the bundle; returns the
/// (rtype, name, failure) triples of any confidential fragment that no
/// longer verifies. Empty result = safety invariant holds.
std::vector<std::string> reverify_state(const ProxyState& state, const TrustBundle& bundle);

/// Long-running proxy: connects to the control plane (reconnecting with
/// backoff), filters every push, ACKs, and serves GET /state and
/// /rejections over HTTP for inspection.
class ProxyRunner {
 public:
  struct Options {
    std::string bundle_file;
    std::string control_plane_host = "127.0.0.1";
    std::uint16_t control_plane_port = 0;
    std::string status_host = "127.0.0.1";
    std::uint16_t status_port = 0;
    std::string node_id = "proxy";
    bool pass_through = false;  // testing knob: disables all verification
    bool quiet = false;
  };

  explicit ProxyRunner(Options options);
  ~ProxyRunner();

  ProxyRunner(const ProxyRunner&) = delete;
  ProxyRunner& operator=(const ProxyRunner&) = delete;

  /// Bootstraps the bundle, binds the status endpoint, and starts the
  /// session thread. Throws on bundle errors; connection errors are retried
  /// forever instead.
  void start();
  void stop();

  std::uint16_t status_port() const { return status_port_; }
  ProxyState snapshot_state() const;

 private:
  void session_loop();
  void handle_stream(int fd);
  Document state_document() const;
  Document rejections_document() const;
  void log(const std::string& line) const;

  Options options_;
  TrustBundle bundle_;
  mutable std::mutex state_mutex_;
  ProxyState state_;
  std::atomic<bool> stopping_{false};
  std::atomic<int> session_fd_{-1};
  std::uint16_t status_port_ = 0;
  std::thread session_thread_;
  struct StatusServer;
  std::unique_ptr<StatusServer> status_;
};

}  // namespace meshguard
