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

#include "meshguard/proxy.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <iostream>
#include <set>

#include <httplib.h>

#include "meshguard/encoding.hpp"
#include "meshguard/yaml_io.hpp"

namespace meshguard {

namespace {

constexpr std::size_t kRejectionLogCap = 10000;

std::string ref_string(ResourceType rtype, const std::string& name) {
  return std::string(to_string(rtype)) + "/" + name;
}

}  // namespace

TrustBundle trust_bundle_from_document(const Document& doc) {
  if (!doc.is_object()) {
    throw Error(Errc::MalformedBundle, "trust bundle must be a map");
  }
  TrustBundle bundle;
  const Document* key_hex = doc.find("owner_public_key");
  if (key_hex == nullptr || !key_hex->is_string()) {
    throw Error(Errc::MalformedBundle, "missing string field 'owner_public_key'");
  }
  std::vector<std::uint8_t> key_bytes;
  try {
    key_bytes = hex_decode(key_hex->as_string());
  } catch (const Error& ex) {
    throw Error(Errc::MalformedBundle, ex.what());
  }
  if (key_bytes.size() != 32) {
    throw Error(Errc::MalformedBundle, "owner_public_key must be 32 bytes of hex");
  }
  std::copy(key_bytes.begin(), key_bytes.end(), bundle.owner_public_key.begin());

  const Document* vc = doc.find("verifiable_config");
  if (vc == nullptr) {
    throw Error(Errc::MalformedBundle, "missing field 'verifiable_config'");
  }
  try {
    bundle.verifiable_config = verifiable_config_from_document(*vc);
  } catch (const Error& ex) {
    throw Error(Errc::MalformedBundle, ex.what());
  }

  if (derive_key_id(bundle.owner_public_key) != bundle.verifiable_config.owner_key_id) {
    throw Error(Errc::KeyIdMismatch,
                "bundle key id '" + bundle.verifiable_config.owner_key_id +
                    "' does not match the embedded public key");
  }
  bundle.bundle_digest = sha256(canonicalize(doc));
  return bundle;
}

Document trust_bundle_to_document(const TrustBundle& bundle) {
  return Document::object({
      {"owner_public_key", Document(hex_encode(bundle.owner_public_key))},
      {"verifiable_config", verifiable_config_to_document(bundle.verifiable_config)},
  });
}

TrustBundle bootstrap(const std::string& bundle_file) {
  Document doc;
  try {
    doc = load_document_file(bundle_file);
  } catch (const Error& ex) {
    throw Error(Errc::MalformedBundle, ex.what());
  }
  return trust_bundle_from_document(doc);
}

FilterDecision filter_response(const DiscoveryResponse& response, const TrustBundle& bundle,
                               const ProxyState& state) {
  FilterDecision decision;

  // Partition the pushed resources.
  std::set<std::pair<ResourceType, std::string>> present;
  for (const ResourceConfig& resource : response.resources) {
    present.insert({resource.rtype, resource.name});
    std::string failure;
    for (const FragmentCheck& check :
         check_resource_fragments(resource, bundle.verifiable_config, bundle.owner_public_key)) {
      if (!check.satisfied) {
        failure = check.failure;
        break;
      }
    }
    if (failure.empty()) {
      decision.accepted.push_back(resource);
    } else {
      decision.rejected.emplace_back(resource, failure);
    }
  }

  // Deletion authorizations carried by this push, keyed by resource,
  // keeping the highest verifying serial.
  std::map<std::pair<ResourceType, std::string>, std::int64_t> authorized;
  bool saw_invalid_tombstone = false;
  for (const Tombstone& tombstone : response.tombstones) {
    if (!verify_tombstone(tombstone, bundle.owner_public_key)) {
      saw_invalid_tombstone = true;
      continue;
    }
    auto key = std::make_pair(tombstone.rtype, tombstone.resource_name);
    auto it = authorized.find(key);
    if (it == authorized.end() || it->second < tombstone.serial) {
      authorized[key] = tombstone.serial;
    }
  }

  // A resource absent from a state-of-the-world push is a deletion request.
  // Non-confidential types delete freely; confidential ones only with an
  // owner tombstone at or above the pinned serial.
  for (const auto& [ref, applied] : state.applied) {
    if (present.contains(ref)) continue;
    if (!bundle.verifiable_config.targets(ref.first)) {
      decision.deletions_honored.push_back(DeletionRef{ref.first, ref.second, std::nullopt});
      continue;
    }
    auto pinned_it = state.pinned_serials.find(ref);
    std::int64_t pinned = pinned_it == state.pinned_serials.end() ? 0 : pinned_it->second;
    auto auth_it = authorized.find(ref);
    if (auth_it == authorized.end()) {
      decision.deletions_refused.emplace_back(
          DeletionRef{ref.first, ref.second, std::nullopt},
          saw_invalid_tombstone ? "no valid tombstone" : "no tombstone");
    } else if (auth_it->second < pinned) {
      decision.deletions_refused.emplace_back(
          DeletionRef{ref.first, ref.second, auth_it->second},
          "stale tombstone serial " + std::to_string(auth_it->second) + " < pinned " +
              std::to_string(pinned));
    } else {
      decision.deletions_honored.push_back(
          DeletionRef{ref.first, ref.second, auth_it->second});
    }
  }
  return decision;
}

DiscoveryRequest apply_decision(ProxyState& state, const FilterDecision& decision,
                                const std::string& version, const std::string& nonce,
                                const std::string& node_id) {
  for (const ResourceConfig& resource : decision.accepted) {
    state.applied.insert_or_assign({resource.rtype, resource.name}, resource);
  }
  for (const DeletionRef& deletion : decision.deletions_honored) {
    state.applied.erase({deletion.rtype, deletion.name});
    if (deletion.serial) {
      state.pinned_serials[{deletion.rtype, deletion.name}] = *deletion.serial;
    }
  }

  std::string error_detail;
  auto add_detail = [&error_detail](const std::string& item) {
    if (!error_detail.empty()) error_detail += "; ";
    error_detail += item;
  };
  for (const auto& [resource, reason] : decision.rejected) {
    state.rejection_log.push_back({version, resource.rtype, resource.name, reason});
    add_detail("rejected " + ref_string(resource.rtype, resource.name) + " (" + reason + ")");
  }
  for (const auto& [deletion, reason] : decision.deletions_refused) {
    state.rejection_log.push_back(
        {version, deletion.rtype, deletion.name, "DeletionRefused: " + reason});
    add_detail("refused deletion of " + ref_string(deletion.rtype, deletion.name) + " (" +
               reason + ")");
  }
  if (state.rejection_log.size() > kRejectionLogCap) {
    state.rejection_log.erase(state.rejection_log.begin(),
                              state.rejection_log.end() - kRejectionLogCap);
  }
  state.applied_version = version;

  DiscoveryRequest request;
  request.node_id = node_id;
  request.acked_version = version;
  request.nonce = nonce;
  request.error_detail = std::move(error_detail);
  return request;
}

std::vector<std::string> reverify_state(const ProxyState& state, const TrustBundle& bundle) {
  std::vector<std::string> failures;
  for (const auto& [ref, resource] : state.applied) {
    for (const FragmentCheck& check :
         check_resource_fragments(resource, bundle.verifiable_config, bundle.owner_public_key)) {
      if (!check.satisfied) {
        failures.push_back(ref_string(ref.first, ref.second) + " " + check.path + ": " +
                           check.failure);
      }
    }
  }
  return failures;
}

namespace {

// Everything-goes decision used by the pass-through mode: apply all pushed
// resources, honor every implied deletion.
FilterDecision passthrough_decision(const DiscoveryResponse& response, const ProxyState& state) {
  FilterDecision decision;
  std::set<std::pair<ResourceType, std::string>> present;
  for (const ResourceConfig& resource : response.resources) {
    present.insert({resource.rtype, resource.name});
    decision.accepted.push_back(resource);
  }
  for (const auto& [ref, applied] : state.applied) {
    if (!present.contains(ref)) {
      decision.deletions_honored.push_back(DeletionRef{ref.first, ref.second, std::nullopt});
    }
  }
  return decision;
}

}  // namespace

struct ProxyRunner::StatusServer {
  httplib::Server server;
  std::thread thread;
};

ProxyRunner::ProxyRunner(Options options) : options_(std::move(options)) {}

ProxyRunner::~ProxyRunner() { stop(); }

void ProxyRunner::start() {
  bundle_ = bootstrap(options_.bundle_file);
  log("trust bundle loaded, digest=" + hex_encode(bundle_.bundle_digest) +
      ", owner_key_id=" + bundle_.verifiable_config.owner_key_id);
  if (options_.pass_through) {
    log("WARNING: pass-through mode, signature verification disabled");
  }

  status_ = std::make_unique<StatusServer>();
  status_->server.Get("/state", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(canonicalize(state_document()), "application/json");
  });
  status_->server.Get("/rejections", [this](const httplib::Request&, httplib::Response& res) {
    res.set_content(canonicalize(rejections_document()), "application/json");
  });
  if (options_.status_port == 0) {
    int port = status_->server.bind_to_any_port(options_.status_host);
    if (port <= 0) {
      throw Error(Errc::SetupFailure, "cannot bind status endpoint");
    }
    status_port_ = static_cast<std::uint16_t>(port);
  } else {
    if (!status_->server.bind_to_port(options_.status_host, options_.status_port)) {
      throw Error(Errc::SetupFailure,
                  "cannot bind status endpoint on port " + std::to_string(options_.status_port));
    }
    status_port_ = options_.status_port;
  }
  status_->thread = std::thread([this] { status_->server.listen_after_bind(); });
  session_thread_ = std::thread([this] { session_loop(); });
  log("status endpoint on " + options_.status_host + ":" + std::to_string(status_port_));
}

void ProxyRunner::stop() {
  if (stopping_.exchange(true)) return;
  int fd = session_fd_.exchange(-1);
  if (fd >= 0) ::shutdown(fd, SHUT_RDWR);
  if (session_thread_.joinable()) session_thread_.join();
  if (status_) {
    status_->server.stop();
    if (status_->thread.joinable()) status_->thread.join();
  }
}

ProxyState ProxyRunner::snapshot_state() const {
  std::lock_guard lock(state_mutex_);
  return state_;
}

void ProxyRunner::session_loop() {
  auto backoff = std::chrono::milliseconds(100);
  constexpr auto kMaxBackoff = std::chrono::milliseconds(2000);
  while (!stopping_) {
    int fd = -1;
    try {
      fd = connect_tcp(options_.control_plane_host, options_.control_plane_port);
      session_fd_ = fd;
      backoff = std::chrono::milliseconds(100);
      log("connected to control plane");

      DiscoveryRequest hello;
      hello.node_id = options_.node_id;
      send_frame(fd, encode_message("request", hello.to_document()));

      while (!stopping_) {
        std::optional<std::string> frame = recv_frame(fd);
        if (!frame) break;
        auto [type, payload] = decode_message(*frame);
        if (type != "response") {
          log("ignoring unexpected message type '" + type + "'");
          continue;
        }
        DiscoveryResponse response = DiscoveryResponse::from_document(payload);
        // The session thread is the only state writer; the lock covers the
        // mutation so status reads stay consistent.
        FilterDecision decision = options_.pass_through
                                      ? passthrough_decision(response, state_)
                                      : filter_response(response, bundle_, state_);
        DiscoveryRequest ack;
        {
          std::lock_guard lock(state_mutex_);
          ack = apply_decision(state_, decision, response.version, response.nonce,
                               options_.node_id);
        }
        send_frame(fd, encode_message("request", ack.to_document()));
        log("version " + response.version + ": accepted " +
            std::to_string(decision.accepted.size()) + ", rejected " +
            std::to_string(decision.rejected.size()) + ", deletions honored " +
            std::to_string(decision.deletions_honored.size()) + ", refused " +
            std::to_string(decision.deletions_refused.size()));
      }
    } catch (const Error& ex) {
      if (!stopping_) log(std::string("session error: ") + ex.what());
    }
    int open_fd = session_fd_.exchange(-1);
    if (open_fd >= 0) ::close(open_fd);
    if (fd >= 0 && fd != open_fd) ::close(fd);  // stop() already shut it down
    if (stopping_) break;
    // Reconnect with capped backoff, shredded into short sleeps so stop()
    // stays responsive.
    auto remaining = backoff;
    while (!stopping_ && remaining.count() > 0) {
      auto chunk = std::min(remaining, std::chrono::milliseconds(50));
      std::this_thread::sleep_for(chunk);
      remaining -= chunk;
    }
    backoff = std::min(backoff * 2, kMaxBackoff);
  }
}

Document ProxyRunner::state_document() const {
  std::lock_guard lock(state_mutex_);
  Document::Array resources;
  for (const auto& [ref, resource] : state_.applied) {
    resources.push_back(resource.to_document());
  }
  Document::Array pinned;
  for (const auto& [ref, serial] : state_.pinned_serials) {
    pinned.push_back(Document::object({
        {"rtype", Document(to_string(ref.first))},
        {"name", Document(ref.second)},
        {"serial", Document(serial)},
    }));
  }
  return Document::object({
      {"node_id", Document(options_.node_id)},
      {"version", Document(state_.applied_version)},
      {"resources", Document(std::move(resources))},
      {"pinned", Document(std::move(pinned))},
  });
}

Document ProxyRunner::rejections_document() const {
  std::lock_guard lock(state_mutex_);
  Document::Array rejections;
  for (const RejectionRecord& record : state_.rejection_log) {
    rejections.push_back(Document::object({
        {"version", Document(record.version)},
        {"rtype", Document(to_string(record.rtype))},
        {"name", Document(record.name)},
        {"reason", Document(record.reason)},
    }));
  }
  return Document::object({{"rejections", Document(std::move(rejections))}});
}

void ProxyRunner::log(const std::string& line) const {
  if (options_.quiet) return;
  static std::mutex log_mutex;
  std::lock_guard lock(log_mutex);
  std::cerr << "[proxy " << options_.node_id << "] " << line << "\n";
}

}  // namespace meshguard
