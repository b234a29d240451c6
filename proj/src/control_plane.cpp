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

#include "meshguard/control_plane.hpp"

#include <sys/socket.h>
#include <unistd.h>

#include <iostream>

#include <sodium.h>

namespace meshguard {

std::int64_t apply_manifest(Store& store, Manifest manifest) {
  std::pair<std::string, std::string> key{manifest.kind, manifest.name};
  store.manifests.insert_or_assign(std::move(key), std::move(manifest));
  return ++store.version_counter;
}

std::int64_t delete_manifest(Store& store, const std::string& kind, const std::string& name,
                             std::optional<Tombstone> tombstone) {
  auto it = store.manifests.find({kind, name});
  if (it == store.manifests.end()) {
    throw Error(Errc::NotFound, "no manifest " + kind + "/" + name);
  }
  store.manifests.erase(it);
  if (tombstone) {
    std::pair<ResourceType, std::string> key{tombstone->rtype, tombstone->resource_name};
    store.tombstones.insert_or_assign(std::move(key), std::move(*tombstone));
  }
  return ++store.version_counter;
}

DiscoveryResponse build_response(const Store& store, std::string nonce,
                                 std::vector<std::string>* translation_errors) {
  DiscoveryResponse response;
  response.version = std::to_string(store.version_counter);
  response.nonce = std::move(nonce);
  for (const auto& [key, manifest] : store.manifests) {
    try {
      for (ResourceConfig& resource : translate(manifest)) {
        response.resources.push_back(std::move(resource));
      }
    } catch (const Error& ex) {
      if (translation_errors != nullptr) {
        translation_errors->push_back(key.first + "/" + key.second + ": " + ex.what());
      }
    }
  }
  for (const auto& [key, tombstone] : store.tombstones) {
    response.tombstones.push_back(tombstone);
  }
  return response;
}

std::string make_nonce() {
  std::array<std::uint8_t, 8> raw{};
  randombytes_buf(raw.data(), raw.size());
  char hex[17];
  sodium_bin2hex(hex, sizeof(hex), raw.data(), raw.size());
  return std::string(hex, 16);
}

ControlPlaneServer::ControlPlaneServer(Options options) : options_(std::move(options)) {}

ControlPlaneServer::~ControlPlaneServer() { stop(); }

void ControlPlaneServer::start() {
  xds_listen_fd_ = listen_tcp(options_.xds_host, options_.xds_port);
  admin_listen_fd_ = listen_tcp(options_.admin_host, options_.admin_port);
  xds_port_ = local_port(xds_listen_fd_);
  admin_port_ = local_port(admin_listen_fd_);
  log("listening xds=" + options_.xds_host + ":" + std::to_string(xds_port_) +
      " admin=" + options_.admin_host + ":" + std::to_string(admin_port_));
  std::lock_guard lock(threads_mutex_);
  threads_.emplace_back([this] { accept_proxies(); });
  threads_.emplace_back([this] { accept_admin(); });
}

void ControlPlaneServer::stop() {
  {
    std::lock_guard lock(mutex_);
    if (stopping_) return;
    stopping_ = true;
    for (auto& session : sessions_) {
      if (!session->closed) {
        ::shutdown(session->fd, SHUT_RDWR);
      }
    }
  }
  if (xds_listen_fd_ >= 0) {
    ::shutdown(xds_listen_fd_, SHUT_RDWR);
    ::close(xds_listen_fd_);
  }
  if (admin_listen_fd_ >= 0) {
    ::shutdown(admin_listen_fd_, SHUT_RDWR);
    ::close(admin_listen_fd_);
  }
  // Accept threads may still be registering session threads; drain until
  // nothing new appears.
  while (true) {
    std::vector<std::thread> to_join;
    {
      std::lock_guard lock(threads_mutex_);
      to_join.swap(threads_);
    }
    if (to_join.empty()) break;
    for (std::thread& thread : to_join) {
      if (thread.joinable()) thread.join();
    }
  }
  std::lock_guard lock(mutex_);
  for (auto& session : sessions_) {
    if (!session->closed) {
      ::close(session->fd);
      session->closed = true;
    }
  }
  sessions_.clear();
}

void ControlPlaneServer::accept_proxies() {
  while (true) {
    int fd = ::accept(xds_listen_fd_, nullptr, nullptr);
    if (fd < 0) return;  // listener closed
    auto session = std::make_shared<ProxySession>();
    session->fd = fd;
    {
      std::lock_guard lock(mutex_);
      if (stopping_) {
        ::close(fd);
        return;
      }
      // The connecting proxy immediately gets the full state of the world.
      push_to_session_locked(*session, encode_message("response",
                                                      build_response(store_, make_nonce())
                                                          .to_document()));
      sessions_.push_back(session);
    }
    log("proxy connected");
    std::lock_guard lock(threads_mutex_);
    threads_.emplace_back([this, session] { read_proxy_requests(session); });
  }
}

void ControlPlaneServer::read_proxy_requests(std::shared_ptr<ProxySession> session) {
  try {
    while (true) {
      std::optional<std::string> frame = recv_frame(session->fd);
      if (!frame) break;
      auto [type, payload] = decode_message(*frame);
      if (type != "request") {
        log("ignoring unexpected message type '" + type + "'");
        continue;
      }
      DiscoveryRequest request = DiscoveryRequest::from_document(payload);
      std::lock_guard lock(mutex_);
      session->node_id = request.node_id;
      if (!request.error_detail.empty()) {
        // NACK policy: record and wait for the next admin mutation; the same
        // rejected version is never re-pushed on its own.
        nacks_.push_back({request.node_id, request.acked_version, request.error_detail});
        log("NACK from " + request.node_id + " at version " + request.acked_version + ": " +
            request.error_detail);
      } else {
        log("ACK from " + request.node_id + " version " + request.acked_version);
      }
    }
  } catch (const Error& ex) {
    log(std::string("proxy session error: ") + ex.what());
  }
  std::lock_guard lock(mutex_);
  if (!session->closed) {
    ::close(session->fd);
    session->closed = true;
  }
  std::erase(sessions_, session);
}

void ControlPlaneServer::accept_admin() {
  while (true) {
    int fd = ::accept(admin_listen_fd_, nullptr, nullptr);
    if (fd < 0) return;
    std::lock_guard lock(threads_mutex_);
    threads_.emplace_back([this, fd] { serve_admin_connection(fd); });
  }
}

void ControlPlaneServer::serve_admin_connection(int fd) {
  try {
    while (true) {
      std::optional<std::string> frame = recv_frame(fd);
      if (!frame) break;
      Document reply;
      try {
        reply = run_admin_command(parse_canonical(*frame));
      } catch (const Error& ex) {
        reply = Document::object({{"ok", Document(false)}, {"error", Document(ex.what())}});
      }
      send_frame(fd, canonicalize(reply));
    }
  } catch (const Error& ex) {
    log(std::string("admin session error: ") + ex.what());
  }
  ::close(fd);
}

Document ControlPlaneServer::run_admin_command(const Document& command) {
  const std::string& cmd = command.at("cmd").as_string();
  std::lock_guard lock(mutex_);
  if (cmd == "apply") {
    Manifest manifest = manifest_from_document(command.at("manifest"));
    std::int64_t version = apply_manifest(store_, std::move(manifest));
    log("admin apply -> version " + std::to_string(version));
    push_to_all_locked();
    return Document::object(
        {{"ok", Document(true)}, {"version", Document(std::to_string(version))}});
  }
  if (cmd == "delete") {
    std::optional<Tombstone> tombstone;
    if (const Document* doc = command.find("tombstone")) {
      if (!doc->is_null()) tombstone = Tombstone::from_document(*doc);
    }
    std::int64_t version = delete_manifest(store_, command.at("kind").as_string(),
                                           command.at("name").as_string(), std::move(tombstone));
    log("admin delete -> version " + std::to_string(version));
    push_to_all_locked();
    return Document::object(
        {{"ok", Document(true)}, {"version", Document(std::to_string(version))}});
  }
  if (cmd == "status") {
    Document::Array manifests;
    for (const auto& [key, manifest] : store_.manifests) {
      manifests.push_back(Document::object(
          {{"kind", Document(key.first)}, {"name", Document(key.second)}}));
    }
    Document::Array nacks;
    for (const NackRecord& nack : nacks_) {
      nacks.push_back(Document::object({{"node_id", Document(nack.node_id)},
                                        {"version", Document(nack.version)},
                                        {"detail", Document(nack.detail)}}));
    }
    Document::Array nodes;
    for (const auto& session : sessions_) {
      nodes.push_back(Document(session->node_id));
    }
    return Document::object({
        {"ok", Document(true)},
        {"version", Document(std::to_string(store_.version_counter))},
        {"manifests", Document(std::move(manifests))},
        {"proxies", Document(std::move(nodes))},
        {"nacks", Document(std::move(nacks))},
    });
  }
  throw Error(Errc::NotFound, "unknown admin command '" + cmd + "'");
}

void ControlPlaneServer::push_to_all_locked() {
  std::vector<std::string> translation_errors;
  DiscoveryResponse response = build_response(store_, make_nonce(), &translation_errors);
  for (const std::string& error : translation_errors) {
    log("skipping untranslatable manifest: " + error);
  }
  std::string frame = encode_message("response", response.to_document());
  for (auto& session : sessions_) {
    push_to_session_locked(*session, frame);
  }
  std::erase_if(sessions_, [](const auto& session) { return session->closed; });
}

void ControlPlaneServer::push_to_session_locked(ProxySession& session, const std::string& frame) {
  if (session.closed) return;
  try {
    send_frame(session.fd, frame);
  } catch (const Error& ex) {
    log(std::string("dropping proxy connection: ") + ex.what());
    ::close(session.fd);
    session.closed = true;
  }
}

void ControlPlaneServer::log(const std::string& line) const {
  if (options_.quiet) return;
  static std::mutex log_mutex;
  std::lock_guard lock(log_mutex);
  std::cerr << "[control-plane] " << line << "\n";
}

}  // namespace meshguard
