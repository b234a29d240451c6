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
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "meshguard/document.hpp"
#include "meshguard/envelope.hpp"
#include "meshguard/manifest.hpp"

namespace meshguard {

// Wire protocol: each frame is a 4-byte big-endian length followed by that
// many bytes of canonical document bytes. Discovery frames wrap their
// payload in {"type": "request"|"response", "payload": ...}; admin frames
// carry the command/reply document directly.

inline constexpr std::size_t kMaxFrameBytes = 64u << 20;

/// Full state-of-the-world push: every translated resource with its
/// envelopes, plus every recorded deletion authorization.
struct DiscoveryResponse {
  std::string version;
  std::string nonce;
  std::vector<ResourceConfig> resources;
  std::vector<Tombstone> tombstones;

  Document to_document() const;
  static DiscoveryResponse from_document(const Document& doc);
};

/// Proxy-to-control-plane message: the initial subscription and every
/// subsequent ACK. A nonempty error_detail marks the ACK as partial — some
/// resources or deletions were refused.
struct DiscoveryRequest {
  std::string node_id;
  std::string acked_version;  // empty on the first request
  std::string nonce;          // echoes the last response nonce
  std::string error_detail;

  Document to_document() const;
  static DiscoveryRequest from_document(const Document& doc);
};

std::string encode_message(std::string_view type, const Document& payload);
std::pair<std::string, Document> decode_message(std::string_view bytes);

// Blocking socket I/O. send_frame/recv_frame throw Error(Errc::WireError) on
// I/O failure or oversize frames; recv_frame returns nullopt on clean EOF.
void send_frame(int fd, std::string_view bytes);
std::optional<std::string> recv_frame(int fd);

struct HostPort {
  std::string host;
  std::uint16_t port = 0;
};
/// Parses "host:port". Throws Error(Errc::SetupFailure) on bad input.
HostPort parse_hostport(std::string_view text);

/// Binds and listens; port 0 picks a free port. Returns the listening fd.
int listen_tcp(const std::string& host, std::uint16_t port);
/// The port a listening socket actually bound.
std::uint16_t local_port(int fd);
/// Connects; throws Error(Errc::WireError) when the peer is unreachable.
int connect_tcp(const std::string& host, std::uint16_t port);

}  // namespace meshguard
