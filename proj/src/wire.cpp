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

#include "meshguard/wire.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

namespace meshguard {

Document DiscoveryResponse::to_document() const {
  Document::Array resource_docs;
  resource_docs.reserve(resources.size());
  for (const ResourceConfig& resource : resources) {
    resource_docs.push_back(resource.to_document());
  }
  Document::Array tombstone_docs;
  tombstone_docs.reserve(tombstones.size());
  for (const Tombstone& tombstone : tombstones) {
    tombstone_docs.push_back(tombstone.to_document());
  }
  return Document::object({
      {"version", Document(version)},
      {"nonce", Document(nonce)},
      {"resources", Document(std::move(resource_docs))},
      {"tombstones", Document(std::move(tombstone_docs))},
  });
}

DiscoveryResponse DiscoveryResponse::from_document(const Document& doc) {
  DiscoveryResponse response;
  response.version = doc.at("version").as_string();
  response.nonce = doc.at("nonce").as_string();
  for (const Document& resource : doc.at("resources").as_array()) {
    response.resources.push_back(ResourceConfig::from_document(resource));
  }
  for (const Document& tombstone : doc.at("tombstones").as_array()) {
    response.tombstones.push_back(Tombstone::from_document(tombstone));
  }
  return response;
}

Document DiscoveryRequest::to_document() const {
  return Document::object({
      {"node_id", Document(node_id)},
      {"acked_version", Document(acked_version)},
      {"nonce", Document(nonce)},
      {"error_detail", Document(error_detail)},
  });
}

DiscoveryRequest DiscoveryRequest::from_document(const Document& doc) {
  DiscoveryRequest request;
  request.node_id = doc.at("node_id").as_string();
  request.acked_version = doc.at("acked_version").as_string();
  request.nonce = doc.at("nonce").as_string();
  request.error_detail = doc.at("error_detail").as_string();
  return request;
}

std::string encode_message(std::string_view type, const Document& payload) {
  return canonicalize(Document::object({
      {"type", Document(type)},
      {"payload", payload},
  }));
}

std::pair<std::string, Document> decode_message(std::string_view bytes) {
  Document doc = parse_canonical(bytes);
  return {doc.at("type").as_string(), doc.at("payload")};
}

namespace {

void send_all(int fd, const void* data, std::size_t size) {
  const char* cursor = static_cast<const char*>(data);
  while (size > 0) {
    ssize_t sent = ::send(fd, cursor, size, MSG_NOSIGNAL);
    if (sent < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::WireError, std::string("send failed: ") + std::strerror(errno));
    }
    cursor += sent;
    size -= static_cast<std::size_t>(sent);
  }
}

// Returns false on EOF before any byte was read; throws on mid-message EOF.
bool recv_exact(int fd, void* data, std::size_t size, bool eof_ok) {
  char* cursor = static_cast<char*>(data);
  std::size_t remaining = size;
  while (remaining > 0) {
    ssize_t got = ::recv(fd, cursor, remaining, 0);
    if (got < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::WireError, std::string("recv failed: ") + std::strerror(errno));
    }
    if (got == 0) {
      if (eof_ok && remaining == size) return false;
      throw Error(Errc::WireError, "connection closed mid-frame");
    }
    cursor += got;
    remaining -= static_cast<std::size_t>(got);
  }
  return true;
}

}  // namespace

void send_frame(int fd, std::string_view bytes) {
  if (bytes.size() > kMaxFrameBytes) {
    throw Error(Errc::WireError, "frame exceeds " + std::to_string(kMaxFrameBytes) + " bytes");
  }
  std::uint32_t length = htonl(static_cast<std::uint32_t>(bytes.size()));
  send_all(fd, &length, sizeof(length));
  send_all(fd, bytes.data(), bytes.size());
}

std::optional<std::string> recv_frame(int fd) {
  std::uint32_t length_be = 0;
  if (!recv_exact(fd, &length_be, sizeof(length_be), true)) {
    return std::nullopt;
  }
  std::uint32_t length = ntohl(length_be);
  if (length > kMaxFrameBytes) {
    throw Error(Errc::WireError, "incoming frame exceeds " + std::to_string(kMaxFrameBytes) +
                                     " bytes");
  }
  std::string body(length, '\0');
  recv_exact(fd, body.data(), length, false);
  return body;
}

HostPort parse_hostport(std::string_view text) {
  std::size_t colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size()) {
    throw Error(Errc::SetupFailure, "expected host:port, got '" + std::string(text) + "'");
  }
  HostPort out;
  out.host = std::string(text.substr(0, colon));
  std::string_view port_text = text.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(),
                                   out.port);
  if (ec != std::errc() || ptr != port_text.data() + port_text.size()) {
    throw Error(Errc::SetupFailure, "bad port in '" + std::string(text) + "'");
  }
  return out;
}

namespace {

sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (host == "localhost") {
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  } else if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    throw Error(Errc::SetupFailure, "cannot parse address '" + host + "'");
  }
  return addr;
}

}  // namespace

int listen_tcp(const std::string& host, std::uint16_t port) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) {
    throw Error(Errc::SetupFailure, std::string("socket failed: ") + std::strerror(errno));
  }
  int reuse = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &reuse, sizeof(reuse));
  sockaddr_in addr = make_addr(host, port);
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 || ::listen(fd, 64) < 0) {
    int saved = errno;
    ::close(fd);
    throw Error(Errc::SetupFailure,
                "cannot listen on " + host + ":" + std::to_string(port) + ": " +
                    std::strerror(saved));
  }
  return fd;
}

std::uint16_t local_port(int fd) {
  sockaddr_in addr{};
  socklen_t len = sizeof(addr);
  if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) < 0) {
    throw Error(Errc::SetupFailure, std::string("getsockname failed: ") + std::strerror(errno));
  }
  return ntohs(addr.sin_port);
}

int connect_tcp(const std::string& host, std::uint16_t port) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) {
    throw Error(Errc::WireError, std::string("socket failed: ") + std::strerror(errno));
  }
  sockaddr_in addr = make_addr(host, port);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    int saved = errno;
    ::close(fd);
    throw Error(Errc::WireError, "cannot connect to " + host + ":" + std::to_string(port) +
                                     ": " + std::strerror(saved));
  }
  int nodelay = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &nodelay, sizeof(nodelay));
  return fd;
}

}  // namespace meshguard
