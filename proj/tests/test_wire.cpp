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

#include <sys/socket.h>
#include <unistd.h>

#include <thread>

#include <doctest.h>

#include "meshguard/crypto.hpp"
#include "meshguard/signing.hpp"

using namespace meshguard;

namespace {

struct SocketPair {
  int a = -1;
  int b = -1;
  SocketPair() {
    int fds[2];
    REQUIRE(::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) == 0);
    a = fds[0];
    b = fds[1];
  }
  ~SocketPair() {
    if (a >= 0) ::close(a);
    if (b >= 0) ::close(b);
  }
};

}  // namespace

TEST_CASE("frames round-trip across a socket") {
  SocketPair pair;
  send_frame(pair.a, "hello");
  send_frame(pair.a, "");
  send_frame(pair.a, std::string(100000, 'x'));
  CHECK(recv_frame(pair.b) == "hello");
  CHECK(recv_frame(pair.b) == "");
  CHECK(recv_frame(pair.b)->size() == 100000);
  ::close(pair.a);
  pair.a = -1;
  CHECK_FALSE(recv_frame(pair.b).has_value());  // clean EOF
}

TEST_CASE("oversize and truncated frames are wire errors") {
  SocketPair pair;
  // Claim a 1 GiB frame.
  const unsigned char huge[4] = {0x40, 0x00, 0x00, 0x00};
  REQUIRE(::send(pair.a, huge, 4, 0) == 4);
  CHECK_THROWS_AS(recv_frame(pair.b), Error);

  SocketPair second;
  const unsigned char short_frame[6] = {0x00, 0x00, 0x00, 0x08, 'h', 'i'};
  REQUIRE(::send(second.a, short_frame, 6, 0) == 6);
  ::close(second.a);
  second.a = -1;
  CHECK_THROWS_AS(recv_frame(second.b), Error);
}

TEST_CASE("discovery documents round-trip") {
  KeyPair keys = generate_keypair(std::vector<std::uint8_t>(32, 5));
  FragmentMatch match;
  match.selector_label = "m";
  match.rtype = ResourceType::RouteConfiguration;
  match.resource_name = "vs/app";
  match.concrete_path = FragmentPath::parse("routes[0].mirror");
  match.fragment = Document::object({{"host", Document("shadow.svc")}});

  ResourceConfig resource;
  resource.rtype = ResourceType::RouteConfiguration;
  resource.name = "vs/app";
  resource.body = Document::object(
      {{"routes", Document::array({Document::object({{"mirror", match.fragment}})})}});
  resource.envelopes.push_back(sign_fragment(match, keys));

  DiscoveryResponse response;
  response.version = "7";
  response.nonce = "00ff00ff00ff00ff";
  response.resources.push_back(resource);
  response.tombstones.push_back(sign_tombstone(ResourceType::Cluster, "dr/x", 2, keys));

  DiscoveryResponse decoded = DiscoveryResponse::from_document(
      parse_canonical(canonicalize(response.to_document())));
  CHECK(decoded.version == "7");
  CHECK(decoded.nonce == response.nonce);
  REQUIRE(decoded.resources.size() == 1);
  CHECK(decoded.resources[0] == resource);
  REQUIRE(decoded.tombstones.size() == 1);
  CHECK(decoded.tombstones[0] == response.tombstones[0]);

  DiscoveryRequest request;
  request.node_id = "proxy-1";
  request.acked_version = "7";
  request.nonce = response.nonce;
  request.error_detail = "rejected vs/app (DigestMismatch)";
  DiscoveryRequest decoded_request =
      DiscoveryRequest::from_document(parse_canonical(canonicalize(request.to_document())));
  CHECK(decoded_request.node_id == request.node_id);
  CHECK(decoded_request.acked_version == request.acked_version);
  CHECK(decoded_request.error_detail == request.error_detail);
}

TEST_CASE("message envelopes carry a type tag") {
  std::string bytes = encode_message("response", Document::object({{"x", Document(1)}}));
  auto [type, payload] = decode_message(bytes);
  CHECK(type == "response");
  CHECK(payload.at("x").as_int() == 1);
  CHECK_THROWS_AS(decode_message("{\"no\":\"type\"}"), Error);
}

TEST_CASE("hostport parsing") {
  HostPort hp = parse_hostport("127.0.0.1:8080");
  CHECK(hp.host == "127.0.0.1");
  CHECK(hp.port == 8080);
  CHECK_THROWS_AS(parse_hostport("nope"), Error);
  CHECK_THROWS_AS(parse_hostport(":80"), Error);
  CHECK_THROWS_AS(parse_hostport("x:"), Error);
  CHECK_THROWS_AS(parse_hostport("x:notaport"), Error);
}

TEST_CASE("tcp listen, connect, and frame exchange") {
  int listener = listen_tcp("127.0.0.1", 0);
  std::uint16_t port = local_port(listener);
  REQUIRE(port != 0);

  std::thread server([&] {
    int conn = ::accept(listener, nullptr, nullptr);
    REQUIRE(conn >= 0);
    auto frame = recv_frame(conn);
    REQUIRE(frame.has_value());
    send_frame(conn, "echo:" + *frame);
    ::close(conn);
  });

  int client = connect_tcp("127.0.0.1", port);
  send_frame(client, "ping");
  CHECK(recv_frame(client) == "echo:ping");
  ::close(client);
  server.join();
  ::close(listener);

  CHECK_THROWS_AS(connect_tcp("127.0.0.1", port), Error);  // nobody listening anymore
}
