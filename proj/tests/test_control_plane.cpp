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

#include <unistd.h>

#include <doctest.h>

#include "meshguard/crypto.hpp"
#include "meshguard/signing.hpp"
#include "meshguard/yaml_io.hpp"

using namespace meshguard;

namespace {

Manifest sample_manifest(const std::string& name, const std::string& host) {
  Manifest manifest;
  manifest.kind = std::string(kKindVirtualService);
  manifest.name = name;
  manifest.spec = Document::object({
      {"routes", Document::array({Document::object({
          {"mirror", Document::object({{"host", Document(host)}})},
      })})},
  });
  return manifest;
}

DiscoveryResponse recv_response(int fd) {
  auto frame = recv_frame(fd);
  REQUIRE(frame.has_value());
  auto [type, payload] = decode_message(*frame);
  REQUIRE(type == "response");
  return DiscoveryResponse::from_document(payload);
}

}  // namespace

TEST_CASE("store mutations bump the version by exactly one") {
  Store store;
  CHECK(apply_manifest(store, sample_manifest("a", "h1")) == 1);
  CHECK(apply_manifest(store, sample_manifest("b", "h2")) == 2);
  // Re-apply is not deduplicated.
  CHECK(apply_manifest(store, sample_manifest("a", "h1")) == 3);
  CHECK(delete_manifest(store, "VirtualService", "a", std::nullopt) == 4);
  CHECK_THROWS_AS(delete_manifest(store, "VirtualService", "a", std::nullopt), Error);
  CHECK(store.version_counter == 4);
}

TEST_CASE("build_response translates the whole store") {
  Store store;
  apply_manifest(store, sample_manifest("a", "h1"));
  apply_manifest(store, sample_manifest("b", "h2"));
  DiscoveryResponse response = build_response(store, "feedfacefeedface");
  CHECK(response.version == "2");
  CHECK(response.nonce == "feedfacefeedface");
  REQUIRE(response.resources.size() == 2);
  CHECK(response.resources[0].name == "vs/a");
  CHECK(response.resources[1].name == "vs/b");
  CHECK(response.tombstones.empty());

  Store empty;
  CHECK(build_response(empty, make_nonce()).resources.empty());
}

TEST_CASE("the store carries signatures opaquely, byte for byte") {
  KeyPair keys = generate_keypair(std::vector<std::uint8_t>(32, 8));
  VerifiableConfiguration vc;
  vc.owner_key_id = keys.key_id;
  vc.selectors.push_back(PolicySelector{ResourceType::RouteConfiguration,
                                        FragmentPath::parse("routes[*].mirror"), "mirror"});
  auto [signed_manifest, report] = sign_manifest(sample_manifest("a", "h1"), vc, keys);
  REQUIRE(report.fragments_signed == 1);

  Store store;
  apply_manifest(store, signed_manifest);
  DiscoveryResponse response = build_response(store, make_nonce());
  REQUIRE(response.resources.size() == 1);
  REQUIRE(response.resources[0].envelopes.size() == 1);
  // The envelope on the wire is byte-identical to the annotation content.
  CHECK(canonicalize(response.resources[0].envelopes[0].to_document()) ==
        canonicalize(SignatureEnvelope::from_annotation_value(
                         signed_manifest.annotations.begin()->second)
                         .to_document()));
}

TEST_CASE("unsigned and tampered manifests are stored without complaint") {
  // The control plane is the adversary's territory; it never verifies.
  Store store;
  CHECK(apply_manifest(store, sample_manifest("rogue", "evil.svc")) == 1);
  DiscoveryResponse response = build_response(store, make_nonce());
  CHECK(response.resources.size() == 1);
  CHECK(response.resources[0].envelopes.empty());
}

TEST_CASE("untranslatable manifests are skipped and reported") {
  Store store;
  Manifest broken;
  broken.kind = std::string(kKindVirtualService);
  broken.name = "broken";
  broken.spec = Document::object({{"routes", Document("not-a-list")}});
  apply_manifest(store, broken);
  apply_manifest(store, sample_manifest("ok", "h"));
  std::vector<std::string> errors;
  DiscoveryResponse response = build_response(store, make_nonce(), &errors);
  CHECK(response.resources.size() == 1);
  CHECK(response.resources[0].name == "vs/ok");
  REQUIRE(errors.size() == 1);
  CHECK(errors[0].find("broken") != std::string::npos);
}

TEST_CASE("tombstoned deletes ride along in every push") {
  KeyPair keys = generate_keypair(std::vector<std::uint8_t>(32, 8));
  Store store;
  apply_manifest(store, sample_manifest("a", "h1"));
  Tombstone tombstone = sign_tombstone(ResourceType::RouteConfiguration, "vs/a", 0, keys);
  delete_manifest(store, "VirtualService", "a", tombstone);
  DiscoveryResponse response = build_response(store, make_nonce());
  CHECK(response.resources.empty());
  REQUIRE(response.tombstones.size() == 1);
  CHECK(response.tombstones[0] == tombstone);
}

TEST_CASE("server pushes state of the world on connect and on mutation") {
  ControlPlaneServer server({.xds_host = "127.0.0.1",
                             .xds_port = 0,
                             .admin_host = "127.0.0.1",
                             .admin_port = 0,
                             .quiet = true});
  server.start();

  int proxy_a = connect_tcp("127.0.0.1", server.xds_port());
  DiscoveryResponse initial = recv_response(proxy_a);
  CHECK(initial.version == "0");
  CHECK(initial.resources.empty());

  // Second proxy connects later and also gets the current state immediately.
  int proxy_b = connect_tcp("127.0.0.1", server.xds_port());
  CHECK(recv_response(proxy_b).version == "0");

  // Admin applies a manifest; both proxies see the new version.
  int admin = connect_tcp("127.0.0.1", server.admin_port());
  send_frame(admin, canonicalize(Document::object({
                        {"cmd", Document("apply")},
                        {"manifest", manifest_to_document(sample_manifest("a", "h1"))},
                    })));
  auto reply = parse_canonical(*recv_frame(admin));
  CHECK(reply.at("ok").as_bool());
  CHECK(reply.at("version").as_string() == "1");

  DiscoveryResponse push_a = recv_response(proxy_a);
  DiscoveryResponse push_b = recv_response(proxy_b);
  CHECK(push_a.version == "1");
  CHECK(push_b.version == "1");
  REQUIRE(push_a.resources.size() == 1);
  CHECK(push_a.resources[0].name == "vs/a");
  CHECK(push_a.nonce == push_b.nonce);

  // Proxies ACK/NACK; the NACK lands in status.
  DiscoveryRequest nack;
  nack.node_id = "proxy-a";
  nack.acked_version = "1";
  nack.nonce = push_a.nonce;
  nack.error_detail = "rejected vs/a (MissingSignature)";
  send_frame(proxy_a, encode_message("request", nack.to_document()));

  Document status;
  for (int i = 0; i < 100; ++i) {
    send_frame(admin, canonicalize(Document::object({{"cmd", Document("status")}})));
    status = parse_canonical(*recv_frame(admin));
    if (!status.at("nacks").as_array().empty()) break;
    ::usleep(10000);
  }
  REQUIRE(status.at("nacks").as_array().size() == 1);
  CHECK(status.at("nacks").as_array()[0].at("node_id").as_string() == "proxy-a");
  CHECK(status.at("version").as_string() == "1");
  CHECK(status.at("manifests").as_array().size() == 1);

  // Unknown admin commands and bad manifests produce error replies, not
  // dropped connections.
  send_frame(admin, canonicalize(Document::object({{"cmd", Document("nonsense")}})));
  CHECK_FALSE(parse_canonical(*recv_frame(admin)).at("ok").as_bool());
  send_frame(admin, canonicalize(Document::object({
                        {"cmd", Document("delete")},
                        {"kind", Document("VirtualService")},
                        {"name", Document("missing")},
                    })));
  auto not_found = parse_canonical(*recv_frame(admin));
  CHECK_FALSE(not_found.at("ok").as_bool());
  CHECK(not_found.at("error").as_string().find("NotFound") != std::string::npos);

  ::close(proxy_a);
  ::close(proxy_b);
  ::close(admin);
  server.stop();
}

TEST_CASE("server survives proxy disconnects during pushes") {
  ControlPlaneServer server({.xds_host = "127.0.0.1",
                             .xds_port = 0,
                             .admin_host = "127.0.0.1",
                             .admin_port = 0,
                             .quiet = true});
  server.start();
  int proxy = connect_tcp("127.0.0.1", server.xds_port());
  (void)recv_response(proxy);
  ::close(proxy);  // drop without a word

  int admin = connect_tcp("127.0.0.1", server.admin_port());
  send_frame(admin, canonicalize(Document::object({
                        {"cmd", Document("apply")},
                        {"manifest", manifest_to_document(sample_manifest("a", "h1"))},
                    })));
  CHECK(parse_canonical(*recv_frame(admin)).at("ok").as_bool());

  // A fresh proxy can still connect and sync.
  int proxy2 = connect_tcp("127.0.0.1", server.xds_port());
  CHECK(recv_response(proxy2).version == "1");
  ::close(proxy2);
  ::close(admin);
  server.stop();
}
