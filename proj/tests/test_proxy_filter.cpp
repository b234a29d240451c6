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

#include <chrono>
#include <filesystem>
#include <random>
#include <thread>

#include <doctest.h>
#include <httplib.h>

#include "meshguard/control_plane.hpp"
#include "meshguard/encoding.hpp"
#include "meshguard/signing.hpp"
#include "meshguard/yaml_io.hpp"

using namespace meshguard;

namespace {

KeyPair owner_keys() { return generate_keypair(std::vector<std::uint8_t>(32, 0x42)); }

TrustBundle make_bundle(const KeyPair& keys) {
  TrustBundle bundle;
  bundle.owner_public_key = keys.public_key;
  bundle.verifiable_config.owner_key_id = keys.key_id;
  bundle.verifiable_config.selectors.push_back(PolicySelector{
      ResourceType::RouteConfiguration, FragmentPath::parse("routes[*].mirror"),
      "request-mirroring"});
  bundle.verifiable_config.selectors.push_back(
      PolicySelector{ResourceType::Listener, FragmentPath::parse("rbac"), "rbac-policy"});
  return bundle;
}

Manifest mirror_manifest(const std::string& name, const std::string& host) {
  Manifest manifest;
  manifest.kind = std::string(kKindVirtualService);
  manifest.name = name;
  manifest.spec = Document::object({
      {"routes", Document::array({Document::object({
          {"destination", Document::object({{"host", Document("app.svc")}})},
          {"mirror", Document::object({{"host", Document(host)}})},
      })})},
  });
  return manifest;
}

ResourceConfig signed_route(const KeyPair& keys, const TrustBundle& bundle,
                            const std::string& name, const std::string& host) {
  auto [signed_manifest, report] =
      sign_manifest(mirror_manifest(name, host), bundle.verifiable_config, keys);
  return translate(signed_manifest)[0];
}

ResourceConfig unsigned_route(const std::string& name, const std::string& host) {
  return translate(mirror_manifest(name, host))[0];
}

ResourceConfig plain_cluster(const std::string& name) {
  Manifest manifest;
  manifest.kind = std::string(kKindDestinationRule);
  manifest.name = name;
  manifest.spec = Document::object({{"host", Document("app.svc")}});
  return translate(manifest)[0];
}

DiscoveryResponse push(std::vector<ResourceConfig> resources, std::string version,
                       std::vector<Tombstone> tombstones = {}) {
  DiscoveryResponse response;
  response.version = std::move(version);
  response.nonce = make_nonce();
  response.resources = std::move(resources);
  response.tombstones = std::move(tombstones);
  return response;
}

}  // namespace

TEST_CASE("bootstrap loads, digests, and validates the bundle") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "meshguard-bundle-test";
  fs::create_directories(dir);
  KeyPair keys = owner_keys();
  TrustBundle bundle = make_bundle(keys);
  std::string path = (dir / "bundle.json").string();
  write_file(path, canonicalize(trust_bundle_to_document(bundle)));

  TrustBundle loaded = bootstrap(path);
  CHECK(loaded.owner_public_key == keys.public_key);
  CHECK(loaded.verifiable_config == bundle.verifiable_config);
  CHECK(loaded.bundle_digest ==
        sha256(canonicalize(trust_bundle_to_document(bundle))));

  SUBCASE("key id mismatch") {
    TrustBundle broken = bundle;
    broken.verifiable_config.owner_key_id = "0000000000000000";
    write_file(path, canonicalize(trust_bundle_to_document(broken)));
    CHECK_THROWS_AS(bootstrap(path), Error);
    try {
      bootstrap(path);
    } catch (const Error& ex) {
      CHECK(ex.code() == Errc::KeyIdMismatch);
    }
  }
  SUBCASE("missing file") {
    try {
      bootstrap((dir / "nope.json").string());
      FAIL("expected error");
    } catch (const Error& ex) {
      CHECK(ex.code() == Errc::MalformedBundle);
    }
  }
  SUBCASE("garbage file") {
    write_file(path, "{{{{");
    try {
      bootstrap(path);
      FAIL("expected error");
    } catch (const Error& ex) {
      CHECK(ex.code() == Errc::MalformedBundle);
    }
  }
  fs::remove_all(dir);
}

TEST_CASE("filter accepts signed and non-confidential, discards the rest") {
  KeyPair keys = owner_keys();
  TrustBundle bundle = make_bundle(keys);
  ProxyState state;

  DiscoveryResponse response = push(
      {signed_route(keys, bundle, "good", "shadow.svc"), unsigned_route("bad", "evil.svc"),
       plain_cluster("app")},
      "1");
  FilterDecision decision = filter_response(response, bundle, state);

  REQUIRE(decision.accepted.size() == 2);
  REQUIRE(decision.rejected.size() == 1);
  CHECK(decision.rejected[0].first.name == "vs/bad");
  CHECK(decision.rejected[0].second == "MissingSignature");

  // Partition: every pushed resource lands on exactly one side, unmodified.
  std::size_t found = 0;
  for (const ResourceConfig& original : response.resources) {
    for (const ResourceConfig& accepted : decision.accepted) {
      if (accepted == original) ++found;
    }
    for (const auto& [rejected, reason] : decision.rejected) {
      if (rejected == original) ++found;
    }
  }
  CHECK(found == response.resources.size());
}

TEST_CASE("filter verdicts surface the first failure") {
  KeyPair keys = owner_keys();
  TrustBundle bundle = make_bundle(keys);
  ProxyState state;

  SUBCASE("tampered body after signing") {
    ResourceConfig resource = signed_route(keys, bundle, "app", "shadow.svc");
    resource.body.as_object()
        .at("routes")
        .as_array()[0]
        .as_object()
        .at("mirror")
        .as_object()
        .insert_or_assign("host", Document("evil.svc"));
    FilterDecision decision = filter_response(push({resource}, "1"), bundle, state);
    REQUIRE(decision.rejected.size() == 1);
    CHECK(decision.rejected[0].second == "DigestMismatch");
  }
  SUBCASE("replayed envelope from another resource") {
    ResourceConfig original = signed_route(keys, bundle, "app", "shadow.svc");
    ResourceConfig replayed = unsigned_route("app2", "shadow.svc");
    replayed.envelopes = original.envelopes;
    FilterDecision decision = filter_response(push({replayed}, "1"), bundle, state);
    REQUIRE(decision.rejected.size() == 1);
    CHECK(decision.rejected[0].second == "WrongContext");
  }
  SUBCASE("signature from a different key") {
    KeyPair stranger = generate_keypair(std::vector<std::uint8_t>(32, 0x13));
    TrustBundle strangers_bundle = make_bundle(stranger);
    ResourceConfig resource = signed_route(stranger, strangers_bundle, "app", "shadow.svc");
    FilterDecision decision = filter_response(push({resource}, "1"), bundle, state);
    REQUIRE(decision.rejected.size() == 1);
    CHECK(decision.rejected[0].second == "UnknownKey");
  }
  SUBCASE("stale extra envelopes are ignored when one accepted envelope exists") {
    ResourceConfig resource = signed_route(keys, bundle, "app", "shadow.svc");
    SignatureEnvelope stale = resource.envelopes[0];
    stale.fragment_digest[3] ^= 0xff;
    resource.envelopes.insert(resource.envelopes.begin(), stale);
    FilterDecision decision = filter_response(push({resource}, "1"), bundle, state);
    CHECK(decision.accepted.size() == 1);
    CHECK(decision.rejected.empty());
  }
}

TEST_CASE("apply_decision folds the partition into state and builds the ACK") {
  KeyPair keys = owner_keys();
  TrustBundle bundle = make_bundle(keys);
  ProxyState state;

  DiscoveryResponse response = push(
      {signed_route(keys, bundle, "a", "h1"), signed_route(keys, bundle, "b", "h2"),
       unsigned_route("c", "h3")},
      "1");
  FilterDecision decision = filter_response(response, bundle, state);
  DiscoveryRequest ack =
      apply_decision(state, decision, response.version, response.nonce, "proxy-0");

  CHECK(state.applied.size() == 2);
  CHECK(state.applied_version == "1");
  CHECK(ack.acked_version == "1");
  CHECK(ack.nonce == response.nonce);
  CHECK(ack.node_id == "proxy-0");
  CHECK(ack.error_detail.find("vs/c") != std::string::npos);
  CHECK(ack.error_detail.find("MissingSignature") != std::string::npos);
  REQUIRE(state.rejection_log.size() == 1);
  CHECK(state.rejection_log[0].name == "vs/c");

  // All-accepted pushes ACK with no error detail.
  DiscoveryResponse clean = push({signed_route(keys, bundle, "a", "h1")}, "2");
  FilterDecision clean_decision = filter_response(clean, bundle, state);
  DiscoveryRequest clean_ack =
      apply_decision(state, clean_decision, clean.version, clean.nonce, "proxy-0");
  CHECK(clean_ack.error_detail.empty());
  CHECK(state.applied_version == "2");
  // vs/b vanished without a tombstone: retained and reported.
  CHECK(state.applied.count({ResourceType::RouteConfiguration, "vs/b"}) == 1);
  CHECK(clean_decision.deletions_refused.size() == 1);
}

TEST_CASE("confidential deletions require a tombstone at or above the pin") {
  KeyPair keys = owner_keys();
  TrustBundle bundle = make_bundle(keys);
  ProxyState state;

  DiscoveryResponse initial = push({signed_route(keys, bundle, "app", "h1")}, "1");
  apply_decision(state, filter_response(initial, bundle, state), "1", initial.nonce, "p");
  REQUIRE(state.applied.size() == 1);

  SUBCASE("absence without tombstone is refused") {
    DiscoveryResponse empty = push({}, "2");
    FilterDecision decision = filter_response(empty, bundle, state);
    CHECK(decision.deletions_refused.size() == 1);
    DiscoveryRequest ack = apply_decision(state, decision, "2", empty.nonce, "p");
    CHECK(state.applied.size() == 1);  // retained
    CHECK(ack.error_detail.find("refused deletion") != std::string::npos);
    CHECK(state.applied_version == "2");
  }
  SUBCASE("valid tombstone deletes and pins the serial") {
    Tombstone tombstone = sign_tombstone(ResourceType::RouteConfiguration, "vs/app", 3, keys);
    DiscoveryResponse empty = push({}, "2", {tombstone});
    FilterDecision decision = filter_response(empty, bundle, state);
    REQUIRE(decision.deletions_honored.size() == 1);
    CHECK(decision.deletions_honored[0].serial == 3);
    apply_decision(state, decision, "2", empty.nonce, "p");
    CHECK(state.applied.empty());
    CHECK(state.pinned_serials.at({ResourceType::RouteConfiguration, "vs/app"}) == 3);

    // Re-create, then try to delete with a stale (lower-serial) tombstone.
    DiscoveryResponse recreate = push({signed_route(keys, bundle, "app", "h1")}, "3");
    apply_decision(state, filter_response(recreate, bundle, state), "3", recreate.nonce, "p");
    Tombstone stale = sign_tombstone(ResourceType::RouteConfiguration, "vs/app", 2, keys);
    DiscoveryResponse replay = push({}, "4", {stale});
    FilterDecision replay_decision = filter_response(replay, bundle, state);
    CHECK(replay_decision.deletions_honored.empty());
    REQUIRE(replay_decision.deletions_refused.size() == 1);
    CHECK(replay_decision.deletions_refused[0].second.find("stale") != std::string::npos);

    // Same serial as pinned is allowed (>= rule).
    Tombstone same = sign_tombstone(ResourceType::RouteConfiguration, "vs/app", 3, keys);
    FilterDecision same_decision = filter_response(push({}, "5", {same}), bundle, state);
    CHECK(same_decision.deletions_honored.size() == 1);
  }
  SUBCASE("forged tombstone does not delete") {
    KeyPair stranger = generate_keypair(std::vector<std::uint8_t>(32, 0x13));
    Tombstone forged = sign_tombstone(ResourceType::RouteConfiguration, "vs/app", 9, stranger);
    FilterDecision decision = filter_response(push({}, "2", {forged}), bundle, state);
    CHECK(decision.deletions_honored.empty());
    REQUIRE(decision.deletions_refused.size() == 1);
  }
  SUBCASE("non-confidential resources delete freely") {
    DiscoveryResponse with_cluster =
        push({signed_route(keys, bundle, "app", "h1"), plain_cluster("app")}, "2");
    apply_decision(state, filter_response(with_cluster, bundle, state), "2",
                   with_cluster.nonce, "p");
    CHECK(state.applied.size() == 2);
    DiscoveryResponse without_cluster = push({signed_route(keys, bundle, "app", "h1")}, "3");
    FilterDecision decision = filter_response(without_cluster, bundle, state);
    REQUIRE(decision.deletions_honored.size() == 1);
    CHECK(decision.deletions_honored[0].rtype == ResourceType::Cluster);
    CHECK_FALSE(decision.deletions_honored[0].serial.has_value());
    apply_decision(state, decision, "3", without_cluster.nonce, "p");
    CHECK(state.applied.size() == 1);
  }
}

TEST_CASE("with an empty verifiable configuration everything applies") {
  KeyPair keys = owner_keys();
  TrustBundle bundle;
  bundle.owner_public_key = keys.public_key;
  bundle.verifiable_config.owner_key_id = keys.key_id;
  ProxyState state;

  TrustBundle signing_bundle = make_bundle(keys);
  DiscoveryResponse response = push(
      {signed_route(keys, signing_bundle, "signed", "h1"), unsigned_route("unsigned", "h2"),
       plain_cluster("c")},
      "1");
  FilterDecision decision = filter_response(response, bundle, state);
  CHECK(decision.accepted.size() == 3);
  CHECK(decision.rejected.empty());

  apply_decision(state, decision, "1", response.nonce, "p");
  // And absent resources delete freely, because nothing is confidential.
  FilterDecision empty_decision = filter_response(push({}, "2"), bundle, state);
  CHECK(empty_decision.deletions_honored.size() == 3);
  CHECK(empty_decision.deletions_refused.empty());
}

TEST_CASE("filter decisions are deterministic") {
  KeyPair keys = owner_keys();
  TrustBundle bundle = make_bundle(keys);
  ProxyState state;
  DiscoveryResponse response = push(
      {signed_route(keys, bundle, "a", "h1"), unsigned_route("b", "h2")}, "1");
  FilterDecision first = filter_response(response, bundle, state);
  FilterDecision second = filter_response(response, bundle, state);
  CHECK(first.accepted == second.accepted);
  CHECK(first.rejected == second.rejected);
}

TEST_CASE("safety invariant survives fuzzed push sequences") {
  KeyPair keys = owner_keys();
  TrustBundle bundle = make_bundle(keys);
  std::mt19937_64 rng(99);

  for (int sequence = 0; sequence < 25; ++sequence) {
    ProxyState state;
    Store store;
    std::int64_t next_serial = 0;
    for (int step = 0; step < 10; ++step) {
      std::uniform_int_distribution<int> action_dist(0, 5);
      int action = action_dist(rng);
      std::string name = "m" + std::to_string(rng() % 3);
      try {
        switch (action) {
          case 0: {  // owner-signed manifest
            auto [signed_manifest, _] = sign_manifest(
                mirror_manifest(name, "host-" + std::to_string(rng() % 5) + ".svc"),
                bundle.verifiable_config, keys);
            apply_manifest(store, signed_manifest);
            break;
          }
          case 1:  // unsigned rogue manifest
            apply_manifest(store, mirror_manifest(name, "evil.svc"));
            break;
          case 2: {  // tampered after signing
            auto [signed_manifest, _] = sign_manifest(mirror_manifest(name, "good.svc"),
                                                      bundle.verifiable_config, keys);
            signed_manifest.spec.as_object()
                .at("routes")
                .as_array()[0]
                .as_object()
                .at("mirror")
                .as_object()
                .insert_or_assign("host", Document("tampered.svc"));
            apply_manifest(store, signed_manifest);
            break;
          }
          case 3: {  // stripped signatures
            auto [signed_manifest, _] = sign_manifest(mirror_manifest(name, "good.svc"),
                                                      bundle.verifiable_config, keys);
            signed_manifest.annotations.clear();
            apply_manifest(store, signed_manifest);
            break;
          }
          case 4:  // rogue delete
            delete_manifest(store, std::string(kKindVirtualService), name, std::nullopt);
            break;
          default:  // owner-authorized delete
            delete_manifest(
                store, std::string(kKindVirtualService), name,
                sign_tombstone(ResourceType::RouteConfiguration, "vs/" + name, next_serial++,
                               keys));
            break;
        }
      } catch (const Error&) {
        continue;  // deleting something absent; fine
      }
      DiscoveryResponse response = build_response(store, make_nonce());
      FilterDecision decision = filter_response(response, bundle, state);
      apply_decision(state, decision, response.version, response.nonce, "p");
      auto failures = reverify_state(state, bundle);
      if (!failures.empty()) {
        CAPTURE(failures[0]);
        FAIL("applied state holds an unverified confidential fragment");
      }
    }
  }
}

TEST_CASE("proxy runner syncs, retains state across control plane restarts") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "meshguard-proxy-runner-test";
  fs::create_directories(dir);
  KeyPair keys = owner_keys();
  TrustBundle bundle = make_bundle(keys);
  std::string bundle_path = (dir / "bundle.json").string();
  write_file(bundle_path, canonicalize(trust_bundle_to_document(bundle)));

  auto cp_options = ControlPlaneServer::Options{.xds_host = "127.0.0.1",
                                                .xds_port = 0,
                                                .admin_host = "127.0.0.1",
                                                .admin_port = 0,
                                                .quiet = true};
  auto server = std::make_unique<ControlPlaneServer>(cp_options);
  server->start();
  std::uint16_t xds_port = server->xds_port();

  ProxyRunner::Options options;
  options.bundle_file = bundle_path;
  options.control_plane_port = xds_port;
  options.node_id = "proxy-test";
  options.quiet = true;
  ProxyRunner runner(options);
  runner.start();

  auto wait_version = [&](const std::string& version) {
    for (int i = 0; i < 400; ++i) {
      if (runner.snapshot_state().applied_version == version) return true;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    return false;
  };
  REQUIRE(wait_version("0"));

  {
    int admin = connect_tcp("127.0.0.1", server->admin_port());
    auto [signed_manifest, _] =
        sign_manifest(mirror_manifest("app", "shadow.svc"), bundle.verifiable_config, keys);
    send_frame(admin, canonicalize(Document::object({
                          {"cmd", Document("apply")},
                          {"manifest", manifest_to_document(signed_manifest)},
                      })));
    REQUIRE(parse_canonical(*recv_frame(admin)).at("ok").as_bool());
    ::close(admin);
  }
  REQUIRE(wait_version("1"));
  CHECK(runner.snapshot_state().applied.size() == 1);

  // Status endpoint serves canonical documents.
  httplib::Client client("127.0.0.1", runner.status_port());
  auto res = client.Get("/state");
  REQUIRE(res);
  REQUIRE(res->status == 200);
  Document state_doc = parse_canonical(res->body);
  CHECK(state_doc.at("version").as_string() == "1");
  CHECK(state_doc.at("resources").as_array().size() == 1);
  auto rejections = client.Get("/rejections");
  REQUIRE(rejections);
  CHECK(parse_canonical(rejections->body).at("rejections").as_array().empty());

  // Control plane restarts empty: the proxy reconnects, the push carries no
  // resources and no tombstone, so the confidential resource is retained.
  server->stop();
  server.reset();
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  auto server2 = std::make_unique<ControlPlaneServer>(cp_options);
  // Note: new server picks a fresh port; emulate a restart on the same port.
  // Rebind explicitly:
  auto cp_options_fixed = cp_options;
  cp_options_fixed.xds_port = xds_port;
  server2 = std::make_unique<ControlPlaneServer>(cp_options_fixed);
  server2->start();

  REQUIRE(wait_version("0"));
  CHECK(runner.snapshot_state().applied.size() == 1);  // pinned, not destroyed
  bool refusal_logged = false;
  for (const RejectionRecord& record : runner.snapshot_state().rejection_log) {
    if (record.reason.find("DeletionRefused") != std::string::npos) refusal_logged = true;
  }
  CHECK(refusal_logged);

  runner.stop();
  server2->stop();
  fs::remove_all(dir);
}
