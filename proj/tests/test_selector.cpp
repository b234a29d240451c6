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

#include "meshguard/selector.hpp"

#include <doctest.h>

#include "meshguard/yaml_io.hpp"

using namespace meshguard;

namespace {

constexpr const char* kStandardVc =
    "owner_key_id: 0011223344556677\n"
    "selectors:\n"
    "  - label: request-mirroring\n"
    "    resource_type: RouteConfiguration\n"
    "    path: routes[*].mirror\n"
    "  - label: rbac-policy\n"
    "    resource_type: Listener\n"
    "    path: rbac\n";

ResourceConfig route_resource(int mirrors) {
  ResourceConfig resource;
  resource.rtype = ResourceType::RouteConfiguration;
  resource.name = "vs/app";
  Document::Array routes;
  for (int i = 0; i < 2; ++i) {
    Document::Object route{{"destination", Document::object({{"host", Document("a.svc")}})}};
    if (i < mirrors) {
      route.emplace("mirror", Document::object({{"host", Document("shadow.svc")}}));
    }
    routes.push_back(Document(std::move(route)));
  }
  resource.body = Document::object({{"routes", Document(std::move(routes))}});
  return resource;
}

}  // namespace

TEST_CASE("parse_verifiable_config reads the selector list") {
  VerifiableConfiguration vc = parse_verifiable_config(kStandardVc);
  CHECK(vc.owner_key_id == "0011223344556677");
  REQUIRE(vc.selectors.size() == 2);
  CHECK(vc.selectors[0].label == "request-mirroring");
  CHECK(vc.selectors[0].rtype == ResourceType::RouteConfiguration);
  CHECK(vc.selectors[0].path.render() == "routes[*].mirror");
  CHECK(vc.selectors[1].rtype == ResourceType::Listener);
  CHECK(vc.targets(ResourceType::Listener));
  CHECK_FALSE(vc.targets(ResourceType::Cluster));
}

TEST_CASE("empty selector list means nothing is confidential") {
  VerifiableConfiguration vc =
      parse_verifiable_config("owner_key_id: abc\nselectors: []\n");
  CHECK(vc.selectors.empty());
  CHECK(match_resource(route_resource(2), vc).empty());
}

TEST_CASE("parse_verifiable_config error taxonomy") {
  auto code_of = [](const char* text) {
    try {
      parse_verifiable_config(text);
    } catch (const Error& ex) {
      return ex.code();
    }
    return Errc::IoError;
  };
  CHECK(code_of("owner_key_id: k\nselectors:\n"
                "  - {label: mirror, resource_type: RouteConfiguration, path: a}\n"
                "  - {label: mirror, resource_type: Listener, path: b}\n") ==
        Errc::DuplicateLabel);
  CHECK(code_of("owner_key_id: k\nselectors:\n"
                "  - {label: x, resource_type: RouteConfiguration, path: \"a..b\"}\n") ==
        Errc::BadPath);
  CHECK(code_of("owner_key_id: k\nselectors:\n"
                "  - {label: x, resource_type: Gateway, path: a}\n") == Errc::MalformedConfig);
  CHECK(code_of("selectors: []\n") == Errc::MalformedConfig);
  CHECK(code_of("owner_key_id: k\n") == Errc::MalformedConfig);
  CHECK(code_of("owner_key_id: k\nselectors: [{resource_type: Listener, path: a}]\n") ==
        Errc::MalformedConfig);
  CHECK(code_of(": : :") == Errc::MalformedConfig);
}

TEST_CASE("match_resource ignores other resource types") {
  VerifiableConfiguration vc = parse_verifiable_config(kStandardVc);
  ResourceConfig cluster;
  cluster.rtype = ResourceType::Cluster;
  cluster.name = "dr/app";
  cluster.body = Document::object({{"host", Document("a.svc")}});
  CHECK(match_resource(cluster, vc).empty());
}

TEST_CASE("match_resource expands wildcards into one match per fragment") {
  VerifiableConfiguration vc = parse_verifiable_config(kStandardVc);
  auto matches = match_resource(route_resource(2), vc);
  REQUIRE(matches.size() == 2);
  CHECK(matches[0].selector_label == "request-mirroring");
  CHECK(matches[0].concrete_path.render() == "routes[0].mirror");
  CHECK(matches[1].concrete_path.render() == "routes[1].mirror");
  CHECK(matches[0].resource_name == "vs/app");

  CHECK(match_resource(route_resource(0), vc).empty());
}

TEST_CASE("matches reference fragments literally present in the body") {
  VerifiableConfiguration vc = parse_verifiable_config(kStandardVc);
  ResourceConfig resource = route_resource(2);
  for (const FragmentMatch& match : match_resource(resource, vc)) {
    const Document* navigated = navigate(resource.body, match.concrete_path);
    REQUIRE(navigated != nullptr);
    CHECK(*navigated == match.fragment);
  }
}

TEST_CASE("adding a selector never removes matches") {
  VerifiableConfiguration small = parse_verifiable_config(kStandardVc);
  VerifiableConfiguration big = small;
  big.selectors.push_back(PolicySelector{ResourceType::RouteConfiguration,
                                         FragmentPath::parse("routes[*].destination"),
                                         "destinations"});
  ResourceConfig resource = route_resource(1);
  auto before = match_resource(resource, small);
  auto after = match_resource(resource, big);
  CHECK(after.size() >= before.size());
  for (const FragmentMatch& match : before) {
    bool still_there = false;
    for (const FragmentMatch& candidate : after) {
      if (candidate == match) still_there = true;
    }
    CHECK(still_there);
  }
}

TEST_CASE("verifiable configuration document round-trip") {
  VerifiableConfiguration vc = parse_verifiable_config(kStandardVc);
  VerifiableConfiguration reparsed =
      verifiable_config_from_document(verifiable_config_to_document(vc));
  CHECK(reparsed == vc);
}
