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

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "meshguard/document.hpp"
#include "meshguard/envelope.hpp"
#include "meshguard/resource_type.hpp"

namespace meshguard {

/// A source configuration object, the analogue of the high-level custom
/// resource an operator applies. Signatures ride along opaquely in the
/// annotations map under kSignatureAnnotationPrefix keys, so an unmodified
/// store can carry them without understanding them.
struct Manifest {
  std::string kind;  // VirtualService | AuthorizationPolicy | DestinationRule
  std::string name;
  Document spec;
  std::map<std::string, std::string> annotations;

  bool operator==(const Manifest&) const = default;
};

inline constexpr std::string_view kKindVirtualService = "VirtualService";
inline constexpr std::string_view kKindAuthorizationPolicy = "AuthorizationPolicy";
inline constexpr std::string_view kKindDestinationRule = "DestinationRule";

/// Parses a manifest file (YAML subset). Top-level fields: kind, name, spec,
/// optional annotations; anything else is rejected. Signature annotations
/// must decode to well-formed envelopes.
/// Throws Error with Errc::MalformedManifest, UnknownKind, or InvalidName.
Manifest parse_manifest(std::string_view text);

/// Same validation as parse_manifest, starting from an already-parsed
/// Document (the admin wire path).
Manifest manifest_from_document(const Document& doc);
Document manifest_to_document(const Manifest& manifest);

/// One typed, named resource as pushed over the discovery protocol.
struct ResourceConfig {
  ResourceType rtype = ResourceType::RouteConfiguration;
  std::string name;
  Document body;
  std::vector<SignatureEnvelope> envelopes;

  Document to_document() const;
  static ResourceConfig from_document(const Document& doc);

  bool operator==(const ResourceConfig&) const = default;
};

/// Deterministic manifest-to-resource translation:
///   VirtualService      -> RouteConfiguration "vs/<name>"
///   AuthorizationPolicy -> Listener           "ap/<name>"
///   DestinationRule     -> Cluster            "dr/<name>"
/// Signature annotations are decoded and attached to the produced resource.
/// Throws Error(Errc::TranslationError) when the spec violates the kind's
/// schema (see README for the field reference).
std::vector<ResourceConfig> translate(const Manifest& manifest);

/// The "<kind-tag>/<manifest-name>" resource name a manifest translates to.
std::string resource_name_for(std::string_view kind, std::string_view manifest_name);

}  // namespace meshguard
