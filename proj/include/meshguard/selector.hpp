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

#include <string>
#include <string_view>
#include <vector>

#include "meshguard/fragment_path.hpp"
#include "meshguard/manifest.hpp"
#include "meshguard/resource_type.hpp"

namespace meshguard {

/// Names one class of policy fragments that must carry an owner signature:
/// "fragments at this path, in resources of this type". Selectors constrain
/// fragment *location* only, never fragment content — the owner may sign any
/// policy with any settings.
struct PolicySelector {
  ResourceType rtype = ResourceType::RouteConfiguration;
  FragmentPath path;
  std::string label;

  bool operator==(const PolicySelector&) const = default;
};

/// The owner-declared list of confidential policy locations, delivered to
/// every proxy at bootup inside its trust bundle.
struct VerifiableConfiguration {
  std::vector<PolicySelector> selectors;
  std::string owner_key_id;

  /// True when any selector names this resource type; such resources need
  /// owner authorization to be deleted.
  bool targets(ResourceType rtype) const;

  bool operator==(const VerifiableConfiguration&) const = default;
};

/// One fragment of one resource that a selector matched, together with the
/// context a signature must bind to.
struct FragmentMatch {
  std::string selector_label;
  ResourceType rtype = ResourceType::RouteConfiguration;
  std::string resource_name;
  FragmentPath concrete_path;
  Document fragment;

  bool operator==(const FragmentMatch&) const = default;
};

/// Parses a verifiable-configuration file: {owner_key_id, selectors:
/// [{label, resource_type, path}]}. Throws Error with Errc::MalformedConfig,
/// DuplicateLabel, or BadPath.
VerifiableConfiguration parse_verifiable_config(std::string_view text);
VerifiableConfiguration verifiable_config_from_document(const Document& doc);
Document verifiable_config_to_document(const VerifiableConfiguration& vc);

/// Evaluates every selector of matching resource type against the resource
/// body. Empty result means the resource is entirely non-confidential.
std::vector<FragmentMatch> match_resource(const ResourceConfig& resource,
                                          const VerifiableConfiguration& vc);

}  // namespace meshguard
