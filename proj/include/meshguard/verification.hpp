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
#include <vector>

#include "meshguard/crypto.hpp"
#include "meshguard/manifest.hpp"
#include "meshguard/selector.hpp"

namespace meshguard {

/// Reason string used when a matched fragment has no envelopes to try at
/// all. verify_fragment verdicts cover every other failure.
inline constexpr std::string_view kMissingSignature = "MissingSignature";

/// Outcome of checking one matched fragment against a resource's envelopes.
/// One accepted envelope satisfies the fragment; stale or foreign envelopes
/// alongside it are ignored. When nothing is accepted, `failure` holds the
/// first failing verdict (or MissingSignature when there were no envelopes).
struct FragmentCheck {
  std::string label;
  std::string path;
  bool satisfied = false;
  std::string failure;
};

/// The signature check shared by the proxy filter and the signing tool's
/// pre-flight: match the resource against the verifiable configuration, then
/// look for an accepted envelope per matched fragment. An empty result means
/// the resource is entirely non-confidential.
std::vector<FragmentCheck> check_resource_fragments(const ResourceConfig& resource,
                                                    const VerifiableConfiguration& vc,
                                                    const PublicKey& owner_key);

}  // namespace meshguard
