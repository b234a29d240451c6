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

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "meshguard/crypto.hpp"
#include "meshguard/manifest.hpp"
#include "meshguard/selector.hpp"
#include "meshguard/verification.hpp"

namespace meshguard {

/// What the signing tool did to (or found in) one manifest.
struct SigningReport {
  struct FragmentOutcome {
    std::string label;
    std::string resource_name;
    std::string path;
    std::string verdict;  // "Accepted", a failure verdict, or MissingSignature
  };

  std::string manifest_name;
  std::size_t fragments_signed = 0;
  std::vector<std::string> labels;
  bool tombstone = false;
  std::vector<FragmentOutcome> outcomes;  // filled by verify_manifest

  bool all_verified() const;
};

/// Translates the manifest, signs every fragment the verifiable
/// configuration matches, and embeds one annotation per envelope under
/// "meshguard.sig/<label>-<n>". Existing signature annotations are replaced.
/// A manifest nothing matches passes through untouched.
std::pair<Manifest, SigningReport> sign_manifest(const Manifest& manifest,
                                                 const VerifiableConfiguration& vc,
                                                 const KeyPair& keys);

/// Owner authorization to delete (rtype, resource_name), bound to a
/// monotonic per-resource serial chosen by the owner.
Tombstone sign_tombstone(ResourceType rtype, std::string_view resource_name, std::int64_t serial,
                         const KeyPair& keys);

/// Owner-side pre-flight: re-runs translation, matching, and verification
/// exactly as a proxy will, and reports a verdict per matched fragment.
SigningReport verify_manifest(const Manifest& manifest, const VerifiableConfiguration& vc,
                              const PublicKey& owner_key);

}  // namespace meshguard
