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

#include "meshguard/signing.hpp"

#include <algorithm>
#include <map>

namespace meshguard {

bool SigningReport::all_verified() const {
  return std::all_of(outcomes.begin(), outcomes.end(),
                     [](const FragmentOutcome& o) { return o.verdict == "Accepted"; });
}

std::pair<Manifest, SigningReport> sign_manifest(const Manifest& manifest,
                                                 const VerifiableConfiguration& vc,
                                                 const KeyPair& keys) {
  Manifest signed_manifest = manifest;
  std::erase_if(signed_manifest.annotations, [](const auto& kv) {
    return kv.first.starts_with(kSignatureAnnotationPrefix);
  });

  SigningReport report;
  report.manifest_name = manifest.name;

  // Translate the bare manifest (stale envelopes already stripped) so the
  // fragments signed are exactly what a proxy will extract.
  std::map<std::string, std::size_t> per_label_counter;
  for (const ResourceConfig& resource : translate(signed_manifest)) {
    for (const FragmentMatch& match : match_resource(resource, vc)) {
      SignatureEnvelope envelope = sign_fragment(match, keys);
      std::size_t n = per_label_counter[match.selector_label]++;
      std::string key = std::string(kSignatureAnnotationPrefix) + match.selector_label + "-" +
                        std::to_string(n);
      signed_manifest.annotations[key] = envelope.to_annotation_value();
      ++report.fragments_signed;
      if (std::find(report.labels.begin(), report.labels.end(), match.selector_label) ==
          report.labels.end()) {
        report.labels.push_back(match.selector_label);
      }
    }
  }
  return {std::move(signed_manifest), std::move(report)};
}

Tombstone sign_tombstone(ResourceType rtype, std::string_view resource_name, std::int64_t serial,
                         const KeyPair& keys) {
  if (serial < 0) {
    throw Error(Errc::MalformedDocument, "tombstone serial must be non-negative");
  }
  Tombstone tombstone;
  tombstone.key_id = keys.key_id;
  tombstone.rtype = rtype;
  tombstone.resource_name = std::string(resource_name);
  tombstone.serial = serial;
  // Tombstone payloads use the tombstone path marker and an all-zero digest;
  // see tombstone_path for why they cannot collide with fragment payloads.
  tombstone.signature = sign_detached(
      signing_payload(rtype, resource_name, tombstone_path(serial), Digest{}), keys);
  return tombstone;
}

SigningReport verify_manifest(const Manifest& manifest, const VerifiableConfiguration& vc,
                              const PublicKey& owner_key) {
  SigningReport report;
  report.manifest_name = manifest.name;
  for (const ResourceConfig& resource : translate(manifest)) {
    for (const FragmentCheck& check : check_resource_fragments(resource, vc, owner_key)) {
      SigningReport::FragmentOutcome outcome;
      outcome.label = check.label;
      outcome.resource_name = resource.name;
      outcome.path = check.path;
      outcome.verdict = check.satisfied ? "Accepted" : check.failure;
      if (check.satisfied) ++report.fragments_signed;
      if (std::find(report.labels.begin(), report.labels.end(), check.label) ==
          report.labels.end()) {
        report.labels.push_back(check.label);
      }
      report.outcomes.push_back(std::move(outcome));
    }
  }
  return report;
}

}  // namespace meshguard
