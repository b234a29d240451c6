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

#include "meshguard/verification.hpp"

namespace meshguard {

std::vector<FragmentCheck> check_resource_fragments(const ResourceConfig& resource,
                                                    const VerifiableConfiguration& vc,
                                                    const PublicKey& owner_key) {
  std::vector<FragmentCheck> checks;
  for (const FragmentMatch& match : match_resource(resource, vc)) {
    FragmentCheck check;
    check.label = match.selector_label;
    check.path = match.concrete_path.render();
    if (resource.envelopes.empty()) {
      check.failure = kMissingSignature;
    } else {
      for (const SignatureEnvelope& envelope : resource.envelopes) {
        Verdict verdict = verify_fragment(match, envelope, owner_key);
        if (verdict == Verdict::Accepted) {
          check.satisfied = true;
          check.failure.clear();
          break;
        }
        if (check.failure.empty()) {
          check.failure = std::string(to_string(verdict));
        }
      }
    }
    checks.push_back(std::move(check));
  }
  return checks;
}

}  // namespace meshguard
