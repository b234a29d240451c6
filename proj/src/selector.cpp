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

#include <set>

#include "meshguard/yaml_io.hpp"

namespace meshguard {

bool VerifiableConfiguration::targets(ResourceType rtype) const {
  for (const PolicySelector& selector : selectors) {
    if (selector.rtype == rtype) return true;
  }
  return false;
}

VerifiableConfiguration verifiable_config_from_document(const Document& doc) {
  if (!doc.is_object()) {
    throw Error(Errc::MalformedConfig, "verifiable configuration must be a map");
  }
  VerifiableConfiguration vc;
  const Document* owner = doc.find("owner_key_id");
  if (owner == nullptr || !owner->is_string()) {
    throw Error(Errc::MalformedConfig, "missing string field 'owner_key_id'");
  }
  vc.owner_key_id = owner->as_string();

  const Document* selectors = doc.find("selectors");
  if (selectors == nullptr || !selectors->is_array()) {
    throw Error(Errc::MalformedConfig, "missing sequence field 'selectors'");
  }
  std::set<std::string> labels;
  for (const Document& entry : selectors->as_array()) {
    if (!entry.is_object()) {
      throw Error(Errc::MalformedConfig, "selector entries must be maps");
    }
    PolicySelector selector;
    const Document* label = entry.find("label");
    if (label == nullptr || !label->is_string() || label->as_string().empty()) {
      throw Error(Errc::MalformedConfig, "selector needs a nonempty string 'label'");
    }
    selector.label = label->as_string();
    if (!labels.insert(selector.label).second) {
      throw Error(Errc::DuplicateLabel, "selector label '" + selector.label + "' appears twice");
    }
    const Document* rtype = entry.find("resource_type");
    if (rtype == nullptr || !rtype->is_string()) {
      throw Error(Errc::MalformedConfig, "selector needs a string 'resource_type'");
    }
    auto type = resource_type_from_string(rtype->as_string());
    if (!type) {
      throw Error(Errc::MalformedConfig, "unknown resource type '" + rtype->as_string() + "'");
    }
    selector.rtype = *type;
    const Document* path = entry.find("path");
    if (path == nullptr || !path->is_string()) {
      throw Error(Errc::MalformedConfig, "selector needs a string 'path'");
    }
    selector.path = FragmentPath::parse(path->as_string());
    vc.selectors.push_back(std::move(selector));
  }
  return vc;
}

VerifiableConfiguration parse_verifiable_config(std::string_view text) {
  Document doc;
  try {
    doc = document_from_yaml(text);
  } catch (const Error& ex) {
    throw Error(Errc::MalformedConfig, ex.what());
  }
  return verifiable_config_from_document(doc);
}

Document verifiable_config_to_document(const VerifiableConfiguration& vc) {
  Document::Array selectors;
  selectors.reserve(vc.selectors.size());
  for (const PolicySelector& selector : vc.selectors) {
    selectors.push_back(Document::object({
        {"label", Document(selector.label)},
        {"resource_type", Document(to_string(selector.rtype))},
        {"path", Document(selector.path.render())},
    }));
  }
  return Document::object({
      {"owner_key_id", Document(vc.owner_key_id)},
      {"selectors", Document(std::move(selectors))},
  });
}

std::vector<FragmentMatch> match_resource(const ResourceConfig& resource,
                                          const VerifiableConfiguration& vc) {
  std::vector<FragmentMatch> matches;
  for (const PolicySelector& selector : vc.selectors) {
    if (selector.rtype != resource.rtype) continue;
    for (auto& [concrete_path, fragment] : extract_fragment(resource.body, selector.path)) {
      matches.push_back(FragmentMatch{selector.label, resource.rtype, resource.name,
                                      std::move(concrete_path), std::move(fragment)});
    }
  }
  return matches;
}

}  // namespace meshguard
