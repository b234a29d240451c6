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

#include "meshguard/manifest.hpp"

#include "meshguard/yaml_io.hpp"

namespace meshguard {

namespace {

bool is_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

bool is_alnum(char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); }

void validate_name(const std::string& name) {
  if (name.empty() || name.size() > 253) {
    throw Error(Errc::InvalidName, "name must be 1..253 characters");
  }
  for (char c : name) {
    if (!is_name_char(c)) {
      throw Error(Errc::InvalidName, "name '" + name + "' contains invalid characters");
    }
  }
  if (!is_alnum(name.front()) || !is_alnum(name.back())) {
    throw Error(Errc::InvalidName, "name '" + name + "' must start and end alphanumeric");
  }
}

std::string_view kind_tag(std::string_view kind) {
  if (kind == kKindVirtualService) return "vs";
  if (kind == kKindAuthorizationPolicy) return "ap";
  if (kind == kKindDestinationRule) return "dr";
  throw Error(Errc::UnknownKind, "unsupported kind '" + std::string(kind) + "'");
}

[[noreturn]] void translation_error(const Manifest& manifest, const std::string& why) {
  throw Error(Errc::TranslationError, manifest.kind + " '" + manifest.name + "': " + why);
}

void require_array_of_objects(const Manifest& manifest, const Document& doc,
                              const std::string& field) {
  if (!doc.is_array()) translation_error(manifest, "'" + field + "' must be a sequence");
  for (const Document& item : doc.as_array()) {
    if (!item.is_object()) {
      translation_error(manifest, "entries of '" + field + "' must be maps");
    }
  }
}

// VirtualService spec: routes (required sequence of maps; each route may
// carry match/destination maps and an optional mirror map with a string
// host), optional hosts (sequence of strings). The body keeps the same
// shape, so selector paths address it as routes[i].mirror.
Document translate_virtual_service(const Manifest& manifest) {
  const Document* routes = manifest.spec.find("routes");
  if (routes == nullptr) translation_error(manifest, "missing 'routes'");
  require_array_of_objects(manifest, *routes, "routes");
  for (const Document& route : routes->as_array()) {
    if (const Document* mirror = route.find("mirror")) {
      if (!mirror->is_object()) translation_error(manifest, "'mirror' must be a map");
      const Document* host = mirror->find("host");
      if (host == nullptr || !host->is_string()) {
        translation_error(manifest, "'mirror.host' must be a string");
      }
    }
    if (const Document* destination = route.find("destination")) {
      if (!destination->is_object()) translation_error(manifest, "'destination' must be a map");
    }
  }
  if (const Document* hosts = manifest.spec.find("hosts")) {
    if (!hosts->is_array()) translation_error(manifest, "'hosts' must be a sequence");
    for (const Document& host : hosts->as_array()) {
      if (!host.is_string()) translation_error(manifest, "'hosts' entries must be strings");
    }
  }
  return manifest.spec;
}

// AuthorizationPolicy spec: optional allow/deny rule sequences, gathered
// under an "rbac" sub-document; remaining spec fields pass through at the
// body top level.
Document translate_authorization_policy(const Manifest& manifest) {
  Document::Object body;
  Document::Object rbac;
  for (const auto& [key, value] : manifest.spec.as_object()) {
    if (key == "allow" || key == "deny") {
      require_array_of_objects(manifest, value, key);
      rbac.emplace(key, value);
    } else {
      body.emplace(key, value);
    }
  }
  body.emplace("rbac", Document(std::move(rbac)));
  return Document(std::move(body));
}

// DestinationRule passes through: optional load_balancer and
// outlier_detection maps, everything else copied verbatim.
Document translate_destination_rule(const Manifest& manifest) {
  for (const char* field : {"load_balancer", "outlier_detection"}) {
    if (const Document* value = manifest.spec.find(field)) {
      if (!value->is_object()) {
        translation_error(manifest, std::string("'") + field + "' must be a map");
      }
    }
  }
  return manifest.spec;
}

}  // namespace

std::string resource_name_for(std::string_view kind, std::string_view manifest_name) {
  return std::string(kind_tag(kind)) + "/" + std::string(manifest_name);
}

Manifest manifest_from_document(const Document& doc) {
  if (!doc.is_object()) {
    throw Error(Errc::MalformedManifest, "manifest must be a map");
  }
  for (const auto& [key, value] : doc.as_object()) {
    if (key != "kind" && key != "name" && key != "spec" && key != "annotations") {
      throw Error(Errc::MalformedManifest, "unknown top-level field '" + key + "'");
    }
  }
  Manifest manifest;
  const Document* kind = doc.find("kind");
  if (kind == nullptr || !kind->is_string()) {
    throw Error(Errc::MalformedManifest, "missing string field 'kind'");
  }
  manifest.kind = kind->as_string();
  kind_tag(manifest.kind);  // UnknownKind check

  const Document* name = doc.find("name");
  if (name == nullptr || !name->is_string()) {
    throw Error(Errc::MalformedManifest, "missing string field 'name'");
  }
  manifest.name = name->as_string();
  validate_name(manifest.name);

  const Document* spec = doc.find("spec");
  if (spec == nullptr || !spec->is_object()) {
    throw Error(Errc::MalformedManifest, "missing map field 'spec'");
  }
  manifest.spec = *spec;

  if (const Document* annotations = doc.find("annotations")) {
    if (!annotations->is_object()) {
      throw Error(Errc::MalformedManifest, "'annotations' must be a map");
    }
    for (const auto& [key, value] : annotations->as_object()) {
      if (!value.is_string()) {
        throw Error(Errc::MalformedManifest, "annotation '" + key + "' must be a string");
      }
      manifest.annotations.emplace(key, value.as_string());
    }
  }

  // Signature annotations must be well-formed envelopes; everything else is
  // opaque.
  for (const auto& [key, value] : manifest.annotations) {
    if (key.starts_with(kSignatureAnnotationPrefix)) {
      try {
        SignatureEnvelope::from_annotation_value(value);
      } catch (const Error& ex) {
        throw Error(Errc::MalformedManifest,
                    "annotation '" + key + "' is not a valid signature envelope: " + ex.what());
      }
    }
  }
  return manifest;
}

Manifest parse_manifest(std::string_view text) {
  Document doc;
  try {
    doc = document_from_yaml(text);
  } catch (const Error& ex) {
    throw Error(Errc::MalformedManifest, ex.what());
  }
  return manifest_from_document(doc);
}

Document manifest_to_document(const Manifest& manifest) {
  Document::Object annotations;
  for (const auto& [key, value] : manifest.annotations) {
    annotations.emplace(key, Document(value));
  }
  return Document::object({
      {"kind", Document(manifest.kind)},
      {"name", Document(manifest.name)},
      {"spec", manifest.spec},
      {"annotations", Document(std::move(annotations))},
  });
}

Document ResourceConfig::to_document() const {
  Document::Array envelope_docs;
  envelope_docs.reserve(envelopes.size());
  for (const SignatureEnvelope& env : envelopes) {
    envelope_docs.push_back(env.to_document());
  }
  return Document::object({
      {"rtype", Document(to_string(rtype))},
      {"name", Document(name)},
      {"body", body},
      {"envelopes", Document(std::move(envelope_docs))},
  });
}

ResourceConfig ResourceConfig::from_document(const Document& doc) {
  ResourceConfig resource;
  resource.rtype = require_resource_type(doc.at("rtype").as_string());
  resource.name = doc.at("name").as_string();
  resource.body = doc.at("body");
  for (const Document& env : doc.at("envelopes").as_array()) {
    resource.envelopes.push_back(SignatureEnvelope::from_document(env));
  }
  return resource;
}

std::vector<ResourceConfig> translate(const Manifest& manifest) {
  if (!manifest.spec.is_object()) {
    throw Error(Errc::TranslationError, "manifest spec must be a map");
  }
  ResourceConfig resource;
  resource.name = resource_name_for(manifest.kind, manifest.name);
  if (manifest.kind == kKindVirtualService) {
    resource.rtype = ResourceType::RouteConfiguration;
    resource.body = translate_virtual_service(manifest);
  } else if (manifest.kind == kKindAuthorizationPolicy) {
    resource.rtype = ResourceType::Listener;
    resource.body = translate_authorization_policy(manifest);
  } else if (manifest.kind == kKindDestinationRule) {
    resource.rtype = ResourceType::Cluster;
    resource.body = translate_destination_rule(manifest);
  } else {
    throw Error(Errc::UnknownKind, "unsupported kind '" + manifest.kind + "'");
  }

  // Annotation envelopes travel with the manifest's resource untouched; the
  // verifier decides whether their context actually matches.
  for (const auto& [key, value] : manifest.annotations) {
    if (key.starts_with(kSignatureAnnotationPrefix)) {
      try {
        resource.envelopes.push_back(SignatureEnvelope::from_annotation_value(value));
      } catch (const Error& ex) {
        throw Error(Errc::MalformedManifest,
                    "annotation '" + key + "' is not a valid signature envelope: " + ex.what());
      }
    }
  }
  return {std::move(resource)};
}

}  // namespace meshguard
