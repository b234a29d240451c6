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

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "meshguard/document.hpp"
#include "meshguard/resource_type.hpp"

namespace meshguard {

/// A detached signature bound to the context it covers: resource type and
/// name, concrete fragment path, and the digest of the canonical fragment
/// bytes. Moving an envelope to a different resource or path makes it fail
/// verification, which is the whole point of carrying the context along.
struct SignatureEnvelope {
  std::string key_id;
  ResourceType rtype = ResourceType::RouteConfiguration;
  std::string resource_name;
  std::string path;  // rendered concrete FragmentPath
  std::array<std::uint8_t, 32> fragment_digest{};
  std::array<std::uint8_t, 64> signature{};

  Document to_document() const;
  static SignatureEnvelope from_document(const Document& doc);

  /// base64 of the canonical document form; the value stored in a manifest
  /// annotation.
  std::string to_annotation_value() const;
  static SignatureEnvelope from_annotation_value(std::string_view text);

  bool operator==(const SignatureEnvelope&) const = default;
};

/// An owner-signed authorization to delete one resource. The serial lets a
/// proxy distinguish a fresh authorization from a rogue re-send of an old
/// one: once honored, only serials >= the pinned value are honored again.
struct Tombstone {
  std::string key_id;
  ResourceType rtype = ResourceType::RouteConfiguration;
  std::string resource_name;
  std::int64_t serial = 0;
  std::array<std::uint8_t, 64> signature{};

  Document to_document() const;
  static Tombstone from_document(const Document& doc);

  bool operator==(const Tombstone&) const = default;
};

inline constexpr std::string_view kSignatureAnnotationPrefix = "meshguard.sig/";

}  // namespace meshguard
