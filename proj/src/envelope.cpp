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

#include "meshguard/envelope.hpp"

#include <algorithm>

#include "meshguard/encoding.hpp"

namespace meshguard {

namespace {

template <std::size_t N>
std::array<std::uint8_t, N> fixed_bytes_from_hex(const Document& doc, std::string_view field) {
  std::vector<std::uint8_t> bytes = hex_decode(doc.at(field).as_string());
  if (bytes.size() != N) {
    throw Error(Errc::MalformedDocument,
                "field '" + std::string(field) + "' must be " + std::to_string(N) + " bytes");
  }
  std::array<std::uint8_t, N> out{};
  std::copy(bytes.begin(), bytes.end(), out.begin());
  return out;
}

}  // namespace

Document SignatureEnvelope::to_document() const {
  return Document::object({
      {"key_id", Document(key_id)},
      {"rtype", Document(to_string(rtype))},
      {"name", Document(resource_name)},
      {"path", Document(path)},
      {"digest", Document(hex_encode(fragment_digest))},
      {"signature", Document(hex_encode(signature))},
  });
}

SignatureEnvelope SignatureEnvelope::from_document(const Document& doc) {
  SignatureEnvelope env;
  env.key_id = doc.at("key_id").as_string();
  env.rtype = require_resource_type(doc.at("rtype").as_string());
  env.resource_name = doc.at("name").as_string();
  env.path = doc.at("path").as_string();
  env.fragment_digest = fixed_bytes_from_hex<32>(doc, "digest");
  env.signature = fixed_bytes_from_hex<64>(doc, "signature");
  return env;
}

std::string SignatureEnvelope::to_annotation_value() const {
  return base64_encode(canonicalize(to_document()));
}

SignatureEnvelope SignatureEnvelope::from_annotation_value(std::string_view text) {
  std::vector<std::uint8_t> bytes = base64_decode(text);
  return from_document(
      parse_canonical(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size())));
}

Document Tombstone::to_document() const {
  return Document::object({
      {"key_id", Document(key_id)},
      {"rtype", Document(to_string(rtype))},
      {"name", Document(resource_name)},
      {"serial", Document(serial)},
      {"signature", Document(hex_encode(signature))},
  });
}

Tombstone Tombstone::from_document(const Document& doc) {
  Tombstone tomb;
  tomb.key_id = doc.at("key_id").as_string();
  tomb.rtype = require_resource_type(doc.at("rtype").as_string());
  tomb.resource_name = doc.at("name").as_string();
  tomb.serial = doc.at("serial").as_int();
  if (tomb.serial < 0) {
    throw Error(Errc::MalformedDocument, "tombstone serial must be non-negative");
  }
  tomb.signature = fixed_bytes_from_hex<64>(doc, "signature");
  return tomb;
}

}  // namespace meshguard
