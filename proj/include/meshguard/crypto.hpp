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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "meshguard/envelope.hpp"
#include "meshguard/resource_type.hpp"
#include "meshguard/selector.hpp"

namespace meshguard {

using PublicKey = std::array<std::uint8_t, 32>;
using SecretSeed = std::array<std::uint8_t, 32>;
using Digest = std::array<std::uint8_t, 32>;

/// Ed25519 keypair. The secret field is the 32-byte seed; key_id is the
/// first 8 bytes of SHA-256(public key), hex encoded.
struct KeyPair {
  std::string key_id;
  PublicKey public_key{};
  SecretSeed secret_seed{};
};

std::string derive_key_id(const PublicKey& public_key);

/// Random keypair.
KeyPair generate_keypair();
/// Deterministic keypair from a 32-byte seed; same seed, same keys.
/// Throws Error(Errc::BadSeedLength) for any other seed size.
KeyPair generate_keypair(std::span<const std::uint8_t> seed);

Digest sha256(std::span<const std::uint8_t> data);
Digest sha256(std::string_view data);

/// The byte sequence actually signed: a domain-separation prefix followed by
/// the length-prefixed context fields (resource type, resource name, path,
/// fragment digest). Length prefixes keep distinct field splits from
/// colliding; the context fields keep a signature from being replayed onto a
/// different resource or path.
std::vector<std::uint8_t> signing_payload(ResourceType rtype, std::string_view resource_name,
                                          std::string_view path, const Digest& fragment_digest);

/// Path marker used in tombstone payloads. NUL bytes cannot appear in a
/// rendered FragmentPath, so tombstone payloads can never collide with
/// fragment payloads.
std::string tombstone_path(std::int64_t serial);

/// Detached signature over an arbitrary payload (used for fragments and
/// tombstones alike).
std::array<std::uint8_t, 64> sign_detached(std::span<const std::uint8_t> payload,
                                           const KeyPair& keys);

SignatureEnvelope sign_fragment(const FragmentMatch& match, const KeyPair& keys);

enum class Verdict {
  Accepted,
  WrongContext,
  DigestMismatch,
  BadSignature,
  UnknownKey,
};

std::string_view to_string(Verdict verdict);

/// Checks one envelope against one matched fragment under the owner key.
/// Every failure mode is a verdict, never an exception: rejecting bad input
/// is this function's normal job.
Verdict verify_fragment(const FragmentMatch& match, const SignatureEnvelope& envelope,
                        const PublicKey& owner_key);

bool verify_tombstone(const Tombstone& tombstone, const PublicKey& owner_key);

// Key files: one header tag line, then 64 hex chars.
inline constexpr std::string_view kSecretKeyHeader = "meshguard-secret-key-v1";
inline constexpr std::string_view kPublicKeyHeader = "meshguard-public-key-v1";

void write_key_files(const KeyPair& keys, const std::string& out_prefix);
KeyPair load_secret_key_file(const std::string& path);
PublicKey load_public_key_file(const std::string& path);

}  // namespace meshguard
