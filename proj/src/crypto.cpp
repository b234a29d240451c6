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

#include "meshguard/crypto.hpp"

#include <mutex>

#include <sodium.h>

#include "meshguard/encoding.hpp"

namespace meshguard {

namespace {

constexpr std::string_view kPayloadPrefix{"meshguard-v1\0", 13};

void ensure_sodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) {
      throw Error(Errc::SetupFailure, "libsodium initialization failed");
    }
  });
}

void append_length_prefixed(std::vector<std::uint8_t>& out, std::span<const std::uint8_t> field) {
  std::uint32_t length = static_cast<std::uint32_t>(field.size());
  out.push_back(static_cast<std::uint8_t>(length >> 24));
  out.push_back(static_cast<std::uint8_t>(length >> 16));
  out.push_back(static_cast<std::uint8_t>(length >> 8));
  out.push_back(static_cast<std::uint8_t>(length));
  out.insert(out.end(), field.begin(), field.end());
}

std::span<const std::uint8_t> as_bytes(std::string_view text) {
  return {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()};
}

KeyPair keypair_from_seed(const SecretSeed& seed) {
  ensure_sodium();
  KeyPair keys;
  keys.secret_seed = seed;
  std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> expanded{};
  crypto_sign_seed_keypair(keys.public_key.data(), expanded.data(), seed.data());
  keys.key_id = derive_key_id(keys.public_key);
  return keys;
}

bool signature_valid(std::span<const std::uint8_t> payload,
                     const std::array<std::uint8_t, 64>& signature, const PublicKey& key) {
  ensure_sodium();
  return crypto_sign_verify_detached(signature.data(), payload.data(), payload.size(),
                                     key.data()) == 0;
}

std::string load_key_hex(const std::string& path, std::string_view expected_header) {
  std::string text = read_file(path);
  std::size_t newline = text.find('\n');
  if (newline == std::string::npos || text.substr(0, newline) != expected_header) {
    throw Error(Errc::IoError, "'" + path + "' lacks the '" + std::string(expected_header) +
                                   "' header line");
  }
  std::string hex = text.substr(newline + 1);
  while (!hex.empty() && (hex.back() == '\n' || hex.back() == '\r')) hex.pop_back();
  return hex;
}

}  // namespace

std::string derive_key_id(const PublicKey& public_key) {
  Digest digest = sha256(public_key);
  return hex_encode(std::span<const std::uint8_t>(digest.data(), 8));
}

KeyPair generate_keypair() {
  ensure_sodium();
  SecretSeed seed{};
  randombytes_buf(seed.data(), seed.size());
  return keypair_from_seed(seed);
}

KeyPair generate_keypair(std::span<const std::uint8_t> seed) {
  if (seed.size() != 32) {
    throw Error(Errc::BadSeedLength,
                "seed must be 32 bytes, got " + std::to_string(seed.size()));
  }
  SecretSeed fixed{};
  std::copy(seed.begin(), seed.end(), fixed.begin());
  return keypair_from_seed(fixed);
}

Digest sha256(std::span<const std::uint8_t> data) {
  ensure_sodium();
  Digest digest{};
  crypto_hash_sha256(digest.data(), data.data(), data.size());
  return digest;
}

Digest sha256(std::string_view data) { return sha256(as_bytes(data)); }

std::vector<std::uint8_t> signing_payload(ResourceType rtype, std::string_view resource_name,
                                          std::string_view path, const Digest& fragment_digest) {
  std::vector<std::uint8_t> out;
  out.reserve(kPayloadPrefix.size() + 16 + resource_name.size() + path.size() + 32 + 24);
  out.insert(out.end(), kPayloadPrefix.begin(), kPayloadPrefix.end());
  append_length_prefixed(out, as_bytes(to_string(rtype)));
  append_length_prefixed(out, as_bytes(resource_name));
  append_length_prefixed(out, as_bytes(path));
  append_length_prefixed(out, fragment_digest);
  return out;
}

std::string tombstone_path(std::int64_t serial) {
  std::string path("\0tombstone\0", 11);
  path += std::to_string(serial);
  return path;
}

std::array<std::uint8_t, 64> sign_detached(std::span<const std::uint8_t> payload,
                                           const KeyPair& keys) {
  ensure_sodium();
  std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> expanded{};
  std::array<std::uint8_t, 32> pub{};
  crypto_sign_seed_keypair(pub.data(), expanded.data(), keys.secret_seed.data());
  std::array<std::uint8_t, 64> signature{};
  crypto_sign_detached(signature.data(), nullptr, payload.data(), payload.size(), expanded.data());
  return signature;
}

SignatureEnvelope sign_fragment(const FragmentMatch& match, const KeyPair& keys) {
  SignatureEnvelope envelope;
  envelope.key_id = keys.key_id;
  envelope.rtype = match.rtype;
  envelope.resource_name = match.resource_name;
  envelope.path = match.concrete_path.render();
  envelope.fragment_digest = sha256(canonicalize(match.fragment));
  envelope.signature = sign_detached(
      signing_payload(envelope.rtype, envelope.resource_name, envelope.path,
                      envelope.fragment_digest),
      keys);
  return envelope;
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Accepted: return "Accepted";
    case Verdict::WrongContext: return "WrongContext";
    case Verdict::DigestMismatch: return "DigestMismatch";
    case Verdict::BadSignature: return "BadSignature";
    case Verdict::UnknownKey: return "UnknownKey";
  }
  return "Unknown";
}

Verdict verify_fragment(const FragmentMatch& match, const SignatureEnvelope& envelope,
                        const PublicKey& owner_key) {
  if (envelope.rtype != match.rtype || envelope.resource_name != match.resource_name ||
      envelope.path != match.concrete_path.render()) {
    return Verdict::WrongContext;
  }
  if (envelope.key_id != derive_key_id(owner_key)) {
    return Verdict::UnknownKey;
  }
  if (envelope.fragment_digest != sha256(canonicalize(match.fragment))) {
    return Verdict::DigestMismatch;
  }
  if (!signature_valid(signing_payload(envelope.rtype, envelope.resource_name, envelope.path,
                                       envelope.fragment_digest),
                       envelope.signature, owner_key)) {
    return Verdict::BadSignature;
  }
  return Verdict::Accepted;
}

bool verify_tombstone(const Tombstone& tombstone, const PublicKey& owner_key) {
  if (tombstone.key_id != derive_key_id(owner_key) || tombstone.serial < 0) {
    return false;
  }
  return signature_valid(signing_payload(tombstone.rtype, tombstone.resource_name,
                                         tombstone_path(tombstone.serial), Digest{}),
                         tombstone.signature, owner_key);
}

void write_key_files(const KeyPair& keys, const std::string& out_prefix) {
  write_file(out_prefix + ".key",
             std::string(kSecretKeyHeader) + "\n" + hex_encode(keys.secret_seed) + "\n");
  write_file(out_prefix + ".pub",
             std::string(kPublicKeyHeader) + "\n" + hex_encode(keys.public_key) + "\n");
}

KeyPair load_secret_key_file(const std::string& path) {
  std::vector<std::uint8_t> seed = hex_decode(load_key_hex(path, kSecretKeyHeader));
  return generate_keypair(seed);
}

PublicKey load_public_key_file(const std::string& path) {
  std::vector<std::uint8_t> bytes = hex_decode(load_key_hex(path, kPublicKeyHeader));
  if (bytes.size() != 32) {
    throw Error(Errc::IoError, "'" + path + "' does not hold a 32-byte public key");
  }
  PublicKey key{};
  std::copy(bytes.begin(), bytes.end(), key.begin());
  return key;
}

}  // namespace meshguard
