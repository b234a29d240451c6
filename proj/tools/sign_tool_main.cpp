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

// Offline signing tool for the application owner: keygen, sign, verify,
// tombstone. The secret key never leaves this process.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "meshguard/crypto.hpp"
#include "meshguard/encoding.hpp"
#include "meshguard/manifest.hpp"
#include "meshguard/selector.hpp"
#include "meshguard/signing.hpp"
#include "meshguard/yaml_io.hpp"

namespace {

using namespace meshguard;

int run_keygen(const std::string& seed_hex, const std::string& out_prefix) {
  KeyPair keys;
  if (seed_hex.empty()) {
    keys = generate_keypair();
  } else {
    keys = generate_keypair(hex_decode(seed_hex));
  }
  write_key_files(keys, out_prefix);
  std::cout << "key_id: " << keys.key_id << "\n"
            << "secret: " << out_prefix << ".key\n"
            << "public: " << out_prefix << ".pub\n";
  return 0;
}

int run_sign(const std::string& manifest_path, const std::string& vc_path,
             const std::string& key_path, const std::string& out_path) {
  Manifest manifest = parse_manifest(read_file(manifest_path));
  VerifiableConfiguration vc = parse_verifiable_config(read_file(vc_path));
  KeyPair keys = load_secret_key_file(key_path);
  auto [signed_manifest, report] = sign_manifest(manifest, vc, keys);
  write_file(out_path, canonicalize(manifest_to_document(signed_manifest)));
  std::cout << "manifest: " << report.manifest_name << "\n"
            << "fragments signed: " << report.fragments_signed << "\n";
  for (const std::string& label : report.labels) {
    std::cout << "label: " << label << "\n";
  }
  return 0;
}

int run_verify(const std::string& manifest_path, const std::string& vc_path,
               const std::string& pub_path) {
  Manifest manifest = parse_manifest(read_file(manifest_path));
  VerifiableConfiguration vc = parse_verifiable_config(read_file(vc_path));
  PublicKey owner_key = load_public_key_file(pub_path);
  SigningReport report = verify_manifest(manifest, vc, owner_key);
  if (report.outcomes.empty()) {
    std::cout << "no confidential fragments; nothing to verify\n";
    return 0;
  }
  for (const auto& outcome : report.outcomes) {
    std::cout << outcome.resource_name << " " << outcome.path << " [" << outcome.label
              << "]: " << outcome.verdict << "\n";
  }
  return report.all_verified() ? 0 : 1;
}

int run_tombstone(const std::string& type_name, const std::string& resource_name,
                  std::int64_t serial, const std::string& key_path, const std::string& out_path) {
  auto rtype = resource_type_from_string(type_name);
  if (!rtype) {
    std::cerr << "unknown resource type '" << type_name << "'\n";
    return 2;
  }
  KeyPair keys = load_secret_key_file(key_path);
  Tombstone tombstone = sign_tombstone(*rtype, resource_name, serial, keys);
  write_file(out_path, canonicalize(tombstone.to_document()));
  std::cout << "tombstone for " << type_name << "/" << resource_name << " serial " << serial
            << " written to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"configuration signing tool"};
  app.require_subcommand(1);

  auto* keygen = app.add_subcommand("keygen", "generate an owner keypair");
  std::string seed_hex;
  std::string out_prefix;
  keygen->add_option("--seed-hex", seed_hex, "32-byte seed as 64 hex chars (deterministic keys)");
  keygen->add_option("--out-prefix", out_prefix, "output path prefix")->required();

  auto* sign = app.add_subcommand("sign", "sign a manifest's confidential fragments");
  std::string manifest_path, vc_path, key_path, out_path, pub_path;
  sign->add_option("--manifest", manifest_path, "manifest file")->required();
  sign->add_option("--verifiable-config", vc_path, "verifiable configuration file")->required();
  sign->add_option("--key", key_path, "secret key file")->required();
  sign->add_option("--out", out_path, "annotated manifest output")->required();

  auto* verify = app.add_subcommand("verify", "pre-flight a manifest as a proxy would");
  verify->add_option("--manifest", manifest_path, "manifest file")->required();
  verify->add_option("--verifiable-config", vc_path, "verifiable configuration file")->required();
  verify->add_option("--pub", pub_path, "owner public key file")->required();

  auto* tombstone = app.add_subcommand("tombstone", "sign a deletion authorization");
  std::string type_name, resource_name;
  std::int64_t serial = 0;
  tombstone->add_option("--type", type_name, "resource type")->required();
  tombstone->add_option("--name", resource_name, "resource name")->required();
  tombstone->add_option("--serial", serial, "monotonic serial")->required();
  tombstone->add_option("--key", key_path, "secret key file")->required();
  tombstone->add_option("--out", out_path, "tombstone output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (keygen->parsed()) return run_keygen(seed_hex, out_prefix);
    if (sign->parsed()) return run_sign(manifest_path, vc_path, key_path, out_path);
    if (verify->parsed()) return run_verify(manifest_path, vc_path, pub_path);
    if (tombstone->parsed()) {
      return run_tombstone(type_name, resource_name, serial, key_path, out_path);
    }
  } catch (const meshguard::Error& ex) {
    std::cerr << ex.what() << "\n";
    return 2;
  }
  return 2;
}
