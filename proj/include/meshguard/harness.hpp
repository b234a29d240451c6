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

#include <string>
#include <utility>
#include <vector>

#include "meshguard/document.hpp"

namespace meshguard::harness {

// The scenario runner spawns one control plane and a set of proxies as real
// processes talking over local sockets, drives them through an attack or
// update sequence, and checks the proxies' status endpoints. Negative
// scenarios pass when the proxies hold their last-known-good state.

struct Options {
  std::string workspace;
  std::string seed_hex;  // 64 hex chars; empty selects a fixed default
  std::string control_plane_bin;  // default: next to the current executable
  std::string proxy_bin;
  int proxy_count = 2;
  bool pass_through = false;  // run proxies with verification disabled
};

struct StepResult {
  std::string kind;  // keygen | sign | apply | delete | tamper | assert
  std::string description;
  bool ok = false;
  std::string detail;
};

struct ScenarioReport {
  std::string name;
  bool pass = false;
  std::vector<std::string> techniques;
  std::vector<StepResult> steps;
};

/// Names of the built-in scenarios, in catalog order.
std::vector<std::string> list_scenarios();

/// Threat-matrix techniques a scenario exercises (>= 1 per scenario).
std::vector<std::string> scenario_techniques(const std::string& name);

/// (kind, description) of every step, for inspection without running.
std::vector<std::pair<std::string, std::string>> scenario_steps(const std::string& name);

/// Techniques the surrounding system addresses only with enclave isolation;
/// reported as out of scope rather than claimed.
const std::vector<std::string>& out_of_scope_techniques();

/// Runs one scenario end to end. Environment problems (missing binaries,
/// spawn failures, ports) throw Error(Errc::SetupFailure); assertion
/// failures are reported in the returned ScenarioReport.
ScenarioReport run_scenario(const std::string& name, const Options& options);

/// Aggregate report document for serialization.
Document report_document(const std::vector<ScenarioReport>& reports);

/// Directory holding the currently running executable.
std::string default_binary_dir();

}  // namespace meshguard::harness
