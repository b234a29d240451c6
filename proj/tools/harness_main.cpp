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

#include <csignal>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "meshguard/encoding.hpp"
#include "meshguard/harness.hpp"

namespace {

using meshguard::harness::Options;
using meshguard::harness::ScenarioReport;

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const std::string& item : items) {
    if (!out.empty()) out += ", ";
    out += item;
  }
  return out;
}

void print_report(const ScenarioReport& report) {
  std::cout << std::left << std::setw(36) << report.name
            << (report.pass ? "PASS" : "FAIL") << "    " << join(report.techniques) << "\n";
  if (!report.pass) {
    for (const auto& step : report.steps) {
      if (!step.ok) {
        std::cout << "    [" << step.kind << "] " << step.description << ": " << step.detail
                  << "\n";
      }
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"threat scenario runner"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "list the built-in scenarios");

  auto* run = app.add_subcommand("run", "run one scenario or all of them");
  std::string scenario;
  Options options;
  run->add_option("scenario", scenario, "scenario name or 'all'")->required();
  run->add_option("--workspace", options.workspace, "directory for keys, bundles, logs, report")
      ->required();
  run->add_option("--seed", options.seed_hex, "64 hex chars; fixes all generated keys");
  run->add_option("--control-plane-bin", options.control_plane_bin,
                  "path to the control-plane binary");
  run->add_option("--proxy-bin", options.proxy_bin, "path to the proxy binary");
  run->add_option("--proxies", options.proxy_count, "number of proxies to spawn")
      ->check(CLI::Range(1, 16));
  run->add_flag("--pass-through", options.pass_through,
                "spawn proxies with verification disabled (self-test of the harness)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::signal(SIGPIPE, SIG_IGN);

  if (list->parsed()) {
    for (const std::string& name : meshguard::harness::list_scenarios()) {
      std::cout << std::left << std::setw(36) << name
                << join(meshguard::harness::scenario_techniques(name)) << "\n";
    }
    std::cout << "\nout of scope (enclave-only defenses): "
              << join(meshguard::harness::out_of_scope_techniques()) << "\n";
    return 0;
  }

  std::vector<std::string> to_run;
  if (scenario == "all") {
    to_run = meshguard::harness::list_scenarios();
  } else {
    to_run.push_back(scenario);
  }

  std::vector<ScenarioReport> reports;
  try {
    for (const std::string& name : to_run) {
      reports.push_back(meshguard::harness::run_scenario(name, options));
      print_report(reports.back());
    }
  } catch (const meshguard::Error& ex) {
    std::cerr << "setup failure: " << ex.what() << "\n";
    return 2;
  }

  std::string report_path = options.workspace + "/report.json";
  meshguard::write_file(report_path,
                        canonicalize(meshguard::harness::report_document(reports)));

  std::size_t passed = 0;
  for (const ScenarioReport& report : reports) {
    if (report.pass) ++passed;
  }
  std::cout << "\n" << passed << "/" << reports.size() << " scenarios passed; report written to "
            << report_path << "\n";
  return passed == reports.size() ? 0 : 1;
}
