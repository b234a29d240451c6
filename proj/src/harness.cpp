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

#include "meshguard/harness.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <thread>

#include <httplib.h>

#include "meshguard/control_plane.hpp"
#include "meshguard/crypto.hpp"
#include "meshguard/encoding.hpp"
#include "meshguard/manifest.hpp"
#include "meshguard/proxy.hpp"
#include "meshguard/selector.hpp"
#include "meshguard/signing.hpp"
#include "meshguard/wire.hpp"

namespace meshguard::harness {

namespace {

using namespace std::chrono_literals;

constexpr auto kReadyTimeout = 10s;
constexpr auto kAssertTimeout = 8s;
constexpr auto kPollInterval = 25ms;

// Scenario assertion failure - an expected outcome did not happen. Setup
// problems use Error(Errc::SetupFailure) instead.
class StepFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Child process management

class Subprocess {
 public:
  Subprocess(std::vector<std::string> argv, const std::string& stderr_log_path) {
    int out_pipe[2];
    if (::pipe(out_pipe) != 0) {
      throw Error(Errc::SetupFailure, std::string("pipe failed: ") + std::strerror(errno));
    }
    int log_fd = ::open(stderr_log_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (log_fd < 0) {
      ::close(out_pipe[0]);
      ::close(out_pipe[1]);
      throw Error(Errc::SetupFailure, "cannot open log file " + stderr_log_path);
    }
    pid_ = ::fork();
    if (pid_ < 0) {
      ::close(out_pipe[0]);
      ::close(out_pipe[1]);
      ::close(log_fd);
      throw Error(Errc::SetupFailure, std::string("fork failed: ") + std::strerror(errno));
    }
    if (pid_ == 0) {
      ::dup2(out_pipe[1], STDOUT_FILENO);
      ::dup2(log_fd, STDERR_FILENO);
      ::close(out_pipe[0]);
      ::close(out_pipe[1]);
      ::close(log_fd);
      std::vector<char*> args;
      args.reserve(argv.size() + 1);
      for (std::string& arg : argv) args.push_back(arg.data());
      args.push_back(nullptr);
      ::execv(args[0], args.data());
      ::fprintf(stderr, "exec %s failed: %s\n", args[0], std::strerror(errno));
      ::_exit(127);
    }
    ::close(out_pipe[1]);
    ::close(log_fd);
    stdout_fd_ = out_pipe[0];
    name_ = argv.empty() ? "?" : argv[0];
  }

  ~Subprocess() { terminate(); }

  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  /// Reads stdout until a line starting with "READY" arrives.
  std::string wait_ready() {
    std::string line;
    auto deadline = std::chrono::steady_clock::now() + kReadyTimeout;
    while (std::chrono::steady_clock::now() < deadline) {
      pollfd pfd{stdout_fd_, POLLIN, 0};
      int rc = ::poll(&pfd, 1, 100);
      if (rc <= 0) continue;
      char c = 0;
      ssize_t got = ::read(stdout_fd_, &c, 1);
      if (got <= 0) {
        throw Error(Errc::SetupFailure, name_ + " exited before becoming ready");
      }
      if (c == '\n') {
        if (line.starts_with("READY")) return line;
        line.clear();
      } else {
        line.push_back(c);
      }
    }
    throw Error(Errc::SetupFailure, name_ + " did not become ready in time");
  }

  void terminate() {
    if (pid_ <= 0) return;
    ::kill(pid_, SIGTERM);
    for (int i = 0; i < 40; ++i) {
      int status = 0;
      if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        break;
      }
      std::this_thread::sleep_for(50ms);
    }
    if (pid_ > 0) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
      pid_ = -1;
    }
    if (stdout_fd_ >= 0) {
      ::close(stdout_fd_);
      stdout_fd_ = -1;
    }
  }

 private:
  pid_t pid_ = -1;
  int stdout_fd_ = -1;
  std::string name_;
};

std::map<std::string, std::string> parse_ready_line(const std::string& line) {
  // "READY key=value key=value"
  std::map<std::string, std::string> out;
  std::size_t pos = line.find(' ');
  while (pos != std::string::npos) {
    std::size_t next = line.find(' ', pos + 1);
    std::string token = line.substr(pos + 1, next == std::string::npos ? next : next - pos - 1);
    std::size_t eq = token.find('=');
    if (eq != std::string::npos) {
      out[token.substr(0, eq)] = token.substr(eq + 1);
    }
    pos = next;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Clients

class AdminClient {
 public:
  AdminClient(const std::string& host, std::uint16_t port) : fd_(connect_tcp(host, port)) {}
  ~AdminClient() {
    if (fd_ >= 0) ::close(fd_);
  }
  AdminClient(const AdminClient&) = delete;
  AdminClient& operator=(const AdminClient&) = delete;

  Document command(const Document& doc) {
    send_frame(fd_, canonicalize(doc));
    std::optional<std::string> reply = recv_frame(fd_);
    if (!reply) {
      throw Error(Errc::WireError, "admin connection closed");
    }
    return parse_canonical(*reply);
  }

  /// Applies a manifest; returns the new store version.
  std::string apply(const Manifest& manifest) {
    Document reply = command(Document::object(
        {{"cmd", Document("apply")}, {"manifest", manifest_to_document(manifest)}}));
    if (!reply.at("ok").as_bool()) {
      throw StepFailure("apply rejected: " + reply.at("error").as_string());
    }
    return reply.at("version").as_string();
  }

  std::string remove(const std::string& kind, const std::string& name,
                     const std::optional<Tombstone>& tombstone) {
    Document::Object cmd{{"cmd", Document("delete")},
                         {"kind", Document(kind)},
                         {"name", Document(name)}};
    if (tombstone) cmd.emplace("tombstone", tombstone->to_document());
    Document reply = command(Document(std::move(cmd)));
    if (!reply.at("ok").as_bool()) {
      throw StepFailure("delete rejected: " + reply.at("error").as_string());
    }
    return reply.at("version").as_string();
  }

 private:
  int fd_;
};

Document http_get_document(std::uint16_t port, const std::string& path) {
  httplib::Client client("127.0.0.1", port);
  client.set_connection_timeout(2, 0);
  client.set_read_timeout(2, 0);
  auto res = client.Get(path);
  if (!res || res->status != 200) {
    throw StepFailure("GET " + path + " on port " + std::to_string(port) + " failed");
  }
  return parse_canonical(res->body);
}

// ---------------------------------------------------------------------------
// Scenario context and helpers

struct ScenarioContext {
  const Options* options = nullptr;
  std::string dir;
  KeyPair owner;
  VerifiableConfiguration vc;
  std::unique_ptr<Subprocess> control_plane;
  std::vector<std::unique_ptr<Subprocess>> proxies;
  std::unique_ptr<AdminClient> admin;
  std::vector<std::uint16_t> proxy_status_ports;
  std::map<std::string, Manifest> manifests;  // working set built up by steps
  std::string last_version;
};

Document proxy_state(const ScenarioContext& ctx, std::size_t i) {
  return http_get_document(ctx.proxy_status_ports.at(i), "/state");
}

const Document* find_resource(const Document& state, ResourceType rtype,
                              const std::string& name) {
  for (const Document& resource : state.at("resources").as_array()) {
    if (resource.at("rtype").as_string() == to_string(rtype) &&
        resource.at("name").as_string() == name) {
      return &resource;
    }
  }
  return nullptr;
}

bool rejection_logged(const ScenarioContext& ctx, std::size_t i, const std::string& name,
                      const std::string& reason_substring) {
  Document doc = http_get_document(ctx.proxy_status_ports.at(i), "/rejections");
  for (const Document& record : doc.at("rejections").as_array()) {
    if (record.at("name").as_string() == name &&
        record.at("reason").as_string().find(reason_substring) != std::string::npos) {
      return true;
    }
  }
  return false;
}

/// Polls until pred() holds on every proxy; throws StepFailure on timeout.
void wait_all_proxies(const ScenarioContext& ctx, const std::string& what,
                      const std::function<bool(const Document& state)>& pred) {
  auto deadline = std::chrono::steady_clock::now() + kAssertTimeout;
  std::string last_status;
  while (std::chrono::steady_clock::now() < deadline) {
    bool all_ok = true;
    for (std::size_t i = 0; i < ctx.proxy_status_ports.size(); ++i) {
      Document state = proxy_state(ctx, i);
      if (state.at("version").as_string() != ctx.last_version || !pred(state)) {
        all_ok = false;
        last_status = "proxy " + std::to_string(i) + " at version '" +
                      state.at("version").as_string() + "' (want '" + ctx.last_version + "')";
        break;
      }
    }
    if (all_ok) return;
    std::this_thread::sleep_for(kPollInterval);
  }
  throw StepFailure("timeout waiting for: " + what + " [" + last_status + "]");
}

/// Polls until every proxy has logged a matching rejection.
void wait_rejection(const ScenarioContext& ctx, const std::string& name,
                    const std::string& reason_substring) {
  auto deadline = std::chrono::steady_clock::now() + kAssertTimeout;
  while (std::chrono::steady_clock::now() < deadline) {
    bool all_ok = true;
    for (std::size_t i = 0; i < ctx.proxy_status_ports.size(); ++i) {
      if (!rejection_logged(ctx, i, name, reason_substring)) {
        all_ok = false;
        break;
      }
    }
    if (all_ok) return;
    std::this_thread::sleep_for(kPollInterval);
  }
  throw StepFailure("timeout waiting for rejection of " + name + " with reason containing '" +
                    reason_substring + "'");
}

// Standard scenario material.

Manifest virtual_service_manifest(const std::string& name, const std::string& mirror_host) {
  Manifest manifest;
  manifest.kind = std::string(kKindVirtualService);
  manifest.name = name;
  manifest.spec = Document::object({
      {"hosts", Document::array({Document("app.svc.cluster.local")})},
      {"routes", Document::array({Document::object({
          {"match", Document::object({{"prefix", Document("/")}})},
          {"destination", Document::object({{"host", Document("app.svc.cluster.local")},
                                            {"port", Document(8080)}})},
          {"mirror", Document::object({{"host", Document(mirror_host)},
                                       {"percentage_bp", Document(10000)}})},
      })})},
  });
  return manifest;
}

Manifest authorization_policy_manifest(const std::string& name) {
  Manifest manifest;
  manifest.kind = std::string(kKindAuthorizationPolicy);
  manifest.name = name;
  manifest.spec = Document::object({
      {"deny", Document::array({Document::object({
          {"source", Document("0.0.0.0/0")},
          {"operation", Document("CONNECT")},
      })})},
  });
  return manifest;
}

Manifest destination_rule_manifest(const std::string& name) {
  Manifest manifest;
  manifest.kind = std::string(kKindDestinationRule);
  manifest.name = name;
  manifest.spec = Document::object({
      {"host", Document("app.svc.cluster.local")},
      {"load_balancer", Document::object({{"policy", Document("ROUND_ROBIN")}})},
      {"outlier_detection", Document::object({{"consecutive_errors", Document(5)},
                                              {"interval_ms", Document(10000)}})},
  });
  return manifest;
}

constexpr const char* kMirrorHost = "mirror.backup.svc";
constexpr const char* kRogueHost = "exfiltrate.attacker.svc";
const std::string kRouteResource = "vs/app";

// Step helpers shared by several scenarios.

void step_sign_app(ScenarioContext& ctx) {
  auto [signed_manifest, report] =
      sign_manifest(virtual_service_manifest("app", kMirrorHost), ctx.vc, ctx.owner);
  if (report.fragments_signed != 1) {
    throw StepFailure("expected 1 signed fragment, got " +
                      std::to_string(report.fragments_signed));
  }
  ctx.manifests["app"] = std::move(signed_manifest);
}

void step_apply_app(ScenarioContext& ctx) {
  ctx.last_version = ctx.admin->apply(ctx.manifests.at("app"));
}

void step_assert_app_applied(ScenarioContext& ctx) {
  wait_all_proxies(ctx, "signed route configuration applied", [](const Document& state) {
    const Document* resource = find_resource(state, ResourceType::RouteConfiguration,
                                             kRouteResource);
    if (resource == nullptr) return false;
    const Document* mirror =
        navigate(resource->at("body"), FragmentPath::parse("routes[0].mirror.host"));
    return mirror != nullptr && mirror->is_string() && mirror->as_string() == kMirrorHost;
  });
}

// ---------------------------------------------------------------------------
// Scenario catalog

struct StepDef {
  std::string kind;
  std::string description;
  std::function<void(ScenarioContext&)> run;
};

struct ScenarioDef {
  std::string name;
  std::vector<std::string> techniques;
  std::vector<StepDef> steps;
};

std::vector<ScenarioDef> build_catalog() {
  std::vector<ScenarioDef> catalog;

  catalog.push_back(ScenarioDef{
      "legit-signed-update",
      {"resource-hijacking"},
      {
          {"sign", "owner signs a VirtualService carrying a mirror policy", step_sign_app},
          {"apply", "admin applies the signed manifest", step_apply_app},
          {"assert", "all proxies apply the mirror policy", step_assert_app_applied},
      }});

  catalog.push_back(ScenarioDef{
      "legit-tombstone-delete",
      {"data-destruction"},
      {
          {"sign", "owner signs a VirtualService carrying a mirror policy", step_sign_app},
          {"apply", "admin applies the signed manifest", step_apply_app},
          {"assert", "all proxies apply the mirror policy", step_assert_app_applied},
          {"delete", "admin deletes with an owner tombstone (serial 0)",
           [](ScenarioContext& ctx) {
             Tombstone tombstone =
                 sign_tombstone(ResourceType::RouteConfiguration, kRouteResource, 0, ctx.owner);
             ctx.last_version =
                 ctx.admin->remove(std::string(kKindVirtualService), "app", tombstone);
           }},
          {"assert", "all proxies drop the resource and pin serial 0",
           [](ScenarioContext& ctx) {
             wait_all_proxies(ctx, "resource deleted", [](const Document& state) {
               if (find_resource(state, ResourceType::RouteConfiguration, kRouteResource) !=
                   nullptr) {
                 return false;
               }
               for (const Document& pin : state.at("pinned").as_array()) {
                 if (pin.at("name").as_string() == kRouteResource &&
                     pin.at("serial").as_int() == 0) {
                   return true;
                 }
               }
               return false;
             });
           }},
      }});

  catalog.push_back(ScenarioDef{
      "rogue-create",
      {"resource-hijacking", "sidecar-injection"},
      {
          {"apply", "admin applies an unsigned VirtualService with a mirror policy",
           [](ScenarioContext& ctx) {
             ctx.last_version = ctx.admin->apply(virtual_service_manifest("app", kRogueHost));
           }},
          {"assert", "all proxies discard it and log MissingSignature",
           [](ScenarioContext& ctx) {
             wait_all_proxies(ctx, "rogue resource absent", [](const Document& state) {
               return find_resource(state, ResourceType::RouteConfiguration, kRouteResource) ==
                      nullptr;
             });
             wait_rejection(ctx, kRouteResource, "MissingSignature");
           }},
      }});

  catalog.push_back(ScenarioDef{
      "rogue-modify",
      {"resource-hijacking"},
      {
          {"sign", "owner signs a VirtualService carrying a mirror policy", step_sign_app},
          {"apply", "admin applies the signed manifest", step_apply_app},
          {"assert", "all proxies apply the mirror policy", step_assert_app_applied},
          {"tamper", "admin redirects the mirror host after signing and re-applies",
           [](ScenarioContext& ctx) {
             Manifest tampered = ctx.manifests.at("app");
             Document::Object& mirror = tampered.spec.as_object()
                                            .at("routes")
                                            .as_array()[0]
                                            .as_object()
                                            .at("mirror")
                                            .as_object();
             mirror.insert_or_assign("host", Document(kRogueHost));
             ctx.last_version = ctx.admin->apply(tampered);
           }},
          {"assert", "all proxies retain the owner's mirror host and log DigestMismatch",
           [](ScenarioContext& ctx) {
             step_assert_app_applied(ctx);
             wait_rejection(ctx, kRouteResource, "DigestMismatch");
           }},
      }});

  catalog.push_back(ScenarioDef{
      "rogue-delete",
      {"data-destruction"},
      {
          {"sign", "owner signs a VirtualService carrying a mirror policy", step_sign_app},
          {"apply", "admin applies the signed manifest", step_apply_app},
          {"assert", "all proxies apply the mirror policy", step_assert_app_applied},
          {"delete", "admin deletes the manifest without a tombstone",
           [](ScenarioContext& ctx) {
             ctx.last_version =
                 ctx.admin->remove(std::string(kKindVirtualService), "app", std::nullopt);
           }},
          {"assert", "all proxies retain the resource and log the refused deletion",
           [](ScenarioContext& ctx) {
             step_assert_app_applied(ctx);
             wait_rejection(ctx, kRouteResource, "DeletionRefused");
           }},
      }});

  catalog.push_back(ScenarioDef{
      "strip-signatures",
      {"resource-hijacking"},
      {
          {"sign", "owner signs a VirtualService carrying a mirror policy", step_sign_app},
          {"apply", "admin applies the signed manifest", step_apply_app},
          {"assert", "all proxies apply the mirror policy", step_assert_app_applied},
          {"tamper", "admin strips the signature annotations and re-applies",
           [](ScenarioContext& ctx) {
             Manifest stripped = ctx.manifests.at("app");
             stripped.annotations.clear();
             ctx.last_version = ctx.admin->apply(stripped);
           }},
          {"assert", "all proxies retain last-known-good and log MissingSignature",
           [](ScenarioContext& ctx) {
             step_assert_app_applied(ctx);
             wait_rejection(ctx, kRouteResource, "MissingSignature");
           }},
      }});

  catalog.push_back(ScenarioDef{
      "cross-resource-signature-replay",
      {"resource-hijacking"},
      {
          {"sign", "owner signs VirtualService 'app'", step_sign_app},
          {"apply", "admin applies the signed manifest", step_apply_app},
          {"assert", "all proxies apply the mirror policy", step_assert_app_applied},
          {"tamper", "admin replays app's signatures onto VirtualService 'app2'",
           [](ScenarioContext& ctx) {
             Manifest replayed = virtual_service_manifest("app2", kMirrorHost);
             replayed.annotations = ctx.manifests.at("app").annotations;
             ctx.last_version = ctx.admin->apply(replayed);
           }},
          {"assert", "all proxies reject 'app2' with WrongContext and keep 'app'",
           [](ScenarioContext& ctx) {
             wait_all_proxies(ctx, "replayed resource absent", [](const Document& state) {
               return find_resource(state, ResourceType::RouteConfiguration, "vs/app2") ==
                          nullptr &&
                      find_resource(state, ResourceType::RouteConfiguration, kRouteResource) !=
                          nullptr;
             });
             wait_rejection(ctx, "vs/app2", "WrongContext");
           }},
      }});

  catalog.push_back(ScenarioDef{
      "nonconfidential-passthrough",
      {"denial-of-service"},
      {
          {"apply", "admin applies an unsigned DestinationRule",
           [](ScenarioContext& ctx) {
             ctx.last_version = ctx.admin->apply(destination_rule_manifest("app"));
           }},
          {"assert", "all proxies apply it without any signature",
           [](ScenarioContext& ctx) {
             wait_all_proxies(ctx, "cluster applied", [](const Document& state) {
               return find_resource(state, ResourceType::Cluster, "dr/app") != nullptr;
             });
           }},
      }});

  catalog.push_back(ScenarioDef{
      "multi-proxy-fanout",
      {"denial-of-service"},
      {
          {"sign", "owner signs a VirtualService and an AuthorizationPolicy",
           [](ScenarioContext& ctx) {
             step_sign_app(ctx);
             auto [signed_ap, report] =
                 sign_manifest(authorization_policy_manifest("deny-all"), ctx.vc, ctx.owner);
             if (report.fragments_signed != 1) {
               throw StepFailure("expected 1 signed rbac fragment, got " +
                                 std::to_string(report.fragments_signed));
             }
             ctx.manifests["deny-all"] = std::move(signed_ap);
           }},
          {"apply", "admin applies both manifests",
           [](ScenarioContext& ctx) {
             ctx.admin->apply(ctx.manifests.at("app"));
             ctx.last_version = ctx.admin->apply(ctx.manifests.at("deny-all"));
           }},
          {"assert", "every proxy converges to the same two-resource state",
           [](ScenarioContext& ctx) {
             wait_all_proxies(ctx, "both resources applied", [](const Document& state) {
               return find_resource(state, ResourceType::RouteConfiguration, kRouteResource) !=
                          nullptr &&
                      find_resource(state, ResourceType::Listener, "ap/deny-all") != nullptr;
             });
             // Byte-level convergence across proxies.
             Document first = proxy_state(ctx, 0).at("resources");
             for (std::size_t i = 1; i < ctx.proxy_status_ports.size(); ++i) {
               if (canonicalize(proxy_state(ctx, i).at("resources")) != canonicalize(first)) {
                 throw StepFailure("proxy " + std::to_string(i) +
                                   " state differs from proxy 0");
               }
             }
           }},
      }});

  return catalog;
}

const std::vector<ScenarioDef>& catalog() {
  static const std::vector<ScenarioDef> scenarios = build_catalog();
  return scenarios;
}

const ScenarioDef& find_scenario(const std::string& name) {
  for (const ScenarioDef& scenario : catalog()) {
    if (scenario.name == name) return scenario;
  }
  throw Error(Errc::NotFound, "unknown scenario '" + name + "'");
}

VerifiableConfiguration standard_vc(const KeyPair& owner) {
  VerifiableConfiguration vc;
  vc.owner_key_id = owner.key_id;
  vc.selectors.push_back(PolicySelector{ResourceType::RouteConfiguration,
                                        FragmentPath::parse("routes[*].mirror"),
                                        "request-mirroring"});
  vc.selectors.push_back(
      PolicySelector{ResourceType::Listener, FragmentPath::parse("rbac"), "rbac-policy"});
  return vc;
}

SecretSeed scenario_seed(const Options& options, const std::string& name) {
  std::vector<std::uint8_t> base;
  if (options.seed_hex.empty()) {
    base.assign(32, 0x5a);
  } else {
    base = hex_decode(options.seed_hex);
    if (base.size() != 32) {
      throw Error(Errc::SetupFailure, "--seed must be 64 hex characters");
    }
  }
  base.insert(base.end(), name.begin(), name.end());
  return sha256(base);
}

void setup_mesh(ScenarioContext& ctx, const std::string& scenario_name) {
  const Options& options = *ctx.options;
  namespace fs = std::filesystem;
  ctx.dir = options.workspace + "/" + scenario_name;
  fs::create_directories(ctx.dir);

  SecretSeed seed = scenario_seed(options, scenario_name);
  ctx.owner = generate_keypair(seed);
  ctx.vc = standard_vc(ctx.owner);
  write_key_files(ctx.owner, ctx.dir + "/owner");
  write_file(ctx.dir + "/verifiable-config.json", canonicalize(verifiable_config_to_document(ctx.vc)));

  TrustBundle bundle;
  bundle.owner_public_key = ctx.owner.public_key;
  bundle.verifiable_config = ctx.vc;
  std::string bundle_path = ctx.dir + "/trust-bundle.json";
  write_file(bundle_path, canonicalize(trust_bundle_to_document(bundle)));

  std::string cp_bin = options.control_plane_bin.empty()
                           ? default_binary_dir() + "/control-plane"
                           : options.control_plane_bin;
  std::string proxy_bin =
      options.proxy_bin.empty() ? default_binary_dir() + "/proxy" : options.proxy_bin;

  ctx.control_plane = std::make_unique<Subprocess>(
      std::vector<std::string>{cp_bin, "--listen", "127.0.0.1:0", "--admin", "127.0.0.1:0"},
      ctx.dir + "/control-plane.log");
  auto cp_ready = parse_ready_line(ctx.control_plane->wait_ready());
  HostPort xds = parse_hostport(cp_ready.at("xds"));
  HostPort admin = parse_hostport(cp_ready.at("admin"));

  for (int i = 0; i < options.proxy_count; ++i) {
    std::string node_id = "proxy-" + std::to_string(i);
    std::vector<std::string> argv{proxy_bin,
                                  "--bundle",
                                  bundle_path,
                                  "--control-plane",
                                  xds.host + ":" + std::to_string(xds.port),
                                  "--status",
                                  "127.0.0.1:0",
                                  "--node-id",
                                  node_id};
    if (options.pass_through) argv.push_back("--pass-through");
    ctx.proxies.push_back(
        std::make_unique<Subprocess>(std::move(argv), ctx.dir + "/" + node_id + ".log"));
    auto ready = parse_ready_line(ctx.proxies.back()->wait_ready());
    ctx.proxy_status_ports.push_back(parse_hostport(ready.at("status")).port);
  }

  ctx.admin = std::make_unique<AdminClient>(admin.host, admin.port);

  // Initial sync: every proxy has processed the empty state of the world.
  ctx.last_version = "0";
  auto deadline = std::chrono::steady_clock::now() + kReadyTimeout;
  while (true) {
    bool synced = true;
    for (std::size_t i = 0; i < ctx.proxy_status_ports.size(); ++i) {
      try {
        if (proxy_state(ctx, i).at("version").as_string() != "0") synced = false;
      } catch (const StepFailure&) {
        synced = false;
      }
      if (!synced) break;
    }
    if (synced) break;
    if (std::chrono::steady_clock::now() > deadline) {
      throw Error(Errc::SetupFailure, "proxies did not sync with the control plane");
    }
    std::this_thread::sleep_for(kPollInterval);
  }
}

}  // namespace

std::vector<std::string> list_scenarios() {
  std::vector<std::string> names;
  for (const ScenarioDef& scenario : catalog()) names.push_back(scenario.name);
  return names;
}

std::vector<std::string> scenario_techniques(const std::string& name) {
  return find_scenario(name).techniques;
}

std::vector<std::pair<std::string, std::string>> scenario_steps(const std::string& name) {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("keygen", "generate owner keypair, verifiable configuration, trust bundles");
  for (const StepDef& step : find_scenario(name).steps) {
    out.emplace_back(step.kind, step.description);
  }
  return out;
}

const std::vector<std::string>& out_of_scope_techniques() {
  static const std::vector<std::string> techniques = {
      "exec-into-container",
      "compromised-images-in-registry",
  };
  return techniques;
}

ScenarioReport run_scenario(const std::string& name, const Options& options) {
  const ScenarioDef& scenario = find_scenario(name);
  ScenarioReport report;
  report.name = name;
  report.techniques = scenario.techniques;

  ScenarioContext ctx;
  ctx.options = &options;
  setup_mesh(ctx, name);
  report.steps.push_back({"keygen",
                          "generate owner keypair, verifiable configuration, trust bundles",
                          true,
                          "key_id=" + ctx.owner.key_id});

  bool failed = false;
  for (const StepDef& step : scenario.steps) {
    StepResult result;
    result.kind = step.kind;
    result.description = step.description;
    if (failed) {
      result.ok = false;
      result.detail = "not run (earlier step failed)";
    } else {
      try {
        step.run(ctx);
        result.ok = true;
      } catch (const StepFailure& ex) {
        result.ok = false;
        result.detail = ex.what();
        failed = true;
      } catch (const Error& ex) {
        result.ok = false;
        result.detail = ex.what();
        failed = true;
      }
    }
    report.steps.push_back(std::move(result));
  }
  report.pass = !failed;
  return report;
}

Document report_document(const std::vector<ScenarioReport>& reports) {
  Document::Array scenario_docs;
  bool all_pass = true;
  for (const ScenarioReport& report : reports) {
    all_pass = all_pass && report.pass;
    Document::Array steps;
    for (const StepResult& step : report.steps) {
      steps.push_back(Document::object({
          {"kind", Document(step.kind)},
          {"description", Document(step.description)},
          {"ok", Document(step.ok)},
          {"detail", Document(step.detail)},
      }));
    }
    Document::Array techniques;
    for (const std::string& technique : report.techniques) {
      techniques.push_back(Document(technique));
    }
    scenario_docs.push_back(Document::object({
        {"name", Document(report.name)},
        {"pass", Document(report.pass)},
        {"techniques", Document(std::move(techniques))},
        {"steps", Document(std::move(steps))},
    }));
  }
  Document::Array out_of_scope;
  for (const std::string& technique : out_of_scope_techniques()) {
    out_of_scope.push_back(Document(technique));
  }
  return Document::object({
      {"all_pass", Document(all_pass)},
      {"scenarios", Document(std::move(scenario_docs))},
      {"out_of_scope_techniques", Document(std::move(out_of_scope))},
  });
}

std::string default_binary_dir() {
  char buf[4096];
  ssize_t len = ::readlink("/proc/self/exe", buf, sizeof(buf) - 1);
  if (len <= 0) {
    throw Error(Errc::SetupFailure, "cannot resolve /proc/self/exe");
  }
  buf[len] = '\0';
  return std::filesystem::path(buf).parent_path().string();
}

}  // namespace meshguard::harness
