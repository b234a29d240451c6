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

#include "meshguard/resource_type.hpp"

#include <array>
#include <string>
#include <utility>

namespace meshguard {

namespace {

constexpr std::array<std::pair<ResourceType, std::string_view>, 8> kNames = {{
    {ResourceType::Listener, "Listener"},
    {ResourceType::RouteConfiguration, "RouteConfiguration"},
    {ResourceType::ScopedRoute, "ScopedRoute"},
    {ResourceType::VirtualHost, "VirtualHost"},
    {ResourceType::Cluster, "Cluster"},
    {ResourceType::ClusterLoadAssignment, "ClusterLoadAssignment"},
    {ResourceType::Secret, "Secret"},
    {ResourceType::Runtime, "Runtime"},
}};

}  // namespace

std::string_view to_string(ResourceType type) {
  for (const auto& [value, name] : kNames) {
    if (value == type) return name;
  }
  return "Unknown";
}

std::optional<ResourceType> resource_type_from_string(std::string_view name) {
  for (const auto& [value, candidate] : kNames) {
    if (candidate == name) return value;
  }
  return std::nullopt;
}

ResourceType require_resource_type(std::string_view name) {
  auto type = resource_type_from_string(name);
  if (!type) {
    throw Error(Errc::MalformedDocument, "unknown resource type '" + std::string(name) + "'");
  }
  return *type;
}

}  // namespace meshguard
