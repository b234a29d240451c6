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

#include <optional>
#include <string_view>

#include "meshguard/error.hpp"

namespace meshguard {

/// The discovery-protocol resource catalogue. Manifest translation currently
/// emits RouteConfiguration, Cluster, and Listener; the rest exist so that
/// selectors and envelopes can name any catalogue entry.
enum class ResourceType {
  Listener,
  RouteConfiguration,
  ScopedRoute,
  VirtualHost,
  Cluster,
  ClusterLoadAssignment,
  Secret,
  Runtime,
};

std::string_view to_string(ResourceType type);
std::optional<ResourceType> resource_type_from_string(std::string_view name);

/// from_string that throws Error(Errc::MalformedDocument) on unknown names.
ResourceType require_resource_type(std::string_view name);

}  // namespace meshguard
