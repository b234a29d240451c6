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
#include <string_view>

#include "meshguard/document.hpp"

namespace meshguard {

/// Parses the YAML-compatible subset used by every on-disk file: maps,
/// sequences, strings, 64-bit integers, booleans, null. Quoted scalars are
/// always strings; plain scalars resolve by content. Duplicate map keys and
/// floating-point scalars throw Error(Errc::MalformedDocument). JSON input
/// (including canonical bytes) is inside the subset.
Document document_from_yaml(std::string_view text);

/// read_file + document_from_yaml.
Document load_document_file(const std::string& path);

}  // namespace meshguard
