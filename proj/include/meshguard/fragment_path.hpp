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

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "meshguard/document.hpp"

namespace meshguard {

/// Location of a sub-document inside a resource body, e.g.
/// "routes[*].mirror". Keys use the charset [A-Za-z0-9_-]; indices are
/// decimal without leading zeros; "[*]" fans out over array elements.
/// parse() and render() are lossless inverses on accepted inputs.
class FragmentPath {
 public:
  struct Step {
    enum class Kind { Key, Index, Wildcard };
    Kind kind = Kind::Key;
    std::string key;
    std::size_t index = 0;

    static Step make_key(std::string k) { return Step{Kind::Key, std::move(k), 0}; }
    static Step make_index(std::size_t i) { return Step{Kind::Index, {}, i}; }
    static Step make_wildcard() { return Step{Kind::Wildcard, {}, 0}; }
    bool operator==(const Step&) const = default;
  };

  FragmentPath() = default;
  explicit FragmentPath(std::vector<Step> steps) : steps_(std::move(steps)) {}

  /// Throws Error(Errc::BadPath) on anything outside the grammar.
  static FragmentPath parse(std::string_view text);
  std::string render() const;

  const std::vector<Step>& steps() const { return steps_; }
  bool has_wildcard() const;
  bool operator==(const FragmentPath&) const = default;

 private:
  std::vector<Step> steps_;
};

/// All sub-documents of doc matched by path after wildcard expansion, each
/// paired with its fully concrete path. No match is an empty result.
std::vector<std::pair<FragmentPath, Document>> extract_fragment(const Document& doc,
                                                                const FragmentPath& path);

/// Follows a concrete (wildcard-free) path; nullptr when the path does not
/// resolve. Throws Error(Errc::BadPath) if the path contains a wildcard.
const Document* navigate(const Document& doc, const FragmentPath& path);

}  // namespace meshguard
