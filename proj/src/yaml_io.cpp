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

#include "meshguard/yaml_io.hpp"

#include <charconv>
#include <cstdlib>

#include <yaml-cpp/yaml.h>

#include "meshguard/encoding.hpp"

namespace meshguard {

namespace {

bool looks_like_integer(std::string_view text) {
  if (text.starts_with('-')) text.remove_prefix(1);
  if (text.empty()) return false;
  for (char c : text) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

bool looks_like_float(const std::string& text) {
  if (text.empty()) return false;
  char first = text.front();
  if (first != '-' && first != '+' && first != '.' && (first < '0' || first > '9')) return false;
  const char* begin = text.c_str();
  char* end = nullptr;
  std::strtod(begin, &end);
  return end == begin + text.size();
}

Document scalar_to_document(const YAML::Node& node) {
  const std::string& text = node.Scalar();
  if (node.Tag() == "!") {
    return Document(text);  // quoted scalar: always a string
  }
  if (text == "null" || text == "Null" || text == "NULL" || text == "~") return Document(nullptr);
  if (text == "true" || text == "True" || text == "TRUE") return Document(true);
  if (text == "false" || text == "False" || text == "FALSE") return Document(false);
  if (looks_like_integer(text)) {
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw Error(Errc::MalformedDocument, "integer out of 64-bit signed range: " + text);
    }
    return Document(value);
  }
  if (looks_like_float(text)) {
    throw Error(Errc::MalformedDocument, "floating-point values are not supported: " + text);
  }
  return Document(text);
}

Document node_to_document(const YAML::Node& node) {
  switch (node.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return Document(nullptr);
    case YAML::NodeType::Scalar:
      return scalar_to_document(node);
    case YAML::NodeType::Sequence: {
      Document::Array items;
      items.reserve(node.size());
      for (const auto& item : node) {
        items.push_back(node_to_document(item));
      }
      return Document(std::move(items));
    }
    case YAML::NodeType::Map: {
      Document::Object object;
      for (const auto& kv : node) {
        if (!kv.first.IsScalar()) {
          throw Error(Errc::MalformedDocument, "map keys must be strings");
        }
        auto [it, inserted] = object.emplace(kv.first.Scalar(), node_to_document(kv.second));
        if (!inserted) {
          throw Error(Errc::MalformedDocument, "duplicate map key '" + it->first + "'");
        }
      }
      return Document(std::move(object));
    }
  }
  throw Error(Errc::MalformedDocument, "unsupported node type");
}

}  // namespace

Document document_from_yaml(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& ex) {
    throw Error(Errc::MalformedDocument, std::string("yaml parse error: ") + ex.what());
  }
  return node_to_document(root);
}

Document load_document_file(const std::string& path) {
  return document_from_yaml(read_file(path));
}

}  // namespace meshguard
