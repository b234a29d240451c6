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

#include <cstdint>
#include <initializer_list>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "meshguard/error.hpp"

namespace meshguard {

/// A configuration value tree: null, boolean, 64-bit signed integer, UTF-8
/// string, array, or string-keyed object. Floating-point values are excluded
/// on purpose: every Document must have exactly one canonical byte form, and
/// float formatting is where implementations disagree.
///
/// Objects are kept in sorted key order, which makes canonicalize() a plain
/// in-order walk and makes two Documents equal iff their canonical bytes are.
class Document {
 public:
  using Array = std::vector<Document>;
  using Object = std::map<std::string, Document>;

  Document() : value_(nullptr) {}
  Document(std::nullptr_t) : value_(nullptr) {}
  Document(bool value) : value_(value) {}
  Document(std::int64_t value) : value_(value) {}
  Document(int value) : value_(static_cast<std::int64_t>(value)) {}
  Document(std::string value) : value_(std::move(value)) {}
  Document(std::string_view value) : value_(std::string(value)) {}
  Document(const char* value) : value_(std::string(value)) {}
  Document(Array value) : value_(std::move(value)) {}
  Document(Object value) : value_(std::move(value)) {}

  static Document object(std::initializer_list<std::pair<const std::string, Document>> init) {
    return Document(Object(init));
  }
  static Document array(std::initializer_list<Document> init) { return Document(Array(init)); }

  bool is_null() const { return std::holds_alternative<std::nullptr_t>(value_); }
  bool is_bool() const { return std::holds_alternative<bool>(value_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(value_); }
  bool is_string() const { return std::holds_alternative<std::string>(value_); }
  bool is_array() const { return std::holds_alternative<Array>(value_); }
  bool is_object() const { return std::holds_alternative<Object>(value_); }

  bool as_bool() const { return get<bool>("boolean"); }
  std::int64_t as_int() const { return get<std::int64_t>("integer"); }
  const std::string& as_string() const { return get<std::string>("string"); }
  const Array& as_array() const { return get<Array>("array"); }
  Array& as_array() { return get<Array>("array"); }
  const Object& as_object() const { return get<Object>("object"); }
  Object& as_object() { return get<Object>("object"); }

  /// Object member lookup; nullptr when this is not an object or the key is
  /// absent.
  const Document* find(std::string_view key) const {
    if (!is_object()) return nullptr;
    auto it = as_object().find(std::string(key));
    return it == as_object().end() ? nullptr : &it->second;
  }

  /// Object member access that treats absence as a malformed document.
  const Document& at(std::string_view key) const {
    const Document* found = find(key);
    if (found == nullptr) {
      throw Error(Errc::MalformedDocument, "missing field '" + std::string(key) + "'");
    }
    return *found;
  }

  bool operator==(const Document& other) const = default;

 private:
  template <typename T>
  const T& get(const char* what) const {
    const T* value = std::get_if<T>(&value_);
    if (value == nullptr) {
      throw Error(Errc::MalformedDocument, std::string("expected ") + what);
    }
    return *value;
  }
  template <typename T>
  T& get(const char* what) {
    T* value = std::get_if<T>(&value_);
    if (value == nullptr) {
      throw Error(Errc::MalformedDocument, std::string("expected ") + what);
    }
    return *value;
  }

  std::variant<std::nullptr_t, bool, std::int64_t, std::string, Array, Object> value_;
};

/// Serializes a Document to its unique canonical byte form: object keys in
/// code-point order, no insignificant whitespace, integers in shortest
/// decimal form, strings minimally escaped, UTF-8 throughout. Signer and
/// verifier both hash these bytes, so this function is the byte-level
/// contract of the whole system.
std::string canonicalize(const Document& doc);

/// Parses a JSON byte sequence into a Document. Accepts any whitespace and
/// key order (canonicalize is the strict side), but rejects what a Document
/// cannot hold: floating-point numbers, integers outside int64, duplicate
/// object keys. Throws Error(Errc::MalformedDocument).
Document parse_canonical(std::string_view bytes);

}  // namespace meshguard
