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

#include "meshguard/document.hpp"

#include <charconv>
#include <cstdio>
#include <limits>

#include <json.hpp>

namespace meshguard {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::MalformedDocument: return "MalformedDocument";
    case Errc::MalformedManifest: return "MalformedManifest";
    case Errc::UnknownKind: return "UnknownKind";
    case Errc::InvalidName: return "InvalidName";
    case Errc::TranslationError: return "TranslationError";
    case Errc::MalformedConfig: return "MalformedConfig";
    case Errc::DuplicateLabel: return "DuplicateLabel";
    case Errc::BadPath: return "BadPath";
    case Errc::BadSeedLength: return "BadSeedLength";
    case Errc::MalformedBundle: return "MalformedBundle";
    case Errc::KeyIdMismatch: return "KeyIdMismatch";
    case Errc::NotFound: return "NotFound";
    case Errc::WireError: return "WireError";
    case Errc::IoError: return "IoError";
    case Errc::SetupFailure: return "SetupFailure";
  }
  return "UnknownError";
}

namespace {

void append_escaped(std::string& out, const std::string& text) {
  out.push_back('"');
  for (unsigned char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\f': out += "\\f"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out.push_back(static_cast<char>(c));
        }
    }
  }
  out.push_back('"');
}

void write_canonical(std::string& out, const Document& doc) {
  if (doc.is_null()) {
    out += "null";
  } else if (doc.is_bool()) {
    out += doc.as_bool() ? "true" : "false";
  } else if (doc.is_int()) {
    char buf[24];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), doc.as_int());
    out.append(buf, ptr);
  } else if (doc.is_string()) {
    append_escaped(out, doc.as_string());
  } else if (doc.is_array()) {
    out.push_back('[');
    bool first = true;
    for (const Document& item : doc.as_array()) {
      if (!first) out.push_back(',');
      first = false;
      write_canonical(out, item);
    }
    out.push_back(']');
  } else {
    out.push_back('{');
    bool first = true;
    for (const auto& [key, value] : doc.as_object()) {
      if (!first) out.push_back(',');
      first = false;
      append_escaped(out, key);
      out.push_back(':');
      write_canonical(out, value);
    }
    out.push_back('}');
  }
}

// SAX builder so duplicate keys and floats are caught during the parse
// instead of being silently normalized away by the json library.
class DocumentBuilder : public nlohmann::json_sax<nlohmann::json> {
 public:
  Document take() { return std::move(root_); }

  bool null() override { return emit(Document(nullptr)); }
  bool boolean(bool value) override { return emit(Document(value)); }
  bool number_integer(number_integer_t value) override {
    return emit(Document(static_cast<std::int64_t>(value)));
  }
  bool number_unsigned(number_unsigned_t value) override {
    if (value > static_cast<number_unsigned_t>(std::numeric_limits<std::int64_t>::max())) {
      throw Error(Errc::MalformedDocument, "integer out of 64-bit signed range");
    }
    return emit(Document(static_cast<std::int64_t>(value)));
  }
  bool number_float(number_float_t, const string_t&) override {
    throw Error(Errc::MalformedDocument, "floating-point values are not supported");
  }
  bool string(string_t& value) override { return emit(Document(value)); }
  bool binary(binary_t&) override {
    throw Error(Errc::MalformedDocument, "binary values are not supported");
  }

  bool start_object(std::size_t) override {
    stack_.emplace_back(Document::Object{});
    return true;
  }
  bool key(string_t& value) override {
    pending_key_ = value;
    return true;
  }
  bool end_object() override { return pop(); }

  bool start_array(std::size_t) override {
    stack_.emplace_back(Document::Array{});
    return true;
  }
  bool end_array() override { return pop(); }

  bool parse_error(std::size_t position, const std::string&,
                   const nlohmann::detail::exception& ex) override {
    throw Error(Errc::MalformedDocument,
                "parse error at byte " + std::to_string(position) + ": " + ex.what());
  }

 private:
  bool emit(Document value) {
    if (stack_.empty()) {
      root_ = std::move(value);
      return true;
    }
    Document& top = stack_.back();
    if (top.is_array()) {
      top.as_array().push_back(std::move(value));
    } else {
      auto [it, inserted] = top.as_object().emplace(std::move(pending_key_), std::move(value));
      if (!inserted) {
        throw Error(Errc::MalformedDocument, "duplicate object key '" + it->first + "'");
      }
    }
    return true;
  }

  bool pop() {
    Document done = std::move(stack_.back());
    stack_.pop_back();
    return emit(std::move(done));
  }

  Document root_;
  std::vector<Document> stack_;
  std::string pending_key_;
};

}  // namespace

std::string canonicalize(const Document& doc) {
  std::string out;
  write_canonical(out, doc);
  return out;
}

Document parse_canonical(std::string_view bytes) {
  DocumentBuilder builder;
  nlohmann::json::sax_parse(bytes, &builder);
  return builder.take();
}

}  // namespace meshguard
