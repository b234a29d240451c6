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

#include <algorithm>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "meshguard/document.hpp"

namespace testsupport {

using meshguard::Document;

inline std::string random_string(std::mt19937_64& rng) {
  static const std::vector<std::string> pool = {
      "mirror", "host", "svc", "shadow", "route", "cluster", "a", "b",
      "héllo",  "日本", "naïve", "🔒",    "",     "with space", "tab\tsep", "line\nbreak",
      "quote\"inside", "back\\slash", "ctl\x01byte",
  };
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::string out = pool[pick(rng)];
  std::uniform_int_distribution<int> extra(0, 6);
  std::uniform_int_distribution<int> ascii(0x20, 0x7e);
  for (int i = extra(rng); i > 0; --i) {
    out.push_back(static_cast<char>(ascii(rng)));
  }
  return out;
}

inline std::int64_t random_int(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> shape(0, 9);
  switch (shape(rng)) {
    case 0: return 0;
    case 1: return -1;
    case 2: return std::numeric_limits<std::int64_t>::max();
    case 3: return std::numeric_limits<std::int64_t>::min();
    default: {
      std::uniform_int_distribution<std::int64_t> any(-1000000, 1000000);
      return any(rng);
    }
  }
}

inline Document random_document(std::mt19937_64& rng, int depth = 0) {
  std::uniform_int_distribution<int> kind(0, depth >= 3 ? 3 : 5);
  switch (kind(rng)) {
    case 0: return Document(nullptr);
    case 1: return Document(rng() % 2 == 0);
    case 2: return Document(random_int(rng));
    case 3: return Document(random_string(rng));
    case 4: {
      std::uniform_int_distribution<int> count(0, 4);
      Document::Array items;
      for (int i = count(rng); i > 0; --i) {
        items.push_back(random_document(rng, depth + 1));
      }
      return Document(std::move(items));
    }
    default: {
      std::uniform_int_distribution<int> count(0, 4);
      Document::Object object;
      for (int i = count(rng); i > 0; --i) {
        object.insert_or_assign(random_string(rng), random_document(rng, depth + 1));
      }
      return Document(std::move(object));
    }
  }
}

/// Object-rooted document, the shape of a policy fragment.
inline Document random_fragment(std::mt19937_64& rng) {
  Document::Object object;
  std::uniform_int_distribution<int> count(1, 4);
  for (int i = count(rng); i > 0; --i) {
    object.insert_or_assign(random_string(rng), random_document(rng, 2));
  }
  return Document(std::move(object));
}

// Serializes a document as messy but valid JSON: shuffled object keys,
// random whitespace, occasional \u escapes for printable ASCII. Parsing it
// back must recover the exact document.
inline void write_scrambled(const Document& doc, std::mt19937_64& rng, std::string& out) {
  auto pad = [&] {
    std::uniform_int_distribution<int> spaces(0, 2);
    for (int i = spaces(rng); i > 0; --i) out.push_back(i % 2 == 0 ? ' ' : '\n');
  };
  auto emit_string = [&](const std::string& text) {
    out.push_back('"');
    for (unsigned char c : text) {
      bool escape_anyway = c < 0x80 && c >= 0x20 && c != '"' && c != '\\' && rng() % 10 == 0;
      if (c == '"') {
        out += "\\\"";
      } else if (c == '\\') {
        out += "\\\\";
      } else if (c < 0x20 || escape_anyway) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "\\u%04X", c);
        out += buf;
      } else {
        out.push_back(static_cast<char>(c));
      }
    }
    out.push_back('"');
  };

  if (doc.is_null()) {
    out += "null";
  } else if (doc.is_bool()) {
    out += doc.as_bool() ? "true" : "false";
  } else if (doc.is_int()) {
    out += std::to_string(doc.as_int());
  } else if (doc.is_string()) {
    emit_string(doc.as_string());
  } else if (doc.is_array()) {
    out.push_back('[');
    bool first = true;
    for (const Document& item : doc.as_array()) {
      if (!first) out.push_back(',');
      first = false;
      pad();
      write_scrambled(item, rng, out);
    }
    pad();
    out.push_back(']');
  } else {
    std::vector<std::pair<std::string, Document>> entries(doc.as_object().begin(),
                                                          doc.as_object().end());
    std::shuffle(entries.begin(), entries.end(), rng);
    out.push_back('{');
    bool first = true;
    for (const auto& [key, value] : entries) {
      if (!first) out.push_back(',');
      first = false;
      pad();
      emit_string(key);
      pad();
      out.push_back(':');
      pad();
      write_scrambled(value, rng, out);
    }
    pad();
    out.push_back('}');
  }
}

inline std::string scrambled_json(const Document& doc, std::mt19937_64& rng) {
  std::string out;
  write_scrambled(doc, rng, out);
  return out;
}

}  // namespace testsupport
