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

#include "meshguard/fragment_path.hpp"

#include <charconv>

namespace meshguard {

namespace {

bool is_key_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c == '-';
}

[[noreturn]] void bad(std::string_view text, const char* why) {
  throw Error(Errc::BadPath, std::string(why) + " in path '" + std::string(text) + "'");
}

}  // namespace

FragmentPath FragmentPath::parse(std::string_view text) {
  if (text.empty()) throw Error(Errc::BadPath, "empty path");
  std::vector<Step> steps;
  std::size_t pos = 0;
  bool expect_key = true;  // at start and after each '.'
  while (pos < text.size()) {
    char c = text[pos];
    if (expect_key) {
      std::size_t start = pos;
      while (pos < text.size() && is_key_char(text[pos])) ++pos;
      if (pos == start) bad(text, "expected key");
      steps.push_back(Step::make_key(std::string(text.substr(start, pos - start))));
      expect_key = false;
    } else if (c == '.') {
      ++pos;
      expect_key = true;
      if (pos == text.size()) bad(text, "trailing separator");
    } else if (c == '[') {
      std::size_t close = text.find(']', pos);
      if (close == std::string_view::npos) bad(text, "unterminated bracket");
      std::string_view inner = text.substr(pos + 1, close - pos - 1);
      if (inner == "*") {
        steps.push_back(Step::make_wildcard());
      } else {
        if (inner.empty() || (inner.size() > 1 && inner.front() == '0')) {
          bad(text, "invalid index");
        }
        std::size_t index = 0;
        auto [ptr, ec] = std::from_chars(inner.data(), inner.data() + inner.size(), index);
        if (ec != std::errc() || ptr != inner.data() + inner.size()) bad(text, "invalid index");
        steps.push_back(Step::make_index(index));
      }
      pos = close + 1;
    } else {
      bad(text, "unexpected character");
    }
  }
  return FragmentPath(std::move(steps));
}

std::string FragmentPath::render() const {
  std::string out;
  for (const Step& step : steps_) {
    switch (step.kind) {
      case Step::Kind::Key:
        if (!out.empty()) out.push_back('.');
        out += step.key;
        break;
      case Step::Kind::Index:
        out.push_back('[');
        out += std::to_string(step.index);
        out.push_back(']');
        break;
      case Step::Kind::Wildcard:
        out += "[*]";
        break;
    }
  }
  return out;
}

bool FragmentPath::has_wildcard() const {
  for (const Step& step : steps_) {
    if (step.kind == Step::Kind::Wildcard) return true;
  }
  return false;
}

namespace {

void extract_recursive(const Document& doc, const std::vector<FragmentPath::Step>& steps,
                       std::size_t depth, std::vector<FragmentPath::Step>& concrete,
                       std::vector<std::pair<FragmentPath, Document>>& out) {
  if (depth == steps.size()) {
    out.emplace_back(FragmentPath(concrete), doc);
    return;
  }
  const FragmentPath::Step& step = steps[depth];
  switch (step.kind) {
    case FragmentPath::Step::Kind::Key: {
      const Document* next = doc.find(step.key);
      if (next == nullptr) return;
      concrete.push_back(step);
      extract_recursive(*next, steps, depth + 1, concrete, out);
      concrete.pop_back();
      return;
    }
    case FragmentPath::Step::Kind::Index: {
      if (!doc.is_array() || step.index >= doc.as_array().size()) return;
      concrete.push_back(step);
      extract_recursive(doc.as_array()[step.index], steps, depth + 1, concrete, out);
      concrete.pop_back();
      return;
    }
    case FragmentPath::Step::Kind::Wildcard: {
      if (!doc.is_array()) return;
      const Document::Array& items = doc.as_array();
      for (std::size_t i = 0; i < items.size(); ++i) {
        concrete.push_back(FragmentPath::Step::make_index(i));
        extract_recursive(items[i], steps, depth + 1, concrete, out);
        concrete.pop_back();
      }
      return;
    }
  }
}

}  // namespace

std::vector<std::pair<FragmentPath, Document>> extract_fragment(const Document& doc,
                                                                const FragmentPath& path) {
  std::vector<std::pair<FragmentPath, Document>> out;
  std::vector<FragmentPath::Step> concrete;
  extract_recursive(doc, path.steps(), 0, concrete, out);
  return out;
}

const Document* navigate(const Document& doc, const FragmentPath& path) {
  const Document* current = &doc;
  for (const FragmentPath::Step& step : path.steps()) {
    switch (step.kind) {
      case FragmentPath::Step::Kind::Key:
        current = current->find(step.key);
        if (current == nullptr) return nullptr;
        break;
      case FragmentPath::Step::Kind::Index:
        if (!current->is_array() || step.index >= current->as_array().size()) return nullptr;
        current = &current->as_array()[step.index];
        break;
      case FragmentPath::Step::Kind::Wildcard:
        throw Error(Errc::BadPath, "cannot navigate a wildcard path");
    }
  }
  return current;
}

}  // namespace meshguard
