// Copyright 2026 The pb Authors.
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

#include "pb/templates.h"

#include <cstdlib>

#include "pb/error.h"
#include "pb/util.h"

#ifndef PB_DEFAULT_TEMPLATE_DIR
#define PB_DEFAULT_TEMPLATE_DIR "templates"
#endif

namespace pb::gen {

std::string RenderText(std::string_view text, const TemplateVars& vars) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    auto open = text.find("{{", i);
    if (open == std::string_view::npos) {
      out.append(text.substr(i));
      break;
    }
    auto close = text.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(text.substr(i));
      break;
    }
    out.append(text.substr(i, open - i));
    std::string name(Trim(text.substr(open + 2, close - open - 2)));
    auto it = vars.find(name);
    if (it == vars.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "unbound template placeholder {{" + name + "}}", name);
    }
    out.append(it->second);
    i = close + 2;
  }
  return out;
}

TemplateStore::TemplateStore(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::kMissingTemplate,
                "template directory not found: " + dir.string());
  }
  constexpr std::string_view kDemoSuffix = ".demo";
  std::map<std::string, std::string> demos;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".txt") continue;
    std::string stem = entry.path().stem().string();
    std::string text = ReadFile(entry.path());
    if (stem.size() > kDemoSuffix.size() &&
        stem.compare(stem.size() - kDemoSuffix.size(), kDemoSuffix.size(),
                     kDemoSuffix) == 0) {
      demos[stem.substr(0, stem.size() - kDemoSuffix.size())] = std::move(text);
    } else {
      templates_[stem] = Template{stem, std::move(text), {}, {}};
    }
  }
  for (auto& [id, t] : templates_) {
    if (auto it = demos.find(id); it != demos.end()) t.demo = it->second;
    t.digest = Sha256Hex(t.body + '\0' + t.demo);
  }
}

std::filesystem::path TemplateStore::DefaultDir() {
  if (const char* dir = std::getenv("PB_TEMPLATE_DIR"); dir && *dir) {
    return dir;
  }
  return PB_DEFAULT_TEMPLATE_DIR;
}

TemplateStore TemplateStore::Default() { return TemplateStore(DefaultDir()); }

const Template& TemplateStore::Get(const std::string& id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) {
    throw Error(ErrorCode::kMissingTemplate, id, id);
  }
  return it->second;
}

}  // namespace pb::gen
