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

#ifndef PB_TEMPLATES_H_
#define PB_TEMPLATES_H_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace pb::gen {

using TemplateVars = std::map<std::string, std::string>;

// Replaces every `{{name}}` in `text` with vars[name]. Substituted values
// are not re-scanned. An unbound placeholder is InvalidArgument.
std::string RenderText(std::string_view text, const TemplateVars& vars);

struct Template {
  std::string id;
  std::string body;
  std::string demo;    // Optional per-item fragment (`<id>.demo.txt`).
  std::string digest;  // SHA-256 over body and demo.

  std::string Render(const TemplateVars& vars) const {
    return RenderText(body, vars);
  }
  std::string RenderDemo(const TemplateVars& vars) const {
    return RenderText(demo, vars);
  }
};

// Prompt templates stored as `<id>.txt` (plus optional `<id>.demo.txt`) in
// one directory, loaded eagerly so lookups are thread-safe.
class TemplateStore {
 public:
  TemplateStore() = default;
  explicit TemplateStore(const std::filesystem::path& dir);

  // PB_TEMPLATE_DIR if set, otherwise the templates shipped with the build.
  static TemplateStore Default();
  static std::filesystem::path DefaultDir();

  // Throws MissingTemplate.
  const Template& Get(const std::string& id) const;
  bool Has(const std::string& id) const { return templates_.count(id) > 0; }

 private:
  std::map<std::string, Template> templates_;
};

}  // namespace pb::gen

#endif  // PB_TEMPLATES_H_
