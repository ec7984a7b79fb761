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

#include "pb/config.h"

#include <cctype>
#include <cstdlib>

#include "pb/error.h"
#include "pb/util.h"

namespace pb {
namespace {

using nlohmann::json;

Error ConfigError(const std::string& msg, std::size_t line_no) {
  return Error(ErrorCode::kInvalidArgument,
               "config line " + std::to_string(line_no) + ": " + msg);
}

// Parses a scalar or flat array literal. Throws on anything else.
json ParseValue(std::string_view text, std::size_t line_no) {
  text = Trim(text);
  if (text.empty()) throw ConfigError("empty value", line_no);
  if (text.front() == '"') {
    std::string out;
    std::size_t i = 1;
    for (; i < text.size() && text[i] != '"'; ++i) {
      if (text[i] == '\\' && i + 1 < text.size()) {
        char c = text[++i];
        switch (c) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          default: out.push_back(c); break;
        }
      } else {
        out.push_back(text[i]);
      }
    }
    if (i >= text.size()) throw ConfigError("unterminated string", line_no);
    return out;
  }
  if (text.front() == '[') {
    if (text.back() != ']') throw ConfigError("unterminated array", line_no);
    json arr = json::array();
    auto body = Trim(text.substr(1, text.size() - 2));
    std::size_t start = 0;
    while (!body.empty() && start <= body.size()) {
      auto comma = body.find(',', start);
      auto item = body.substr(start, comma == std::string_view::npos
                                         ? std::string_view::npos
                                         : comma - start);
      if (!Trim(item).empty()) arr.push_back(ParseValue(item, line_no));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return arr;
  }
  if (text == "true") return true;
  if (text == "false") return false;
  std::string s(text);
  char* end = nullptr;
  long long i = std::strtoll(s.c_str(), &end, 10);
  if (end && *end == '\0') return i;
  double d = std::strtod(s.c_str(), &end);
  if (end && *end == '\0') return d;
  throw ConfigError("cannot parse value '" + s + "'", line_no);
}

std::string StripComment(std::string_view line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
    if (line[i] == '#' && !in_string) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

}  // namespace

Config Config::Parse(std::string_view text) {
  Config config;
  std::string section;
  std::size_t line_no = 0;
  for (const auto& raw : SplitLines(NormalizeLineEndings(text))) {
    ++line_no;
    std::string line = StripComment(raw);
    auto t = Trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("bad section header", line_no);
      section = std::string(Trim(t.substr(1, t.size() - 2)));
      continue;
    }
    auto eq = t.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected '='", line_no);
    std::string key(Trim(t.substr(0, eq)));
    if (key.empty()) throw ConfigError("empty key", line_no);
    if (!section.empty()) key = section + "." + key;
    config.values_[key] = ParseValue(t.substr(eq + 1), line_no);
  }
  return config;
}

Config Config::Load(const std::filesystem::path& path) {
  return Parse(ReadFile(path));
}

std::string Config::GetString(const std::string& key,
                              const std::string& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second.is_string()) return it->second.get<std::string>();
  return it->second.dump();
}

long long Config::GetInt(const std::string& key, long long fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second.is_number_integer()) return it->second.get<long long>();
  throw Error(ErrorCode::kInvalidArgument, "config key " + key +
                                               " is not an integer");
}

double Config::GetDouble(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second.is_number()) return it->second.get<double>();
  throw Error(ErrorCode::kInvalidArgument, "config key " + key +
                                               " is not a number");
}

bool Config::GetBool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second.is_boolean()) return it->second.get<bool>();
  throw Error(ErrorCode::kInvalidArgument, "config key " + key +
                                               " is not a boolean");
}

std::vector<long long> Config::GetIntList(
    const std::string& key, std::vector<long long> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second.is_number_integer()) return {it->second.get<long long>()};
  if (!it->second.is_array()) {
    throw Error(ErrorCode::kInvalidArgument, "config key " + key +
                                                 " is not a list");
  }
  std::vector<long long> out;
  for (const auto& v : it->second) {
    if (!v.is_number_integer()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "config key " + key + " has a non-integer element");
    }
    out.push_back(v.get<long long>());
  }
  return out;
}

void Config::SetFromText(const std::string& key, std::string_view text) {
  auto t = Trim(text);
  try {
    values_[key] = ParseValue(t, 0);
  } catch (const Error&) {
    values_[key] = std::string(t);
  }
}

std::string Config::EnvName(const std::string& key) {
  std::string name = "PB_";
  for (char c : key) {
    name.push_back(c == '.' ? '_' : static_cast<char>(std::toupper(
                                        static_cast<unsigned char>(c))));
  }
  return name;
}

void Config::ApplyEnvOverrides(const std::vector<std::string>& keys) {
  for (const auto& key : keys) {
    if (const char* v = std::getenv(EnvName(key).c_str())) {
      SetFromText(key, v);
    }
  }
}

nlohmann::json Config::ToJson() const {
  json out = json::object();
  for (const auto& [k, v] : values_) out[k] = v;
  return out;
}

}  // namespace pb
