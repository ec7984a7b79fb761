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

#ifndef PB_CONFIG_H_
#define PB_CONFIG_H_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace pb {

// Flat configuration keyed by dotted names ("train.batch_size"). Parsed from
// a TOML subset: `[section]` headers, `key = value` lines, `#` comments.
// Values are strings, integers, floats, booleans, or flat arrays thereof.
class Config {
 public:
  Config() = default;

  static Config Parse(std::string_view text);
  static Config Load(const std::filesystem::path& path);

  bool Has(const std::string& key) const { return values_.count(key) > 0; }

  std::string GetString(const std::string& key,
                        const std::string& fallback = {}) const;
  long long GetInt(const std::string& key, long long fallback) const;
  double GetDouble(const std::string& key, double fallback) const;
  bool GetBool(const std::string& key, bool fallback) const;
  std::vector<long long> GetIntList(const std::string& key,
                                    std::vector<long long> fallback) const;

  void Set(const std::string& key, nlohmann::json value) {
    values_[key] = std::move(value);
  }

  // Sets `key` from an untyped textual value, e.g. from a command-line
  // `--set key=value` or an environment variable. Quoted or bare strings,
  // numbers and booleans are accepted.
  void SetFromText(const std::string& key, std::string_view text);

  // For each key, checks `PB_<KEY>` with dots turned into underscores and
  // the name upper-cased (train.batch_size -> PB_TRAIN_BATCH_SIZE).
  void ApplyEnvOverrides(const std::vector<std::string>& keys);

  static std::string EnvName(const std::string& key);

  const std::map<std::string, nlohmann::json>& values() const {
    return values_;
  }

  nlohmann::json ToJson() const;

 private:
  std::map<std::string, nlohmann::json> values_;
};

}  // namespace pb

#endif  // PB_CONFIG_H_
