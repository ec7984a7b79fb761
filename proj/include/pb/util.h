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

#ifndef PB_UTIL_H_
#define PB_UTIL_H_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace pb {

std::string_view Trim(std::string_view s);
bool StartsWith(std::string_view s, std::string_view prefix);

// Converts CRLF (and lone CR) line endings to LF. No other normalization.
std::string NormalizeLineEndings(std::string_view s);

std::vector<std::string> SplitLines(std::string_view s);

std::string ReplaceAll(std::string s, std::string_view from,
                       std::string_view to);

// Lowercase hex SHA-256 of `data`.
std::string Sha256Hex(std::string_view data);

std::string ReadFile(const std::filesystem::path& path);

// Writes `contents` to a sibling temp file and renames it over `path`, so a
// reader never observes a partially written output.
void WriteFileAtomic(const std::filesystem::path& path,
                     std::string_view contents);

// Runs fn(i) for i in [0, n) on at most `workers` threads. The first
// exception thrown by any task is rethrown after all threads join; tasks
// not yet started are skipped once an exception is recorded.
void ParallelFor(std::size_t n, std::size_t workers,
                 const std::function<void(std::size_t)>& fn);

}  // namespace pb

#endif  // PB_UTIL_H_
