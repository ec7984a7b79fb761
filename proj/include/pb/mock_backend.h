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

#ifndef PB_MOCK_BACKEND_H_
#define PB_MOCK_BACKEND_H_

#include <atomic>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pb/lean_bridge.h"

namespace pb::lean {

// Deterministic stand-in for a Lean REPL. Commands found in the loaded
// transcripts are answered verbatim. Other commands are answered by a small
// rule set when `synthesize` is on:
//
//   * `sorry` tokens produce sorry markers and the usual warning;
//   * each occurrence of an `error_tokens` entry produces an error;
//   * an equivalence goal (`example : PropA ↔ PropB`) closes iff the two
//     definitions are identical up to whitespace.
//
// With `synthesize` off, an unknown command is BackendUnavailable.
class MockBackend : public VerifierBackend {
 public:
  struct Options {
    bool synthesize = true;
    std::vector<std::string> error_tokens = {"BROKEN"};
  };

  MockBackend() : MockBackend(Options{}) {}
  explicit MockBackend(Options options) : options_(std::move(options)) {}

  // Transcript lines: {"request": {"cmd": ..., "allTactics": bool},
  // "response": {...}}. `path` may be a file or a directory of *.jsonl.
  void LoadTranscripts(const std::filesystem::path& path);
  void AddTranscript(const ReplCommand& command, nlohmann::json response);

  nlohmann::json Execute(const ReplCommand& command) override;

  int calls() const { return calls_.load(); }

 private:
  static std::string Key(const ReplCommand& command);
  nlohmann::json Synthesize(const ReplCommand& command) const;

  Options options_;
  std::map<std::string, nlohmann::json> transcripts_;
  std::atomic<int> calls_{0};
};

}  // namespace pb::lean

#endif  // PB_MOCK_BACKEND_H_
