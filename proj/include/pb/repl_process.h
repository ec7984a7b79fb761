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

#ifndef PB_REPL_PROCESS_H_
#define PB_REPL_PROCESS_H_

#include <sys/types.h>

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pb/lean_bridge.h"

namespace pb::lean {

struct ReplOptions {
  // Shell command that starts a Lean REPL speaking JSON on stdin/stdout.
  std::string command;
  std::chrono::milliseconds timeout{60'000};
  // Budget for the header command (importing Mathlib can take minutes).
  std::chrono::milliseconds header_timeout{600'000};
  // Run once per process; later commands reuse its environment.
  std::string header = "import Mathlib";
  std::size_t workers = 1;

  // Overrides `command` from PB_LEAN_CMD and `timeout` from
  // PB_LEAN_TIMEOUT_S when those are set.
  static ReplOptions FromEnv(ReplOptions base);
  static ReplOptions FromEnv();
};

// One child process. Not thread-safe; ReplPool serializes access.
class ReplProcess {
 public:
  explicit ReplProcess(ReplOptions options);
  ~ReplProcess();

  ReplProcess(const ReplProcess&) = delete;
  ReplProcess& operator=(const ReplProcess&) = delete;

  nlohmann::json Execute(const ReplCommand& command);

  bool running() const { return pid_ > 0; }

 private:
  void Start();
  void Stop();
  nlohmann::json RoundTrip(const nlohmann::json& request,
                           std::chrono::milliseconds timeout);

  ReplOptions options_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::optional<int> env_;
};

// Fixed-size pool of REPL processes. Each request is served by one idle
// worker; requests to a single worker are serialized.
class ReplPool : public VerifierBackend {
 public:
  explicit ReplPool(ReplOptions options);

  nlohmann::json Execute(const ReplCommand& command) override;

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::vector<std::unique_ptr<ReplProcess>> workers_;
  std::vector<bool> busy_;
};

}  // namespace pb::lean

#endif  // PB_REPL_PROCESS_H_
