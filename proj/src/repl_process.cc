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

#include "pb/repl_process.h"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>

#include "pb/error.h"
#include "pb/util.h"

namespace pb::lean {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

Error Unavailable(const std::string& why) {
  return Error(ErrorCode::kBackendUnavailable, why);
}

}  // namespace

ReplOptions ReplOptions::FromEnv() { return FromEnv(ReplOptions{}); }

ReplOptions ReplOptions::FromEnv(ReplOptions base) {
  if (const char* cmd = std::getenv("PB_LEAN_CMD"); cmd && *cmd) {
    base.command = cmd;
  }
  if (const char* t = std::getenv("PB_LEAN_TIMEOUT_S"); t && *t) {
    char* end = nullptr;
    double secs = std::strtod(t, &end);
    if (end && *end == '\0' && secs > 0) {
      base.timeout = std::chrono::milliseconds(
          static_cast<long long>(secs * 1000.0));
    }
  }
  return base;
}

ReplProcess::ReplProcess(ReplOptions options) : options_(std::move(options)) {}

ReplProcess::~ReplProcess() { Stop(); }

void ReplProcess::Start() {
  if (options_.command.empty()) {
    throw Unavailable("no REPL command configured (set PB_LEAN_CMD)");
  }
  ::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw Unavailable("pipe failed");
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw Unavailable("pipe failed");
  }
  pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) {
      ::close(fd);
    }
    throw Unavailable("fork failed");
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", options_.command.c_str(),
            static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  buffer_.clear();
  env_.reset();

  if (!options_.header.empty()) {
    json resp = RoundTrip({{"cmd", options_.header}}, options_.header_timeout);
    if (auto env = resp.find("env"); env != resp.end() && env->is_number()) {
      env_ = env->get<int>();
    } else {
      Stop();
      throw Unavailable("REPL header command returned no environment");
    }
  }
}

void ReplProcess::Stop() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    ::kill(-pid_, SIGKILL);
    ::kill(pid_, SIGKILL);
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
  pid_ = -1;
  buffer_.clear();
  env_.reset();
}

json ReplProcess::RoundTrip(const json& request,
                            std::chrono::milliseconds timeout) {
  const std::string line = request.dump() + "\n\n";
  std::size_t written = 0;
  while (written < line.size()) {
    ssize_t n = ::write(to_child_, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      Stop();
      throw Unavailable("REPL closed its input");
    }
    written += static_cast<std::size_t>(n);
  }

  const auto deadline = Clock::now() + timeout;
  while (true) {
    // A response is a JSON value terminated by an empty line.
    auto content = buffer_.find_first_not_of(" \t\r\n");
    if (content != std::string::npos) {
      auto end = buffer_.find("\n\n", content);
      if (end != std::string::npos) {
        std::string body = buffer_.substr(0, end);
        buffer_.erase(0, end + 2);
        try {
          return json::parse(body);
        } catch (const json::parse_error&) {
          Stop();
          throw Unavailable("malformed REPL response");
        }
      }
    }
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - Clock::now());
    if (remaining.count() <= 0) {
      Stop();
      throw Error(ErrorCode::kTimeout,
                  "REPL did not answer within " +
                      std::to_string(timeout.count()) + " ms");
    }
    pollfd pfd{from_child_, POLLIN, 0};
    int rc = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) {
      Stop();
      throw Unavailable("poll failed");
    }
    if (rc == 0) continue;
    char chunk[65536];
    ssize_t n = ::read(from_child_, chunk, sizeof(chunk));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) {
      Stop();
      throw Unavailable("REPL process exited");
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

json ReplProcess::Execute(const ReplCommand& command) {
  if (!running()) Start();
  json request = {{"cmd", command.source}};
  if (env_) request["env"] = *env_;
  if (command.all_tactics) request["allTactics"] = true;
  return RoundTrip(request, options_.timeout);
}

ReplPool::ReplPool(ReplOptions options) {
  std::size_t n = std::max<std::size_t>(1, options.workers);
  for (std::size_t i = 0; i < n; ++i) {
    workers_.push_back(std::make_unique<ReplProcess>(options));
  }
  busy_.assign(n, false);
}

json ReplPool::Execute(const ReplCommand& command) {
  std::size_t slot = 0;
  {
    std::unique_lock<std::mutex> lock(mu_);
    cv_.wait(lock, [&] {
      for (std::size_t i = 0; i < busy_.size(); ++i) {
        if (!busy_[i]) {
          slot = i;
          return true;
        }
      }
      return false;
    });
    busy_[slot] = true;
  }
  struct Release {
    ReplPool* pool;
    std::size_t slot;
    ~Release() {
      {
        std::lock_guard<std::mutex> lock(pool->mu_);
        pool->busy_[slot] = false;
      }
      pool->cv_.notify_one();
    }
  } release{this, slot};
  return workers_[slot]->Execute(command);
}

}  // namespace pb::lean
