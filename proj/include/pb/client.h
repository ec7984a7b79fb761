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

#ifndef PB_CLIENT_H_
#define PB_CLIENT_H_

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <vector>

#include "json.hpp"
#include "pb/config.h"

namespace pb::gen {

struct GenerationRequest {
  std::string prompt;
  int n_samples = 1;
  double temperature = 1.0;
  int max_tokens = 4096;
};

struct Usage {
  long long tokens_in = 0;
  long long tokens_out = 0;
};

// `candidates` keeps the order in which the service returned them; pass@k
// treats the first k as the top k.
struct GenerationResponse {
  std::vector<std::string> candidates;
  Usage usage;
};

class GenerationClient {
 public:
  virtual ~GenerationClient() = default;
  virtual GenerationResponse Generate(const GenerationRequest& request) = 0;
};

// Keys: endpoint.url, endpoint.model, endpoint.auth_env, limits.max_inflight,
// limits.retry_budget, limits.token_budget (0 = unlimited).
struct ClientConfig {
  std::string url;
  std::string model;
  std::string auth_env;
  int max_inflight = 4;
  int retry_budget = 3;
  long long token_budget = 0;

  static ClientConfig FromConfig(const Config& config);
  static ClientConfig Load(const std::filesystem::path& path);
};

struct HttpResult {
  int status = 0;
  std::string body;
};

// Sends one request body and returns the raw reply. Connection-level
// failures are thrown as Unavailable.
using Transport = std::function<HttpResult(const std::string& body)>;

struct RetryPolicy {
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{30'000};
  double multiplier = 2.0;
  std::function<void(std::chrono::milliseconds)> sleep;  // Null = real sleep.
};

struct AttemptRecord {
  int attempt = 0;
  int status = 0;  // 0 for a transport error.
  std::string error;
};

std::chrono::milliseconds BackoffForAttempt(const RetryPolicy& policy,
                                            int attempt);

// Chat-completion-shaped request body for `model`.
nlohmann::json BuildRequestBody(const std::string& model,
                                const GenerationRequest& request);
// Reads `choices[].message.content` (or `choices[].text`) in order, plus
// token usage. Throws Unavailable on an unreadable body.
GenerationResponse ParseResponseBody(const std::string& body, int n_samples);

// Wraps a transport with bounded retries, an in-flight limit, and a token
// budget. Transport failures, 408, 429 and 5xx are retried with exponential
// backoff; other non-2xx statuses are MalformedRequest and never retried.
class RetryingClient : public GenerationClient {
 public:
  RetryingClient(Transport transport, ClientConfig config,
                 RetryPolicy policy = {});

  GenerationResponse Generate(const GenerationRequest& request) override;

  std::vector<AttemptRecord> attempt_log() const;
  long long tokens_used() const;

 private:
  Transport transport_;
  ClientConfig config_;
  RetryPolicy policy_;
  std::counting_semaphore<1 << 16> inflight_;
  mutable std::mutex mu_;
  long long tokens_used_ = 0;
  std::vector<AttemptRecord> log_;
};

// POSTs to `url` with a bearer token read from the `auth_env` variable.
Transport MakeHttpTransport(const ClientConfig& config);

// A deterministic client driven by a JSON script:
//   {"rules": [{"contains": "text" | ["all", "of"], "candidates": [...]}],
//    "default": [...]}
// The first rule whose substrings all occur in the prompt answers; the
// response is a pure function of the request.
class ScriptedClient : public GenerationClient {
 public:
  explicit ScriptedClient(nlohmann::json script);
  static std::unique_ptr<ScriptedClient> FromFile(
      const std::filesystem::path& path);

  GenerationResponse Generate(const GenerationRequest& request) override;

 private:
  struct Rule {
    std::vector<std::string> needles;
    std::vector<std::string> candidates;
  };
  std::vector<Rule> rules_;
  std::vector<std::string> fallback_;
};

// `mock://<path>` builds a ScriptedClient from a script file (relative paths
// resolve against `base_dir`); anything else builds an HTTP client.
std::unique_ptr<GenerationClient> MakeClient(
    const ClientConfig& config, const std::filesystem::path& base_dir = {});

}  // namespace pb::gen

#endif  // PB_CLIENT_H_
