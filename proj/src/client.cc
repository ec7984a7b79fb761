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

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "pb/client.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "pb/error.h"
#include "pb/util.h"

namespace pb::gen {
namespace {

using nlohmann::json;

constexpr std::string_view kMockScheme = "mock://";

bool Retryable(int status) {
  return status == 408 || status == 429 || status >= 500;
}

}  // namespace

ClientConfig ClientConfig::FromConfig(const Config& config) {
  ClientConfig c;
  c.url = config.GetString("endpoint.url");
  c.model = config.GetString("endpoint.model");
  c.auth_env = config.GetString("endpoint.auth_env");
  c.max_inflight = static_cast<int>(config.GetInt("limits.max_inflight", 4));
  c.retry_budget = static_cast<int>(config.GetInt("limits.retry_budget", 3));
  c.token_budget = config.GetInt("limits.token_budget", 0);
  if (c.url.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "client config lacks endpoint.url");
  }
  if (c.max_inflight < 1 || c.retry_budget < 1 || c.token_budget < 0) {
    throw Error(ErrorCode::kInvalidArgument, "client limits must be positive");
  }
  return c;
}

ClientConfig ClientConfig::Load(const std::filesystem::path& path) {
  return FromConfig(Config::Load(path));
}

std::chrono::milliseconds BackoffForAttempt(const RetryPolicy& policy,
                                            int attempt) {
  double ms = static_cast<double>(policy.initial_backoff.count()) *
              std::pow(policy.multiplier, std::max(0, attempt - 1));
  ms = std::min(ms, static_cast<double>(policy.max_backoff.count()));
  return std::chrono::milliseconds(static_cast<long long>(ms));
}

json BuildRequestBody(const std::string& model,
                      const GenerationRequest& request) {
  return {{"model", model},
          {"messages", json::array({{{"role", "user"},
                                     {"content", request.prompt}}})},
          {"n", request.n_samples},
          {"temperature", request.temperature},
          {"max_tokens", request.max_tokens}};
}

GenerationResponse ParseResponseBody(const std::string& body, int n_samples) {
  GenerationResponse resp;
  try {
    json j = json::parse(body);
    for (const auto& choice : j.at("choices")) {
      if (auto msg = choice.find("message"); msg != choice.end()) {
        resp.candidates.push_back(msg->at("content").get<std::string>());
      } else {
        resp.candidates.push_back(choice.at("text").get<std::string>());
      }
    }
    if (auto usage = j.find("usage"); usage != j.end()) {
      resp.usage.tokens_in = usage->value("prompt_tokens", 0LL);
      resp.usage.tokens_out = usage->value("completion_tokens", 0LL);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kUnavailable,
                std::string("unreadable response body: ") + e.what());
  }
  if (static_cast<int>(resp.candidates.size()) > n_samples) {
    resp.candidates.resize(static_cast<std::size_t>(n_samples));
  }
  return resp;
}

RetryingClient::RetryingClient(Transport transport, ClientConfig config,
                               RetryPolicy policy)
    : transport_(std::move(transport)),
      config_(std::move(config)),
      policy_(std::move(policy)),
      inflight_(std::max(1, config_.max_inflight)) {}

GenerationResponse RetryingClient::Generate(const GenerationRequest& request) {
  if (request.n_samples < 1 || request.prompt.empty()) {
    throw Error(ErrorCode::kMalformedRequest,
                "request needs a prompt and n_samples >= 1");
  }
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (config_.token_budget > 0 && tokens_used_ >= config_.token_budget) {
      throw Error(ErrorCode::kBudgetExceeded,
                  "token budget of " + std::to_string(config_.token_budget) +
                      " exhausted");
    }
  }
  const std::string body = BuildRequestBody(config_.model, request).dump();

  inflight_.acquire();
  struct Release {
    std::counting_semaphore<1 << 16>& sem;
    ~Release() { sem.release(); }
  } release{inflight_};

  std::string last_error;
  for (int attempt = 1; attempt <= config_.retry_budget; ++attempt) {
    AttemptRecord record{attempt, 0, {}};
    try {
      HttpResult result = transport_(body);
      record.status = result.status;
      if (result.status >= 200 && result.status < 300) {
        GenerationResponse resp =
            ParseResponseBody(result.body, request.n_samples);
        std::lock_guard<std::mutex> lock(mu_);
        log_.push_back(record);
        tokens_used_ += resp.usage.tokens_in + resp.usage.tokens_out;
        return resp;
      }
      if (!Retryable(result.status)) {
        record.error = "HTTP " + std::to_string(result.status);
        {
          std::lock_guard<std::mutex> lock(mu_);
          log_.push_back(record);
        }
        throw Error(ErrorCode::kMalformedRequest,
                    "service rejected request with HTTP " +
                        std::to_string(result.status) + ": " + result.body);
      }
      record.error = "HTTP " + std::to_string(result.status);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kMalformedRequest) throw;
      record.error = e.what();
    }
    last_error = record.error;
    {
      std::lock_guard<std::mutex> lock(mu_);
      log_.push_back(record);
    }
    if (attempt < config_.retry_budget) {
      auto delay = BackoffForAttempt(policy_, attempt);
      if (policy_.sleep) {
        policy_.sleep(delay);
      } else {
        std::this_thread::sleep_for(delay);
      }
    }
  }
  throw Error(ErrorCode::kUnavailable,
              "gave up after " + std::to_string(config_.retry_budget) +
                  " attempts: " + last_error);
}

std::vector<AttemptRecord> RetryingClient::attempt_log() const {
  std::lock_guard<std::mutex> lock(mu_);
  return log_;
}

long long RetryingClient::tokens_used() const {
  std::lock_guard<std::mutex> lock(mu_);
  return tokens_used_;
}

Transport MakeHttpTransport(const ClientConfig& config) {
  std::string url = config.url;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "endpoint.url needs a scheme");
  }
  auto path_start = url.find('/', scheme_end + 3);
  std::string origin =
      path_start == std::string::npos ? url : url.substr(0, path_start);
  std::string path =
      path_start == std::string::npos ? "/" : url.substr(path_start);
  std::string token;
  if (!config.auth_env.empty()) {
    if (const char* t = std::getenv(config.auth_env.c_str())) token = t;
  }
  return [origin, path, token](const std::string& body) {
    httplib::Client client(origin);
    client.set_connection_timeout(30, 0);
    client.set_read_timeout(600, 0);
    httplib::Headers headers;
    if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      throw Error(ErrorCode::kUnavailable,
                  "transport error: " + httplib::to_string(res.error()));
    }
    return HttpResult{res->status, res->body};
  };
}

ScriptedClient::ScriptedClient(json script) {
  if (auto rules = script.find("rules"); rules != script.end()) {
    for (const auto& r : *rules) {
      Rule rule;
      const json& contains = r.at("contains");
      if (contains.is_string()) {
        rule.needles.push_back(contains.get<std::string>());
      } else {
        rule.needles = contains.get<std::vector<std::string>>();
      }
      rule.candidates = r.at("candidates").get<std::vector<std::string>>();
      rules_.push_back(std::move(rule));
    }
  }
  if (auto d = script.find("default"); d != script.end()) {
    fallback_ = d->get<std::vector<std::string>>();
  }
}

std::unique_ptr<ScriptedClient> ScriptedClient::FromFile(
    const std::filesystem::path& path) {
  try {
    return std::make_unique<ScriptedClient>(json::parse(ReadFile(path)));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                "bad mock script " + path.string() + ": " + e.what());
  }
}

GenerationResponse ScriptedClient::Generate(const GenerationRequest& request) {
  if (request.n_samples < 1) {
    throw Error(ErrorCode::kMalformedRequest, "n_samples must be >= 1");
  }
  const std::vector<std::string>* chosen = &fallback_;
  for (const auto& rule : rules_) {
    bool all = std::all_of(rule.needles.begin(), rule.needles.end(),
                           [&](const std::string& n) {
                             return request.prompt.find(n) != std::string::npos;
                           });
    if (all) {
      chosen = &rule.candidates;
      break;
    }
  }
  GenerationResponse resp;
  std::size_t n = std::min(chosen->size(),
                           static_cast<std::size_t>(request.n_samples));
  resp.candidates.assign(chosen->begin(), chosen->begin() + n);
  resp.usage.tokens_in = static_cast<long long>(request.prompt.size() / 4);
  for (const auto& c : resp.candidates) {
    resp.usage.tokens_out += static_cast<long long>(c.size() / 4);
  }
  return resp;
}

std::unique_ptr<GenerationClient> MakeClient(
    const ClientConfig& config, const std::filesystem::path& base_dir) {
  if (StartsWith(config.url, kMockScheme)) {
    std::filesystem::path script = config.url.substr(kMockScheme.size());
    if (script.is_relative() && !base_dir.empty()) script = base_dir / script;
    return ScriptedClient::FromFile(script);
  }
  return std::make_unique<RetryingClient>(MakeHttpTransport(config), config);
}

}  // namespace pb::gen
