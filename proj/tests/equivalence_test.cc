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

#include <gtest/gtest.h>

#include "pb/client.h"
#include "pb/error.h"
#include "pb/equivalence.h"
#include "pb/mock_backend.h"
#include "pb/templates.h"

namespace pb::lean {
namespace {

const gen::TemplateStore& Store() {
  static const gen::TemplateStore store(PB_TEMPLATE_DIR);
  return store;
}

gen::ScriptedClient Judge(std::vector<std::string> replies) {
  return gen::ScriptedClient(nlohmann::json{{"default", replies}});
}

// Replies differ per attempt by keying on the feedback each retry carries.
gen::ScriptedClient JudgeSequence(const std::string& first, const std::string& after_whitelist,
                                  const std::string& after_failure) {
  return gen::ScriptedClient(nlohmann::json{
      {"rules",
       {{{"contains", "was rejected"}, {"candidates", {after_whitelist}}},
        {{"contains", "failed to check"}, {"candidates", {after_failure}}}}},
      {"default", {first}}});
}

const char* kGold = "theorem gold (n : ℕ) : n + 1 = 1 + n";

TEST(Equivalence, ProvedOnFirstAttempt) {
  MockBackend backend;
  auto judge = Judge({"```lean\nrfl\n```"});
  EquivalenceVerdict v =
      CheckEquivalence("theorem cand (n : ℕ) : n + 1 = 1 + n", kGold, judge, backend, Store());
  EXPECT_TRUE(v.equivalent);
  EXPECT_EQ(v.attempts_used, 1);
  EXPECT_EQ(v.rejection, RejectionReason::kNone);
  EXPECT_NE(v.goal.find("example : PropA ↔ PropB := by"), std::string::npos);
  EXPECT_EQ(backend.calls(), 1);
}

TEST(Equivalence, DifferentStatementsExhaustBudget) {
  MockBackend backend;
  auto judge = Judge({"constructor\nintro h\nsimp\nintro h\nsimp"});
  EquivalenceOptions opts;
  opts.attempt_budget = 3;
  EquivalenceVerdict v =
      CheckEquivalence("theorem cand (n : ℕ) : n + 1 = n + 1", kGold, judge, backend, Store(), opts);
  EXPECT_FALSE(v.equivalent);
  EXPECT_EQ(v.rejection, RejectionReason::kJudgeExhausted);
  EXPECT_EQ(v.attempts_used, 3);
  ASSERT_EQ(v.attempts.size(), 3u);
  for (const auto& a : v.attempts) EXPECT_EQ(a.outcome, RejectionReason::kTypeCheckFailed);
  EXPECT_NE(v.attempts[0].detail.find("unsolved goals"), std::string::npos);
}

TEST(Equivalence, WhitelistViolationsNeverReachTheChecker) {
  MockBackend backend;
  auto judge = JudgeSequence("simp [Nat.add_comm]", "linarith", "rfl");
  EquivalenceVerdict v =
      CheckEquivalence("theorem cand (n : ℕ) : n + 1 = 1 + n", kGold, judge, backend, Store());
  EXPECT_FALSE(v.equivalent);
  EXPECT_EQ(backend.calls(), 0);
  EXPECT_EQ(v.attempts_used, 5);
  for (const auto& a : v.attempts) EXPECT_EQ(a.outcome, RejectionReason::kWhitelistViolation);
  EXPECT_NE(v.attempts[0].detail.find("simp [Nat.add_comm]"), std::string::npos);
}

TEST(Equivalence, RecoversAfterFeedback) {
  MockBackend backend;
  auto judge = JudgeSequence("nlinarith [sq_nonneg n]", "rfl", "rfl");
  EquivalenceVerdict v =
      CheckEquivalence("theorem cand (n : ℕ) : n + 1 = 1 + n", kGold, judge, backend, Store());
  EXPECT_TRUE(v.equivalent);
  EXPECT_EQ(v.attempts_used, 2);
  EXPECT_EQ(v.attempts[0].outcome, RejectionReason::kWhitelistViolation);
}

TEST(Equivalence, UnparseableHeaderIsGoalConstruction) {
  MockBackend backend;
  auto judge = Judge({"rfl"});
  EquivalenceVerdict v = CheckEquivalence("def foo := 3", kGold, judge, backend, Store());
  EXPECT_FALSE(v.equivalent);
  EXPECT_EQ(v.rejection, RejectionReason::kGoalConstruction);
  EXPECT_EQ(v.attempts_used, 0);
  auto j = ToJson(v);
  EXPECT_EQ(j["rejection"], "goal_construction");
}

class DownJudge : public gen::GenerationClient {
 public:
  gen::GenerationResponse Generate(const gen::GenerationRequest&) override {
    throw Error(ErrorCode::kUnavailable, "down");
  }
};

TEST(Equivalence, JudgeOutageCountsAsAttempts) {
  MockBackend backend;
  DownJudge judge;
  EquivalenceOptions opts;
  opts.attempt_budget = 2;
  EquivalenceVerdict v = CheckEquivalence("theorem c (n : ℕ) : n + 1 = 1 + n", kGold, judge,
                                          backend, Store(), opts);
  EXPECT_FALSE(v.equivalent);
  EXPECT_EQ(v.attempts.size(), 2u);
  EXPECT_EQ(v.attempts[1].outcome, RejectionReason::kJudgeFailure);
  opts.attempt_budget = 0;
  EXPECT_THROW(CheckEquivalence(kGold, kGold, judge, backend, Store(), opts), Error);
}

}  // namespace
}  // namespace pb::lean
