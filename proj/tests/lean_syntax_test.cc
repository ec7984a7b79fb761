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

#include <random>

#include <gtest/gtest.h>

#include "json.hpp"
#include "pb/error.h"
#include "pb/lean_syntax.h"
#include "pb/util.h"
#include "testkit.h"

namespace pb::lean {
namespace {

const char* kPropA =
    "theorem mathd_algebra_478 (b h v : ℝ) (h₀ : 0 < b ∧ 0 < h ∧ 0 < v)\n"
    "    (h₁ : v = 1 / 3 * (b * h)) (h₂ : b = 30) (h₃ : h = 13 / 2) : v = 65";
const char* kPropB =
    "theorem cone_volume {B h : ℝ} (hB : B = 30) (hh : h = 6.5) :\n"
    "    (1 / 3) * B * h = 65";
const char* kWorkedScript =
    "constructor\n· intro\n  simp\n· ring\n  simp\n  intros\n  nlinarith";

TEST(Mask, CommentsAndStrings) {
  std::string src = "a -- sorry\nb /- x /- y -/ sorry -/ c \"sorry\" d";
  std::string masked = MaskComments(src);
  EXPECT_EQ(masked.size(), src.size());
  EXPECT_EQ(masked.find("sorry"), std::string::npos);
  EXPECT_NE(masked.find('\n'), std::string::npos);
  EXPECT_NE(masked.find(" c "), std::string::npos);
  EXPECT_NE(MaskComments(src, true).find("\"sorry\""), std::string::npos);
}

TEST(Sorry, TokensOnly) {
  EXPECT_TRUE(FindSorryTokens("theorem t : p := sorry_lemma x").empty());
  EXPECT_TRUE(FindSorryTokens("-- sorry\n/- sorry -/").empty());
  auto hits = FindSorryTokens("theorem t : 1 = 2 := by\n  sorry");
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0], (SourcePosition{2, 2}));
  EXPECT_EQ(FindSorryTokens("⟨sorry, sorry⟩").size(), 2u);
}

TEST(Position, ColumnsCountCodePoints) {
  std::string s = "ℝℝ x";
  EXPECT_EQ(PositionOfOffset(s, s.find('x')), (SourcePosition{1, 3}));
  EXPECT_EQ(PositionOfOffset("a\nbc", 3), (SourcePosition{2, 1}));
}

TEST(Header, Detection) {
  EXPECT_TRUE(LooksLikeTheoremHeader("theorem x : True"));
  EXPECT_TRUE(LooksLikeTheoremHeader("/-- doc -/\n@[simp] private lemma x : True"));
  EXPECT_FALSE(LooksLikeTheoremHeader("def x : Nat := 1"));
  EXPECT_FALSE(LooksLikeTheoremHeader(""));
}

TEST(Header, ParsesBinders) {
  TheoremHeader h = ParseTheoremHeader(kPropA);
  EXPECT_EQ(h.keyword, "theorem");
  EXPECT_EQ(h.name, "mathd_algebra_478");
  ASSERT_EQ(h.binders.size(), 5u);
  EXPECT_EQ(h.binders[0].names, (std::vector<std::string>{"b", "h", "v"}));
  EXPECT_FALSE(h.binders[0].is_hypothesis);
  EXPECT_TRUE(h.binders[1].is_hypothesis);
  EXPECT_EQ(h.binders[2].type, "v = 1 / 3 * (b * h)");
  EXPECT_EQ(h.conclusion, "v = 65");

  TheoremHeader g = ParseTheoremHeader(
      "lemma foo {α : Type*} [inst : Group α] ⦃x : α⦄ (f : α → α) : f x = x := rfl");
  ASSERT_EQ(g.binders.size(), 4u);
  EXPECT_EQ(g.binders[0].kind, BinderKind::kImplicit);
  EXPECT_EQ(g.binders[1].kind, BinderKind::kInstance);
  EXPECT_FALSE(g.binders[1].is_hypothesis);
  EXPECT_EQ(g.binders[2].kind, BinderKind::kStrictImplicit);
  EXPECT_FALSE(g.binders[3].is_hypothesis);  // Arrow alone is not a relation.
  EXPECT_EQ(g.conclusion, "f x = x");
}

TEST(Header, Errors) {
  try {
    ParseTheoremHeader("def f : Nat := 3");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotAProposition);
  }
  for (const char* bad : {"theorem : True", "theorem t (x : ℕ", "theorem t (x : ℕ)",
                          "axiom t : True", "theorem t :"}) {
    try {
      ParseTheoremHeader(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kParseFailure) << bad;
    }
  }
}

TEST(Header, ClosedProposition) {
  EXPECT_EQ(ClosedProposition(ParseTheoremHeader("theorem t : 1 = 1")), "(1 = 1)");
  EXPECT_EQ(ClosedProposition(ParseTheoremHeader(
                "theorem t (x : ℝ) (hx : 0 < x) : x ^ 2 > 0")),
            "(∀ (x : ℝ), (0 < x) → x ^ 2 > 0)");
}

TEST(Declaration, SplitsFencedSource) {
  Declaration d = SplitDeclaration(
      "Here you go:\n```lean\nimport Mathlib\n\ntheorem t (a : ℕ) : a + 0 = a := by\n  simp\n```\n");
  EXPECT_EQ(d.theorem, "theorem t (a : ℕ) : a + 0 = a");
  EXPECT_EQ(d.proof, "by\n  simp");
  // `:=` inside a binder default is not top-level.
  Declaration e = SplitDeclaration("theorem u (n : ℕ := 3) : n = n := rfl");
  EXPECT_EQ(e.proof, "rfl");
  EXPECT_THROW(SplitDeclaration("def x := 1"), Error);
  EXPECT_THROW(SplitDeclaration("theorem t : True"), Error);
}

TEST(Declaration, FlSourceAndScripts) {
  EXPECT_EQ(FlSource("theorem t : True", "trivial"), "theorem t : True := trivial");
  EXPECT_FALSE(FindSorryTokens(FlSource("theorem t : True", "")).empty());
  EXPECT_EQ(NormalizeTacticScript("```lean\nby\n    simp\n    ring\n```"), "simp\nring");
  EXPECT_EQ(NormalizeTacticScript("by rfl"), "rfl");
  EXPECT_EQ(ExtractCodeBlock("  plain  "), "plain");
}

TEST(Equivalence, WorkedGoalMatchesFixtureCommand) {
  EquivalenceGoal goal = BuildEquivalenceGoal(kPropA, kPropB);
  auto lines = testkit::NonEmptyLines(
      ReadFile(testkit::FixtureDir() / "repl" / "equivalence.jsonl"));
  auto cmd = nlohmann::json::parse(lines.at(0))["request"]["cmd"].get<std::string>();
  EXPECT_EQ(goal.Render(kWorkedScript), cmd);
  EXPECT_NE(goal.Text().find("  sorry\n"), std::string::npos);
}

TEST(Whitelist, WorkedScriptAccepted) {
  EXPECT_TRUE(ValidateTacticWhitelist(kWorkedScript).accepted);
  EXPECT_TRUE(ValidateTacticWhitelist("```lean\nby\n  constructor <;> simp\n```").accepted);
  EXPECT_TRUE(ValidateTacticWhitelist("intro x y; rfl").accepted);
  EXPECT_TRUE(ValidateTacticWhitelist("intros -- comment with linarith\nrfl").accepted);
}

TEST(Whitelist, RejectsArgumentsAndForeignTactics) {
  for (const char* bad : {"simp [x]", "simp only", "simp only [foo]", "linarith",
                          "nlinarith at h", "nlinarith [sq_nonneg x]", "rw [h]",
                          "intro ⟨a, b⟩", "ring_nf", "constructor\n· exact h", ""}) {
    WhitelistCheck c = ValidateTacticWhitelist(bad);
    EXPECT_FALSE(c.accepted) << bad;
    EXPECT_FALSE(c.violation.empty()) << bad;
  }
  EXPECT_EQ(ValidateTacticWhitelist("simp\nsimp [x]").offending, "simp [x]");
}

TEST(Whitelist, GeneratedScriptsMatchStructuralOracle) {
  std::mt19937_64 rng(2024);
  int accepted = 0;
  for (int i = 0; i < 500; ++i) {
    testkit::GeneratedScript s = testkit::RandomTacticScript(rng);
    EXPECT_EQ(ValidateTacticWhitelist(s.text).accepted, s.expected_accept) << s.text;
    accepted += s.expected_accept;
  }
  EXPECT_GT(accepted, 50);
  EXPECT_LT(accepted, 450);
}

}  // namespace
}  // namespace pb::lean
