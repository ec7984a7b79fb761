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

#ifndef PB_LEAN_SYNTAX_H_
#define PB_LEAN_SYNTAX_H_

#include <array>
#include <string>
#include <string_view>
#include <vector>

// Text-level Lean 4 utilities. Nothing here talks to a Lean process; these
// functions only look at source text.

namespace pb::lean {

// `line` is 1-based, `column` 0-based in code points (the Lean REPL
// convention).
struct SourcePosition {
  int line = 1;
  int column = 0;

  bool operator==(const SourcePosition&) const = default;
};

// Blanks out comments (and string literals unless `keep_strings`) with
// spaces, keeping newlines and byte offsets intact.
std::string MaskComments(std::string_view src, bool keep_strings = false);

// Positions of every standalone `sorry` token outside comments and strings.
std::vector<SourcePosition> FindSorryTokens(std::string_view src);

SourcePosition PositionOfOffset(std::string_view src, std::size_t offset);

// True if the text, after leading comments, attributes and modifiers,
// starts with the `theorem` or `lemma` keyword.
bool LooksLikeTheoremHeader(std::string_view theorem);

enum class BinderKind { kExplicit, kImplicit, kStrictImplicit, kInstance };

struct BinderGroup {
  BinderKind kind = BinderKind::kExplicit;
  std::vector<std::string> names;  // Empty for anonymous instance binders.
  std::string type;                // Empty for untyped binders.
  bool is_hypothesis = false;
};

struct TheoremHeader {
  std::string keyword;
  std::string name;
  std::vector<BinderGroup> binders;
  std::string conclusion;
};

// Parses `theorem name binders* : type`. A trailing `:= ...` is ignored.
// Throws NotAProposition for definitions and other non-theorem declarations,
// ParseFailure for anything malformed.
TheoremHeader ParseTheoremHeader(std::string_view header);

// Heuristic used to decide whether a binder's type is a hypothesis: it
// mentions a relation or connective at any depth.
bool LooksLikeProposition(std::string_view type);

// Closes a header over its binders: variables become a `∀` prefix, and
// hypotheses become premises of an implication chain. The result is wrapped
// in parentheses, e.g. `(∀ (x : ℝ), (0 < x) → x ^ 2 > 0)`.
std::string ClosedProposition(const TheoremHeader& header);

struct Declaration {
  std::string theorem;  // Header up to, not including, the top-level `:=`.
  std::string proof;    // Everything after `:=`, trimmed.
};

// Splits Lean source (optionally wrapped in a markdown code fence) into a
// theorem header and its proof. Throws ParseFailure if no theorem/lemma with
// a top-level `:=` is found.
Declaration SplitDeclaration(std::string_view text);

// Contents of the first fenced code block, or the trimmed text itself.
std::string ExtractCodeBlock(std::string_view text);

// `theorem := proof`; an empty proof becomes `by sorry` so that statement-
// only pairs are never mistaken for complete ones.
std::string FlSource(std::string_view theorem, std::string_view proof);

// Strips a code fence and a leading `by`, and removes common indentation.
std::string NormalizeTacticScript(std::string_view script);

struct EquivalenceGoal {
  std::string prop_a;
  std::string prop_b;

  // Full Lean source with `script` spliced in as the proof of the goal.
  std::string Render(std::string_view script) const;
  // The goal with a `sorry` placeholder.
  std::string Text() const { return Render("sorry"); }
};

EquivalenceGoal BuildEquivalenceGoal(std::string_view a, std::string_view b);

inline constexpr std::array<std::string_view, 7> kTacticWhitelist = {
    "rfl", "simp", "ring", "constructor", "intro", "intros", "nlinarith"};

struct WhitelistCheck {
  bool accepted = false;
  std::string violation;  // Empty when accepted.
  std::string offending;  // The tactic item that caused the rejection.
};

// Accepts a tactic script iff every tactic is whitelisted, `simp`, `rfl`,
// `ring`, `constructor` and `nlinarith` appear bare, and `intro`/`intros`
// carry only binder names. Bullets and `;`, `<;>`, newline separators are
// structural.
WhitelistCheck ValidateTacticWhitelist(std::string_view script);

}  // namespace pb::lean

#endif  // PB_LEAN_SYNTAX_H_
