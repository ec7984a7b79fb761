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

#include "pb/lean_syntax.h"

#include <algorithm>
#include <cctype>
#include <optional>

#include "pb/error.h"
#include "pb/util.h"

namespace pb::lean {
namespace {

constexpr std::string_view kBullet = "\xC2\xB7";  // ·

struct Bracket {
  std::string_view open;
  std::string_view close;
};

constexpr Bracket kBrackets[] = {
    {"(", ")"}, {"[", "]"}, {"{", "}"}, {"\xE2\xA6\x83", "\xE2\xA6\x84"},
    {"\xE2\x9F\xA8", "\xE2\x9F\xA9"}};

bool At(std::string_view s, std::size_t i, std::string_view tok) {
  return i + tok.size() <= s.size() && s.compare(i, tok.size(), tok) == 0;
}

const Bracket* OpenerAt(std::string_view s, std::size_t i) {
  for (const auto& b : kBrackets) {
    if (At(s, i, b.open)) return &b;
  }
  return nullptr;
}

const Bracket* CloserAt(std::string_view s, std::size_t i) {
  for (const auto& b : kBrackets) {
    if (At(s, i, b.close)) return &b;
  }
  return nullptr;
}

// Offset one past the closer matching the opener at `i`; npos if unbalanced.
std::size_t MatchBracket(std::string_view s, std::size_t i) {
  std::vector<std::string_view> expected;
  std::size_t j = i;
  while (j < s.size()) {
    if (const auto* open = OpenerAt(s, j)) {
      expected.push_back(open->close);
      j += open->open.size();
    } else if (const auto* close = CloserAt(s, j)) {
      if (expected.empty() || expected.back() != close->close) {
        return std::string_view::npos;
      }
      expected.pop_back();
      j += close->close.size();
      if (expected.empty()) return j;
    } else {
      ++j;
    }
  }
  return std::string_view::npos;
}

// First offset >= start where `pred` holds outside any bracket group.
template <typename Pred>
std::size_t FindTopLevel(std::string_view s, std::size_t start, Pred pred) {
  std::size_t j = start;
  while (j < s.size()) {
    if (OpenerAt(s, j) != nullptr) {
      j = MatchBracket(s, j);
      if (j == std::string_view::npos) return j;
      continue;
    }
    if (pred(s, j)) return j;
    ++j;
  }
  return std::string_view::npos;
}

std::size_t FindTopLevelAssign(std::string_view s, std::size_t start) {
  return FindTopLevel(s, start, [](std::string_view t, std::size_t j) {
    return At(t, j, ":=");
  });
}

std::size_t FindTopLevelColon(std::string_view s, std::size_t start) {
  return FindTopLevel(s, start, [](std::string_view t, std::size_t j) {
    return t[j] == ':' && !At(t, j, ":=") && !At(t, j, "::") &&
           !(j > 0 && t[j - 1] == ':');
  });
}

bool IsSpace(char c) { return std::isspace(static_cast<unsigned char>(c)); }

std::size_t SkipSpace(std::string_view s, std::size_t i) {
  while (i < s.size() && IsSpace(s[i])) ++i;
  return i;
}

bool IsWordByte(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || c == '\'' || c == '.' || c == '!' ||
         c == '?' || u >= 0x80;
}

// Reads a declaration name or keyword: stops at whitespace, brackets or ':'.
std::string ReadName(std::string_view s, std::size_t& i) {
  std::size_t b = i;
  while (i < s.size() && !IsSpace(s[i]) && s[i] != ':' &&
         OpenerAt(s, i) == nullptr) {
    ++i;
  }
  return std::string(s.substr(b, i - b));
}

constexpr std::string_view kModifiers[] = {
    "private", "protected", "noncomputable", "nonrec", "unsafe", "partial"};

std::size_t SkipPreamble(std::string_view clean, std::size_t i) {
  while (true) {
    i = SkipSpace(clean, i);
    if (At(clean, i, "@[")) {
      auto end = MatchBracket(clean, i + 1);
      if (end == std::string_view::npos) return clean.size();
      i = end;
      continue;
    }
    bool skipped = false;
    for (auto m : kModifiers) {
      if (At(clean, i, m) &&
          (i + m.size() == clean.size() || IsSpace(clean[i + m.size()]))) {
        i += m.size();
        skipped = true;
        break;
      }
    }
    if (!skipped) return i;
  }
}

// Collapses whitespace runs containing a newline into one space, so that
// multi-line headers render on one line.
std::string CollapseNewlines(std::string_view s) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (IsSpace(s[i])) {
      std::size_t j = i;
      bool newline = false;
      while (j < s.size() && IsSpace(s[j])) newline |= s[j++] == '\n';
      if (newline) {
        out.push_back(' ');
      } else {
        out.append(s.substr(i, j - i));
      }
      i = j;
    } else {
      out.push_back(s[i++]);
    }
  }
  return std::string(Trim(out));
}

std::vector<std::string> SplitWords(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (true) {
    i = SkipSpace(s, i);
    if (i >= s.size()) break;
    std::size_t b = i;
    while (i < s.size() && !IsSpace(s[i])) ++i;
    out.emplace_back(s.substr(b, i - b));
  }
  return out;
}

Error ParseError(const std::string& why) {
  return Error(ErrorCode::kParseFailure, why);
}

std::string RenderBinder(const BinderGroup& g) {
  std::string open, close;
  switch (g.kind) {
    case BinderKind::kExplicit: open = "("; close = ")"; break;
    case BinderKind::kImplicit: open = "{"; close = "}"; break;
    case BinderKind::kStrictImplicit:
      open = "\xE2\xA6\x83";
      close = "\xE2\xA6\x84";
      break;
    case BinderKind::kInstance: open = "["; close = "]"; break;
  }
  std::string inner;
  for (std::size_t i = 0; i < g.names.size(); ++i) {
    if (i) inner += " ";
    inner += g.names[i];
  }
  if (!g.type.empty()) {
    if (!inner.empty()) inner += " : ";
    inner += g.type;
  }
  return open + inner + close;
}

bool IsIdentifierToken(std::string_view tok) {
  if (tok.empty()) return false;
  if (tok == "_") return true;
  if (std::isdigit(static_cast<unsigned char>(tok[0]))) return false;
  return std::all_of(tok.begin(), tok.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_' || c == '\'' || u >= 0x80;
  });
}

}  // namespace

std::string MaskComments(std::string_view src, bool keep_strings) {
  std::string out(src);
  const std::size_t n = src.size();
  auto blank = [&](std::size_t k) {
    if (out[k] != '\n') out[k] = ' ';
  };
  std::size_t i = 0;
  while (i < n) {
    if (At(src, i, "--")) {
      while (i < n && src[i] != '\n') blank(i++);
    } else if (At(src, i, "/-")) {
      int depth = 0;
      while (i < n) {
        if (At(src, i, "/-")) {
          ++depth;
          blank(i);
          blank(i + 1);
          i += 2;
        } else if (At(src, i, "-/")) {
          --depth;
          blank(i);
          blank(i + 1);
          i += 2;
          if (depth == 0) break;
        } else {
          blank(i++);
        }
      }
    } else if (src[i] == '"') {
      std::size_t b = i++;
      while (i < n && src[i] != '"') {
        if (src[i] == '\\' && i + 1 < n) ++i;
        ++i;
      }
      if (i < n) ++i;
      if (!keep_strings) {
        for (std::size_t k = b; k < i; ++k) blank(k);
      }
    } else {
      ++i;
    }
  }
  return out;
}

SourcePosition PositionOfOffset(std::string_view src, std::size_t offset) {
  SourcePosition pos;
  for (std::size_t i = 0; i < offset && i < src.size(); ++i) {
    auto u = static_cast<unsigned char>(src[i]);
    if (src[i] == '\n') {
      ++pos.line;
      pos.column = 0;
    } else if ((u & 0xC0) != 0x80) {
      ++pos.column;
    }
  }
  return pos;
}

std::vector<SourcePosition> FindSorryTokens(std::string_view src) {
  constexpr std::string_view kSorry = "sorry";
  const std::string clean = MaskComments(src);
  auto ident = [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_' || c == '\'' || c == '.' || c == '!' ||
           c == '?';
  };
  std::vector<SourcePosition> out;
  std::size_t pos = 0;
  while ((pos = clean.find(kSorry, pos)) != std::string::npos) {
    std::size_t end = pos + kSorry.size();
    bool left_ok = pos == 0 || !ident(clean[pos - 1]);
    bool right_ok = end >= clean.size() || !ident(clean[end]);
    if (left_ok && right_ok) out.push_back(PositionOfOffset(src, pos));
    pos = end;
  }
  return out;
}

bool LooksLikeTheoremHeader(std::string_view theorem) {
  const std::string clean = MaskComments(theorem);
  std::size_t i = SkipPreamble(clean, 0);
  std::string kw = ReadName(clean, i);
  return kw == "theorem" || kw == "lemma";
}

bool LooksLikeProposition(std::string_view type) {
  static constexpr std::string_view kSymbols[] = {
      "=", "<", ">", "\xE2\x89\xA0" /*≠*/, "\xE2\x89\xA4" /*≤*/,
      "\xE2\x89\xA5" /*≥*/, "\xE2\x88\xA3" /*∣*/, "\xE2\x88\xA7" /*∧*/,
      "\xE2\x88\xA8" /*∨*/, "\xC2\xAC" /*¬*/, "\xE2\x86\x94" /*↔*/,
      "\xE2\x88\x88" /*∈*/, "\xE2\x88\x89" /*∉*/, "\xE2\x8A\x86" /*⊆*/,
      "\xE2\x8A\x82" /*⊂*/, "\xE2\x8A\x87" /*⊇*/, "\xE2\x8A\x83" /*⊃*/,
      "\xE2\x88\x80" /*∀*/, "\xE2\x88\x83" /*∃*/, "\xE2\x89\xA1" /*≡*/};
  for (auto sym : kSymbols) {
    if (type.find(sym) != std::string_view::npos) return true;
  }
  for (const auto& w : SplitWords(type)) {
    if (w == "True" || w == "False") return true;
  }
  return false;
}

TheoremHeader ParseTheoremHeader(std::string_view header) {
  const std::string clean = MaskComments(header, /*keep_strings=*/true);
  std::string_view s = clean;
  TheoremHeader out;

  std::size_t i = SkipPreamble(s, 0);
  out.keyword = ReadName(s, i);
  static constexpr std::string_view kNonProp[] = {
      "def", "abbrev", "instance", "structure", "inductive", "class", "opaque"};
  for (auto kw : kNonProp) {
    if (out.keyword == kw) {
      throw Error(ErrorCode::kNotAProposition,
                  "'" + out.keyword + "' declarations are not propositions");
    }
  }
  if (out.keyword != "theorem" && out.keyword != "lemma" &&
      out.keyword != "example") {
    throw ParseError("expected theorem, lemma or example, got '" +
                     out.keyword + "'");
  }
  if (out.keyword != "example") {
    i = SkipSpace(s, i);
    out.name = ReadName(s, i);
    if (out.name.empty()) throw ParseError("missing declaration name");
  }

  while (true) {
    i = SkipSpace(s, i);
    if (i >= s.size()) throw ParseError("missing ':' before the statement");
    if (const auto* open = OpenerAt(s, i)) {
      std::size_t end = MatchBracket(s, i);
      if (end == std::string_view::npos) throw ParseError("unbalanced binder");
      std::string_view content = s.substr(
          i + open->open.size(), end - open->close.size() - i - open->open.size());
      BinderGroup g;
      if (open->open == "(") {
        g.kind = BinderKind::kExplicit;
      } else if (open->open == "{") {
        g.kind = BinderKind::kImplicit;
      } else if (open->open == "[") {
        g.kind = BinderKind::kInstance;
      } else if (open->open == "\xE2\xA6\x83") {
        g.kind = BinderKind::kStrictImplicit;
      } else {
        throw ParseError("unexpected anonymous constructor in binders");
      }
      std::size_t colon = FindTopLevelColon(content, 0);
      if (colon == std::string_view::npos) {
        if (g.kind == BinderKind::kInstance) {
          g.type = CollapseNewlines(content);
        } else {
          g.names = SplitWords(content);
        }
      } else {
        g.names = SplitWords(content.substr(0, colon));
        std::string_view type = content.substr(colon + 1);
        if (auto def = FindTopLevelAssign(type, 0);
            def != std::string_view::npos) {
          type = type.substr(0, def);
        }
        g.type = CollapseNewlines(type);
        if (g.type.empty()) throw ParseError("binder with empty type");
      }
      if (g.names.empty() && g.type.empty()) throw ParseError("empty binder");
      g.is_hypothesis = g.kind != BinderKind::kInstance && !g.type.empty() &&
                        LooksLikeProposition(g.type);
      out.binders.push_back(std::move(g));
      i = end;
      continue;
    }
    if (s[i] == ':' && !At(s, i, ":=")) {
      std::string_view rest = s.substr(i + 1);
      if (auto def = FindTopLevelAssign(rest, 0);
          def != std::string_view::npos) {
        rest = rest.substr(0, def);
      }
      out.conclusion = CollapseNewlines(rest);
      if (out.conclusion.empty()) throw ParseError("empty statement");
      return out;
    }
    throw ParseError("unexpected text in header near offset " +
                     std::to_string(i));
  }
}

std::string ClosedProposition(const TheoremHeader& header) {
  std::string body;
  std::vector<std::string> pending;
  auto flush = [&] {
    if (pending.empty()) return;
    body += "\xE2\x88\x80 ";  // ∀
    for (std::size_t k = 0; k < pending.size(); ++k) {
      if (k) body += " ";
      body += pending[k];
    }
    body += ", ";
    pending.clear();
  };
  for (const auto& g : header.binders) {
    if (g.is_hypothesis) {
      flush();
      body += "(" + g.type + ") \xE2\x86\x92 ";  // →
    } else {
      pending.push_back(RenderBinder(g));
    }
  }
  flush();
  body += header.conclusion;
  return "(" + body + ")";
}

std::string ExtractCodeBlock(std::string_view text) {
  auto open = text.find("```");
  if (open == std::string_view::npos) return std::string(Trim(text));
  auto body = text.find('\n', open);
  if (body == std::string_view::npos) return std::string(Trim(text));
  auto close = text.find("```", body + 1);
  if (close == std::string_view::npos) {
    return std::string(Trim(text.substr(body + 1)));
  }
  return std::string(Trim(text.substr(body + 1, close - body - 1)));
}

Declaration SplitDeclaration(std::string_view text) {
  const std::string code = ExtractCodeBlock(text);
  const std::string clean = MaskComments(code);
  std::size_t start = std::string::npos;
  for (std::string_view kw : {"theorem", "lemma"}) {
    std::size_t pos = 0;
    while ((pos = clean.find(kw, pos)) != std::string::npos) {
      bool left = pos == 0 || IsSpace(clean[pos - 1]);
      bool right = pos + kw.size() < clean.size() &&
                   IsSpace(clean[pos + kw.size()]);
      if (left && right) break;
      pos += kw.size();
    }
    if (pos != std::string::npos) start = std::min(start, pos);
  }
  if (start == std::string::npos) {
    throw ParseError("no theorem or lemma declaration found");
  }
  std::size_t assign = FindTopLevelAssign(clean, start);
  if (assign == std::string::npos) throw ParseError("declaration has no ':='");
  Declaration d;
  d.theorem = std::string(Trim(std::string_view(code).substr(start, assign - start)));
  d.proof = std::string(Trim(std::string_view(code).substr(assign + 2)));
  return d;
}

std::string FlSource(std::string_view theorem, std::string_view proof) {
  std::string src(Trim(theorem));
  auto p = Trim(proof);
  src += " := ";
  if (p.empty()) {
    src += "by\n  sorry";
  } else {
    src += p;
  }
  return src;
}

std::string NormalizeTacticScript(std::string_view script) {
  std::string code = ExtractCodeBlock(script);
  std::string_view t = Trim(code);
  if (At(t, 0, "by") && (t.size() == 2 || IsSpace(t[2]))) {
    t = Trim(t.substr(2));
  }
  auto lines = SplitLines(t);
  std::size_t indent = std::string::npos;
  // The first line was trimmed already, so only later lines count.
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const auto& l = lines[k];
    if (Trim(l).empty()) continue;
    indent = std::min(indent, l.find_first_not_of(' '));
  }
  std::string out;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    std::string_view l = lines[k];
    if (k > 0 && indent != std::string::npos && l.size() >= indent) {
      l = l.substr(indent);
    }
    if (k) out += "\n";
    out += l;
  }
  return std::string(Trim(out));
}

std::string EquivalenceGoal::Render(std::string_view script) const {
  std::string out = "def PropA := " + prop_a + "\n";
  out += "def PropB := " + prop_b + "\n";
  out += "example : PropA \xE2\x86\x94 PropB := by\n";  // ↔
  for (const auto& line : SplitLines(NormalizeTacticScript(script))) {
    if (Trim(line).empty()) continue;
    out += "  " + line + "\n";
  }
  return out;
}

EquivalenceGoal BuildEquivalenceGoal(std::string_view a, std::string_view b) {
  EquivalenceGoal goal;
  goal.prop_a = ClosedProposition(ParseTheoremHeader(a));
  goal.prop_b = ClosedProposition(ParseTheoremHeader(b));
  return goal;
}

WhitelistCheck ValidateTacticWhitelist(std::string_view script) {
  const std::string clean = MaskComments(NormalizeTacticScript(script));
  std::vector<std::string> items;
  std::string current;
  int depth = 0;
  auto push = [&] {
    items.push_back(current);
    current.clear();
  };
  for (std::size_t i = 0; i < clean.size();) {
    if (OpenerAt(clean, i) != nullptr) {
      ++depth;
    } else if (CloserAt(clean, i) != nullptr) {
      --depth;
    }
    if (depth == 0) {
      if (clean[i] == '\n' || clean[i] == ';') {
        push();
        ++i;
        continue;
      }
      if (At(clean, i, "<;>")) {
        push();
        i += 3;
        continue;
      }
      if (At(clean, i, kBullet)) {
        push();
        i += kBullet.size();
        continue;
      }
    }
    current.push_back(clean[i++]);
  }
  push();

  WhitelistCheck result;
  bool any = false;
  for (auto& raw : items) {
    std::string_view item = Trim(raw);
    // ASCII focusing bullet.
    if (!item.empty() && item[0] == '.' &&
        (item.size() == 1 || IsSpace(item[1]))) {
      item = Trim(item.substr(1));
    }
    if (item.empty()) continue;
    any = true;
    std::size_t h = 0;
    while (h < item.size() && IsWordByte(item[h])) ++h;
    std::string head(item.substr(0, h));
    std::string_view args = Trim(item.substr(h));
    auto reject = [&](std::string why) {
      result.accepted = false;
      result.violation = std::move(why);
      result.offending = std::string(item);
      return result;
    };
    bool listed = std::find(kTacticWhitelist.begin(), kTacticWhitelist.end(),
                            head) != kTacticWhitelist.end();
    if (!listed) return reject("tactic not whitelisted");
    if (head == "simp") {
      if (!args.empty()) return reject("simp with arguments");
    } else if (head == "intro" || head == "intros") {
      for (const auto& w : SplitWords(args)) {
        if (!IsIdentifierToken(w) || w == "at" || w == "only" ||
            w == "using" || w == "with") {
          return reject("unsupported tactic arguments");
        }
      }
    } else if (!args.empty()) {
      return reject("unsupported tactic arguments");
    }
  }
  if (!any) {
    result.accepted = false;
    result.violation = "empty script";
    return result;
  }
  result.accepted = true;
  return result;
}

}  // namespace pb::lean
