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

#include "pb/mock_backend.h"

#include <algorithm>

#include "pb/error.h"
#include "pb/lean_syntax.h"
#include "pb/util.h"

namespace pb::lean {
namespace {

using nlohmann::json;

std::string CollapseWhitespace(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : Trim(s)) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      space = true;
      continue;
    }
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  return out;
}

std::string DefinitionOf(std::string_view source, std::string_view name) {
  const std::string prefix = "def " + std::string(name) + " := ";
  for (const auto& line : SplitLines(source)) {
    if (StartsWith(line, prefix)) return line.substr(prefix.size());
  }
  return {};
}

json Message(std::string_view severity, SourcePosition pos,
             std::string_view data) {
  return {{"severity", severity},
          {"pos", {{"line", pos.line}, {"column", pos.column}}},
          {"endPos", {{"line", pos.line}, {"column", pos.column}}},
          {"data", data}};
}

}  // namespace

std::string MockBackend::Key(const ReplCommand& command) {
  return command.source + (command.all_tactics ? "\x01tactics" : "");
}

void MockBackend::AddTranscript(const ReplCommand& command, json response) {
  transcripts_[Key(command)] = std::move(response);
}

void MockBackend::LoadTranscripts(const std::filesystem::path& path) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(path)) {
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  for (const auto& file : files) {
    std::size_t line_no = 0;
    for (const auto& line : SplitLines(ReadFile(file))) {
      ++line_no;
      if (Trim(line).empty()) continue;
      json entry;
      try {
        entry = json::parse(line);
      } catch (const json::parse_error& e) {
        throw Error(ErrorCode::kMalformedLine,
                    file.string() + ":" + std::to_string(line_no) + ": " +
                        e.what(),
                    std::to_string(line_no));
      }
      const json& req = entry.at("request");
      AddTranscript({req.at("cmd").get<std::string>(),
                     req.value("allTactics", false)},
                    entry.at("response"));
    }
  }
}

json MockBackend::Execute(const ReplCommand& command) {
  ++calls_;
  if (auto it = transcripts_.find(Key(command)); it != transcripts_.end()) {
    return it->second;
  }
  if (!options_.synthesize) {
    throw Error(ErrorCode::kBackendUnavailable,
                "mock backend has no transcript for this command");
  }
  return Synthesize(command);
}

json MockBackend::Synthesize(const ReplCommand& command) const {
  const std::string& src = command.source;
  json messages = json::array();
  json sorries = json::array();

  for (const auto& pos : FindSorryTokens(src)) {
    sorries.push_back({{"pos", {{"line", pos.line}, {"column", pos.column}}},
                       {"goal", "\xE2\x8A\xA2 ?"}});
  }
  if (!sorries.empty()) {
    messages.push_back(
        Message("warning", {1, 0}, "declaration uses 'sorry'"));
  }

  const std::string clean = MaskComments(src);
  for (const auto& tok : options_.error_tokens) {
    if (tok.empty()) continue;
    std::size_t pos = 0;
    while ((pos = clean.find(tok, pos)) != std::string::npos) {
      messages.push_back(Message("error", PositionOfOffset(src, pos),
                                 "unknown identifier '" + tok + "'"));
      pos += tok.size();
    }
  }

  if (src.find("example : PropA \xE2\x86\x94 PropB") != std::string::npos) {
    auto a = CollapseWhitespace(DefinitionOf(src, "PropA"));
    auto b = CollapseWhitespace(DefinitionOf(src, "PropB"));
    if (a.empty() || b.empty() || a != b) {
      messages.push_back(Message("error", {3, 0}, "unsolved goals"));
    }
  }
  return {{"env", 0}, {"messages", messages}, {"sorries", sorries}};
}

}  // namespace pb::lean
