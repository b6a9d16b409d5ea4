/*
 * Copyright 2026 The pathbridge Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "pathbridge/scorer.hpp"

#include <cmath>
#include <cstdlib>

#include "pathbridge/error.hpp"
#include "pathbridge/subprocess.hpp"
#include "pathbridge/text.hpp"

namespace pathbridge {

std::string FormatScoreRequest(const ScoreRequest& request) {
  return text::SanitizeField(request.context) + "\t" + text::SanitizeField(request.response) +
         "\t" + text::SanitizeField(request.target);
}

ScoreRequest ParseScoreRequest(const std::string& line) {
  const auto fields = text::Split(line, '\t');
  if (fields.size() != 3) throw Error(ErrorKind::kFormat, "score request needs 3 fields");
  return {fields[0], fields[1], fields[2]};
}

std::vector<std::optional<double>> CommandScorer::ScoreBatch(
    const std::vector<ScoreRequest>& requests) {
  std::vector<std::string> lines;
  lines.reserve(requests.size());
  for (const auto& r : requests) lines.push_back(FormatScoreRequest(r));
  std::vector<std::string> replies;
  try {
    replies = RunLineProtocol(command_, lines);
  } catch (const Error& e) {
    throw Error(ErrorKind::kScorerFailure, e.what());
  }
  if (replies.size() != requests.size()) {
    throw Error(ErrorKind::kScorerFailure, "scorer returned " + std::to_string(replies.size()) +
                                               " scores for " + std::to_string(requests.size()));
  }
  std::vector<std::optional<double>> out;
  for (const auto& r : replies) {
    const std::string s(text::Trim(r));
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v) || v < 0.0 || v > 1.0) {
      out.push_back(std::nullopt);
    } else {
      out.push_back(v);
    }
  }
  return out;
}

}  // namespace pathbridge
