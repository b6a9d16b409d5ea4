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

#pragma once

#include <optional>
#include <string>
#include <vector>

namespace pathbridge {

struct ScoreRequest {
  std::string context;  // utterances joined with single spaces
  std::string response;
  std::string target;
};

// Coherence scorer contract: each request maps to a value in [0, 1], or to
// nullopt when that request could not be scored.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::vector<std::optional<double>> ScoreBatch(
      const std::vector<ScoreRequest>& requests) = 0;
};

// Subprocess form: one "context<TAB>response<TAB>target" line per request
// in, one decimal score per line out. Lines that do not parse or fall outside
// [0, 1] yield nullopt; a line-count mismatch throws kScorerFailure.
class CommandScorer : public Scorer {
 public:
  explicit CommandScorer(std::string command) : command_(std::move(command)) {}
  std::vector<std::optional<double>> ScoreBatch(
      const std::vector<ScoreRequest>& requests) override;

 private:
  std::string command_;
};

std::string FormatScoreRequest(const ScoreRequest& request);
ScoreRequest ParseScoreRequest(const std::string& line);

}  // namespace pathbridge
