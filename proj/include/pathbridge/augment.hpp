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

// Turns free-flow dialogue turns into (context, target, response) instances:
// the target is a clause rebuilt from semantic-role frames of the response.

#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pathbridge/pipeline.hpp"
#include "pathbridge/scorer.hpp"

namespace pathbridge {
namespace augment {

// Byte offsets into the response, [start, end).
struct Span {
  std::string text;
  size_t start = 0;
  size_t end = 0;
};

struct SrlFrame {
  Span predicate;
  std::vector<Span> arguments;
};

struct AugmentConfig {
  double threshold = 0.7;
  int max_history = 2;

  void Validate() const;
};

// Clause of the frame whose predicate starts last: its spans in text order,
// single-spaced, plus the sentence-final .!? when it directly follows the
// last span. nullopt without frames. Throws kSpanOutOfRange.
std::optional<std::string> CreateTarget(std::string_view response,
                                        const std::vector<SrlFrame>& frames);

// Last `max_history` utterances, order kept.
std::vector<std::string> TruncateHistory(const std::vector<std::string>& dialogue,
                                         int max_history);

struct DialogueRecord {
  std::string id;
  std::vector<std::string> dialogue;  // turns before the response
  std::string response;
  std::vector<SrlFrame> frames;
};

// JSONL {"id"?, "dialogue": [..], "response", "frames": [{"predicate":
// {"text","start","end"}, "arguments": [{...}, ...]}]}.
std::vector<DialogueRecord> ReadDialogueRecords(std::istream& in);

struct Candidate {
  pipeline::TransitionInstance instance;
  std::optional<double> score;
};

struct BuildResult {
  std::vector<pipeline::TransitionInstance> instances;
  std::vector<std::string> skipped;  // "<id or index>: reason"
};

// Applies history truncation and target creation; drops records with an
// empty context, no frames, or a target equal to the whole response.
BuildResult BuildInstances(const std::vector<DialogueRecord>& records,
                           const AugmentConfig& config);

struct FilterResult {
  std::vector<Candidate> kept;
  std::vector<Candidate> scored;     // every instance with its score, input order
  std::vector<size_t> failures;      // indices whose scoring failed
};

// Keeps instances scoring >= threshold, in input order.
FilterResult FilterAugmented(const std::vector<pipeline::TransitionInstance>& instances,
                             Scorer& scorer, const AugmentConfig& config);

ScoreRequest RequestFor(const pipeline::TransitionInstance& instance);

}  // namespace augment
}  // namespace pathbridge
