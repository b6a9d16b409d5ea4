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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pathbridge {

// Every failure the library reports maps to one of these kinds. Callers that
// need to branch (the CLI's exit codes, the pipeline's per-pair recovery)
// switch on kind() instead of parsing messages.
enum class ErrorKind {
  kInvalidArgument,
  kIo,
  kFormat,
  // kg
  kMalformedLine,
  kEmptyGraph,
  // sampler
  kNoWalkableNode,
  // pathlm
  kEntityNotOnPath,
  kParse,
  kTargetMismatch,
  kMissingTemplate,
  kEmptyCorpus,
  kUnknownConcept,
  kNoPathFound,
  // entities
  kEmptyEntitySet,
  kNoPairs,
  // pipeline
  kNoEntities,
  kNoPathSurvived,
  // augment
  kSpanOutOfRange,
  kScorerFailure,
  // tcmetric
  kInsufficientDataset,
  kNoPositives,
  // evalkit
  kLengthMismatch,
  kDegenerateInput,
  kInsufficientReferences,
};

std::string_view ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  // `position` carries a line number, token index or instance index when the
  // kind has one; -1 otherwise.
  Error(ErrorKind kind, const std::string& message, int64_t position = -1);

  ErrorKind kind() const { return kind_; }
  int64_t position() const { return position_; }

 private:
  ErrorKind kind_;
  int64_t position_;
};

}  // namespace pathbridge
