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

// Path sequence text formats shared by the reference model and any external
// generator:
//
//   HT      [target] n_t [sep] n_h e_0 n_1 ... n_t
//   WC      [wc] k1 [wc] k2 ... [target] n_t [sep] n_h e_0 ... n_t
//   ONEENT  WC with exactly one [wc] entry
//
// and the natural-language rendering of a path through relation templates.

#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pathbridge/path.hpp"
#include "pathbridge/rng.hpp"

namespace pathbridge {
namespace pathlm {

inline constexpr std::string_view kTargetToken = "[target]";
inline constexpr std::string_view kSepToken = "[sep]";
inline constexpr std::string_view kWcToken = "[wc]";

enum class SequenceMode { kHeadTail, kWillContain, kOneEntity };

std::string_view SequenceModeName(SequenceMode mode);
SequenceMode ParseSequenceMode(std::string_view name);  // "ht", "wc", "oneent"

struct FormatOptions {
  // Entities for the [wc] block, in order. When empty in WC mode the block is
  // a random permutation of the path's intermediates drawn from `rng`; in
  // ONEENT mode a single intermediate is drawn.
  std::optional<std::vector<std::string>> wc_entities;
  Rng* rng = nullptr;
  // Query-time use: allow [wc] entities that are not on the path.
  bool allow_off_path = false;
};

// Throws kEntityNotOnPath, or kInvalidArgument when ONEENT has no single
// entity available or a random draw is needed without an rng.
std::string FormatSequence(const KnowledgePath& path, SequenceMode mode,
                           const FormatOptions& options = {});

// Token list form of FormatSequence.
std::vector<std::string> SequenceTokens(const KnowledgePath& path,
                                        const std::vector<std::string>& wc_entities);

// Distinct intermediates in first-occurrence order.
std::vector<std::string> DistinctIntermediates(const KnowledgePath& path);

struct ParsedSequence {
  SequenceMode mode = SequenceMode::kHeadTail;
  std::vector<std::string> wc_entities;
  KnowledgePath path;
};

// Throws kParse with the 0-based index (over the whole token sequence) of the
// first token of an adjacent concept/concept or relation/relation pair, or of
// the offending token for structural errors; kTargetMismatch when the
// declared tail differs from the final body concept.
ParsedSequence ParseSequenceFull(std::string_view text);
KnowledgePath ParseSequence(std::string_view text);

// relation token -> surface text. Tokens with a leading underscore name the
// inverse direction.
class RelationTemplateTable {
 public:
  // Standard ConceptNet relations in both directions.
  static RelationTemplateTable Defaults();

  // "token<TAB>text" lines; '#' comments and blank lines skipped.
  static RelationTemplateTable Load(std::istream& in);

  void Set(const std::string& token, const std::string& surface) { table_[token] = surface; }
  const std::string* Find(std::string_view token) const;
  const std::map<std::string, std::string, std::less<>>& entries() const { return table_; }

 private:
  std::map<std::string, std::string, std::less<>> table_;
};

// Concepts with spaces, relations replaced by their template text. Throws
// kMissingTemplate.
std::string RenderText(const KnowledgePath& path, const RelationTemplateTable& templates);

}  // namespace pathlm
}  // namespace pathbridge
