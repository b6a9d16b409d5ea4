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

#include <string>
#include <string_view>
#include <vector>

namespace pathbridge {
namespace text {

std::string ToLower(std::string_view s);
std::string_view Trim(std::string_view s);

// Splits on runs of ASCII whitespace; no empty pieces.
std::vector<std::string> SplitWhitespace(std::string_view s);

// Splits on every occurrence of `sep`; keeps empty pieces.
std::vector<std::string> Split(std::string_view s, char sep);

std::string Join(const std::vector<std::string>& parts, std::string_view sep);

// Trims and collapses internal whitespace runs to one space.
std::string CollapseWhitespace(std::string_view s);

// Concept storage form: lowercase, whitespace and underscore runs collapsed
// to a single underscore, no leading/trailing underscore. Returns "" when
// nothing survives.
std::string NormalizeConcept(std::string_view s);

// Storage form to rendered form (underscores to spaces).
std::string ConceptToText(std::string_view concept_name);

// Lowercase whitespace tokens; used by the reference-based metrics.
std::vector<std::string> MetricTokens(std::string_view s);

// Lowercase whitespace tokens with surrounding punctuation stripped.
std::vector<std::string> WordTokens(std::string_view s);

// WordTokens with function
// words (articles, prepositions, conjunctions, copulas and auxiliaries)
// removed. Pronouns and possessives are kept.
std::vector<std::string> ContentTokens(std::string_view s);

bool IsStopword(std::string_view lowercase_word);

// Replaces tabs and newlines with spaces so a field can travel through the
// line-oriented subprocess protocols.
std::string SanitizeField(std::string_view s);

}  // namespace text
}  // namespace pathbridge
