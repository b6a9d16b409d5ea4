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

#include <algorithm>
#include <cctype>
#include <limits>
#include <unordered_set>

#include "pathbridge/error.hpp"
#include "pathbridge/rng.hpp"
#include "pathbridge/text.hpp"

namespace pathbridge {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kIo: return "IoError";
    case ErrorKind::kFormat: return "FormatError";
    case ErrorKind::kMalformedLine: return "MalformedLine";
    case ErrorKind::kEmptyGraph: return "EmptyGraph";
    case ErrorKind::kNoWalkableNode: return "NoWalkableNode";
    case ErrorKind::kEntityNotOnPath: return "EntityNotOnPath";
    case ErrorKind::kParse: return "ParseError";
    case ErrorKind::kTargetMismatch: return "TargetMismatch";
    case ErrorKind::kMissingTemplate: return "MissingTemplate";
    case ErrorKind::kEmptyCorpus: return "EmptyCorpus";
    case ErrorKind::kUnknownConcept: return "UnknownConcept";
    case ErrorKind::kNoPathFound: return "NoPathFound";
    case ErrorKind::kEmptyEntitySet: return "EmptyEntitySet";
    case ErrorKind::kNoPairs: return "NoPairs";
    case ErrorKind::kNoEntities: return "NoEntities";
    case ErrorKind::kNoPathSurvived: return "NoPathSurvived";
    case ErrorKind::kSpanOutOfRange: return "SpanOutOfRange";
    case ErrorKind::kScorerFailure: return "ScorerFailure";
    case ErrorKind::kInsufficientDataset: return "InsufficientDataset";
    case ErrorKind::kNoPositives: return "NoPositives";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kDegenerateInput: return "DegenerateInput";
    case ErrorKind::kInsufficientReferences: return "InsufficientReferences";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message, int64_t position)
    : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + message),
      kind_(kind),
      position_(position) {}

uint64_t MixSeed(uint64_t seed, uint64_t stream) {
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

uint64_t UniformIndex(Rng& rng, uint64_t n) {
  if (n == 0) throw Error(ErrorKind::kInvalidArgument, "UniformIndex(0)");
  // Largest multiple of n that fits; draws at or above it are rejected.
  const uint64_t limit =
      std::numeric_limits<uint64_t>::max() -
      std::numeric_limits<uint64_t>::max() % n;
  uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % n;
}

double UniformUnit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

namespace text {

namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool IsWordChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '\'' ||
         static_cast<unsigned char>(c) >= 0x80;
}

const std::unordered_set<std::string_view>& Stopwords() {
  static const std::unordered_set<std::string_view> kWords = {
      "a",     "an",    "the",   "and",   "or",    "but",   "nor",
      "so",    "if",    "of",    "to",    "in",    "on",    "at",
      "by",    "for",   "with",  "from",  "into",  "onto",  "over",
      "under", "about", "along", "as",    "than",  "then",  "is",
      "am",    "are",   "was",   "were",  "be",    "been",  "being",
      "do",    "does",  "did",   "has",   "have",  "had",   "will",
      "would", "shall", "should", "can",  "could", "may",   "might",
      "must",  "that",  "this",  "these", "those", "there", "here",
      "very",  "just",  "too",   "also",  "not",   "no",    "'s",
  };
  return kWords;
}

}  // namespace

std::string ToLower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view Trim(std::string_view s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && IsSpace(s[b])) ++b;
  while (e > b && IsSpace(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> SplitWhitespace(std::string_view s) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && IsSpace(s[i])) ++i;
    size_t j = i;
    while (j < s.size() && !IsSpace(s[j])) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<std::string> Split(std::string_view s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string Join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

std::string CollapseWhitespace(std::string_view s) {
  return Join(SplitWhitespace(s), " ");
}

std::string NormalizeConcept(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_sep = false;
  for (char c : s) {
    if (IsSpace(c) || c == '_') {
      pending_sep = true;
      continue;
    }
    if (pending_sep && !out.empty()) out.push_back('_');
    pending_sep = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::string ConceptToText(std::string_view concept_name) {
  std::string out(concept_name);
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

std::vector<std::string> MetricTokens(std::string_view s) {
  return SplitWhitespace(ToLower(s));
}

std::vector<std::string> WordTokens(std::string_view s) {
  std::vector<std::string> out;
  for (const std::string& raw : SplitWhitespace(ToLower(s))) {
    size_t b = 0;
    size_t e = raw.size();
    while (b < e && !IsWordChar(raw[b])) ++b;
    while (e > b && !IsWordChar(raw[e - 1])) --e;
    if (b < e) out.push_back(raw.substr(b, e - b));
  }
  return out;
}

std::vector<std::string> ContentTokens(std::string_view s) {
  std::vector<std::string> out;
  for (std::string& word : WordTokens(s)) {
    if (!IsStopword(word)) out.push_back(std::move(word));
  }
  return out;
}

bool IsStopword(std::string_view lowercase_word) {
  return Stopwords().contains(lowercase_word);
}

std::string SanitizeField(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

}  // namespace text
}  // namespace pathbridge
