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

// Entity extraction from POS-tagged sentences and IDF-based pair ranking.

#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace pathbridge {
namespace entities {

struct TaggedToken {
  std::string surface;
  std::string tag;

  bool operator==(const TaggedToken&) const = default;
};

using TaggedSentence = std::vector<TaggedToken>;

// "surface/TAG" tokens separated by whitespace; the tag follows the last '/'.
// Tags are uppercased. Throws kFormat on a token without a usable split.
TaggedSentence ParseTagged(std::string_view line);
std::string FormatTagged(const TaggedSentence& sentence);

class Tagger {
 public:
  virtual ~Tagger() = default;
  virtual std::vector<TaggedSentence> Tag(const std::vector<std::string>& sentences) = 0;
};

// Small closed-class lexicon plus suffix guesses. Good enough for fixtures
// and the interactive mode; real corpora should arrive pre-tagged or through
// CommandTagger.
class LexiconTagger : public Tagger {
 public:
  std::vector<TaggedSentence> Tag(const std::vector<std::string>& sentences) override;
  TaggedSentence TagOne(std::string_view sentence) const;
};

// Sends one raw sentence per line to `command` and expects one pre-tagged
// line back per input line.
class CommandTagger : public Tagger {
 public:
  explicit CommandTagger(std::string command) : command_(std::move(command)) {}
  std::vector<TaggedSentence> Tag(const std::vector<std::string>& sentences) override;

 private:
  std::string command_;
};

// Tag-level regular expression in chunk-grammar notation, e.g.
// "<NN.*|JJ>*<NN.*>". Each <...> holds a regex matched against a whole tag;
// it may be followed by *, + or ?. Matching is greedy with backtracking.
class TagPattern {
 public:
  static TagPattern Parse(std::string_view pattern);

  // Length of the match anchored at `start`, 0 when there is none.
  size_t MatchAt(std::span<const std::string> tags, size_t start) const;

  // Leftmost, non-overlapping matches as [begin, end) spans, skipping any
  // position already marked in `taken`.
  std::vector<std::pair<size_t, size_t>> FindAll(std::span<const std::string> tags,
                                                 const std::vector<bool>& taken) const;

 private:
  struct Element {
    std::regex tag;
    size_t min = 1;
    size_t max = 1;
  };

  bool MatchFrom(std::span<const std::string> tags, size_t elem, size_t pos, size_t& end) const;

  std::vector<Element> elements_;
};

inline constexpr std::string_view kNounPhrasePattern = "<NN.*|JJ>*<NN.*>";
inline constexpr std::string_view kVerbPhrasePattern = "<RB.?>*<VB.?>*<JJ>*<VB.?>+<VB>?";

const std::unordered_set<std::string>& DefaultStopEntities();
std::unordered_set<std::string> ReadStopEntities(std::istream& in);

// Rule-based verb lemmatizer (-ing/-ed/-s plus an irregular-form table).
std::string LemmatizeVerb(std::string_view word);
std::string Singular(std::string_view noun);
std::string Plural(std::string_view noun);

enum class EntitySource { kContext, kTarget, kResponse };
std::string_view EntitySourceName(EntitySource source);

struct EntitySet {
  // Concept storage form, first occurrence order, no duplicates.
  std::vector<std::string> entities;
  EntitySource source = EntitySource::kContext;
};

struct ExtractOptions {
  // Membership test for graph or generator vocabulary; when set, surface
  // variants found in it are preferred and verb+object merges are enabled.
  std::function<bool(std::string_view)> in_vocab;
  const std::unordered_set<std::string>* stop_entities = nullptr;  // defaults when null
};

EntitySet ExtractEntities(const TaggedSentence& sentence, EntitySource source,
                          const ExtractOptions& options = {});
// Extraction over several sentences (a multi-utterance context), merged in
// order.
EntitySet ExtractEntities(const std::vector<TaggedSentence>& sentences, EntitySource source,
                          const ExtractOptions& options = {});

class IdfTable {
 public:
  IdfTable() = default;
  explicit IdfTable(double default_value) : default_(default_value) {}

  // TSV "token<TAB>value"; an optional "# default=<value>" line sets the
  // fallback for unknown tokens. Throws kMalformedLine, kFormat.
  static IdfTable Load(std::istream& in);
  static IdfTable LoadFile(const std::string& path);
  void Save(std::ostream& out) const;

  // One document per input line; idf = max(0, ln(N / (1 + df))), unknown
  // tokens get ln(N).
  static IdfTable Build(std::istream& documents);

  void Set(std::string token, double value);
  double Lookup(std::string_view token) const;
  double default_value() const { return default_; }
  size_t size() const { return values_.size(); }

  // Highest idf over the underscore-separated tokens of a concept.
  double MaxTokenIdf(std::string_view concept_name) const;

 private:
  std::unordered_map<std::string, double> values_;
  double default_ = 0.0;
};

struct ScoredPair {
  std::string head;
  std::string tail;
  double score = 0.0;
};

// Every (h, t) in E_h x E_t scored by max-token idf sums, best first; ties by
// (head, tail). Throws kEmptyEntitySet with position 0 (head) or 1 (tail).
std::vector<ScoredPair> ScorePairs(const EntitySet& heads, const EntitySet& tails,
                                   const IdfTable& idf);

enum class Phase { kTrain, kInfer };

// TRAIN keeps the first min(d, n) pairs, INFER the first one. Throws kNoPairs.
std::vector<ScoredPair> SelectPairs(const std::vector<ScoredPair>& ranked, Phase phase, int d);

}  // namespace entities
}  // namespace pathbridge
