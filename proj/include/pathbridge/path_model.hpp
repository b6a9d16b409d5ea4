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

// Reference path model: an order-n token model over path sequences with
// additive smoothing, plus constrained decoding and perplexity.
//
// Every training path contributes its HT sequence and, when it has
// intermediates, one WC sequence whose [wc] block is a permutation of the
// intermediates seeded from (train seed, path text). Identical paths thus
// produce identical sequences and counts scale linearly with duplication.
// Each sequence is padded with order-1 "<s>" markers and closed by "</s>".
//
// Probabilities use additive smoothing with the next lower order as prior:
//
//   P_k(w | h) = (c(h w) + eps * |V| * P_{k-1}(w | h')) / (c(h) + eps * |V|)
//
// where h' drops the oldest token of h, V is the predictable vocabulary
// (everything but "<s>") and P_0 is uniform over V. With a uniform prior this
// is plain add-eps; every token in V has strictly positive probability.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pathbridge/path.hpp"
#include "pathbridge/sequence.hpp"

namespace pathbridge {
namespace pathlm {

inline constexpr std::string_view kBeginToken = "<s>";
inline constexpr std::string_view kEndToken = "</s>";

using TokenId = uint32_t;

struct TrainOptions {
  int order = 3;
  double smoothing = 0.01;
  uint64_t seed = 0;
  // Also emit a ONEENT sequence per path with intermediates.
  bool include_one_entity = false;
};

// Token sequences (without padding) a path contributes to training.
std::vector<std::vector<std::string>> TrainingSequences(const KnowledgePath& path,
                                                        const TrainOptions& options);

class PathModel {
 public:
  // Throws kEmptyCorpus.
  static PathModel Train(std::span<const KnowledgePath> corpus, const TrainOptions& options);

  // Builds a model from explicit n-gram counts (all orders 1..order). Context
  // totals are derived from the counts of each order.
  static PathModel FromCounts(int order, double smoothing,
                              const std::vector<std::string>& vocabulary,
                              const std::vector<std::pair<std::vector<std::string>, uint64_t>>& counts);

  int order() const { return order_; }
  double smoothing() const { return smoothing_; }
  const std::vector<std::string>& vocabulary() const { return vocab_; }
  size_t PredictableSize() const { return vocab_.size() - 1; }

  std::optional<TokenId> Id(std::string_view token) const;
  const std::string& Token(TokenId id) const { return vocab_[id]; }
  TokenId begin_id() const { return begin_id_; }
  TokenId end_id() const { return end_id_; }

  // Concepts: vocabulary tokens that are neither markers, special tokens nor
  // relation tokens.
  bool IsConcept(TokenId id) const { return kind_[id] == Kind::kConcept; }
  bool IsRelation(TokenId id) const { return kind_[id] == Kind::kRelation; }
  const std::vector<TokenId>& ConceptIds() const { return concept_ids_; }
  const std::vector<TokenId>& RelationIds() const { return relation_ids_; }
  bool KnowsConcept(std::string_view token) const;

  // Exact count of an n-gram (1 <= size <= order); 0 when unseen or when a
  // token is outside the vocabulary.
  uint64_t Count(std::span<const std::string> ngram) const;

  // Smoothed P(next | history). Only the last order-1 history tokens are used;
  // shorter histories are treated as the padded sequence start would be.
  double Probability(std::span<const TokenId> history, TokenId next) const;

  // Serialized form: {"format":"pathbridge.pathlm","version":1,"order",
  // "smoothing","vocabulary":[...],"ngrams":[[[tokens...],count],...]} with
  // ngrams sorted by (order, token ids).
  std::string ToJson() const;
  static PathModel FromJson(std::string_view json_text);
  void Save(std::ostream& out) const;
  static PathModel Load(std::istream& in);
  static PathModel LoadFile(const std::string& path);

 private:
  enum class Kind : uint8_t { kMarker, kSpecial, kRelation, kConcept };

  struct KeyHash {
    size_t operator()(const std::vector<TokenId>& key) const;
  };
  using CountMap = std::unordered_map<std::vector<TokenId>, uint64_t, KeyHash>;

  void Index();
  void AddSequence(const std::vector<TokenId>& padded);
  double ProbabilityAtOrder(std::span<const TokenId> context, TokenId next, int k) const;

  int order_ = 3;
  double smoothing_ = 0.01;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, TokenId> index_;
  std::vector<Kind> kind_;
  std::vector<TokenId> concept_ids_;
  std::vector<TokenId> relation_ids_;
  TokenId begin_id_ = 0;
  TokenId end_id_ = 0;
  // ngrams_[k-1]: counts of k-grams; contexts_[k-1]: totals of their
  // (k-1)-token prefixes.
  std::vector<CountMap> ngrams_;
  std::vector<CountMap> contexts_;
};

PathModel TrainPathModel(std::span<const KnowledgePath> corpus, int order, double smoothing,
                         uint64_t seed = 0);

// exp of the mean negative log-probability of the HT sequence tokens and the
// closing "</s>", each conditioned on the padded history. Throws
// kUnknownConcept for tokens outside the vocabulary.
double PathPerplexity(const PathModel& model, const KnowledgePath& path);

enum class DecodeStrategy { kSample, kBeam };

struct DecodeConfig {
  double temperature = 0.7;
  double top_p = 0.9;
  int beam_width = 8;
  // Body token cap (n_h e_0 ... n_t); hops are limited to (max_len - 1) / 2.
  int max_len = 13;
  int max_hops = 6;
  int num_samples = 1;
  uint64_t seed = 0;
  DecodeStrategy strategy = DecodeStrategy::kSample;

  void Validate() const;
};

struct PathQuery {
  SequenceMode mode = SequenceMode::kHeadTail;
  std::string head;
  std::string tail;
  std::vector<std::string> required;
};

struct GeneratedPath {
  KnowledgePath path;
  // Sum of log-probabilities of the generated body tokens after the head,
  // including "</s>".
  double log_prob = 0.0;
};

// Constrained generation. Every result starts at head, ends at tail, contains
// every required entity as a node and has at most the configured hops. The
// tail is only emitted once all required entities are covered and is forced
// at the last hop. Throws kUnknownConcept, kNoPathFound.
std::vector<GeneratedPath> GeneratePathsScored(const PathModel& model, const PathQuery& query,
                                               const DecodeConfig& config);
std::vector<KnowledgePath> GeneratePath(const PathModel& model, const PathQuery& query,
                                        const DecodeConfig& config);

// Query line of the external generator protocol:
//   "HT<TAB>head<TAB>tail" or "WC<TAB>head<TAB>tail<TAB>e1,e2"
// ONEENT queries travel as WC with one entity.
std::string FormatQueryLine(const PathQuery& query);
PathQuery ParseQueryLine(std::string_view line);

// Anything that can propose bridging paths and score them.
class PathGenerator {
 public:
  virtual ~PathGenerator() = default;
  virtual std::vector<KnowledgePath> Generate(const PathQuery& query,
                                              const DecodeConfig& config) = 0;
  virtual double Perplexity(const KnowledgePath& path) = 0;
  // Whether the generator can use this concept as head, tail or entity.
  virtual bool Knows(std::string_view concept_name) const { (void)concept_name; return true; }
};

class NgramPathGenerator : public PathGenerator {
 public:
  explicit NgramPathGenerator(const PathModel& model) : model_(model) {}
  std::vector<KnowledgePath> Generate(const PathQuery& query,
                                      const DecodeConfig& config) override;
  double Perplexity(const KnowledgePath& path) override;
  bool Knows(std::string_view concept_name) const override;

 private:
  const PathModel& model_;
};

// Runs `command` through the shell with one query line per requested sample
// on stdin and reads one PathSequence per line from stdout. Unparseable or
// off-query lines are dropped; duplicates are removed. Perplexity comes from
// `scorer` when given and all tokens are known to it, otherwise 1.0, which
// makes the perplexity filter inert.
class ExternalPathGenerator : public PathGenerator {
 public:
  ExternalPathGenerator(std::string command, const PathModel* scorer)
      : command_(std::move(command)), scorer_(scorer) {}
  std::vector<KnowledgePath> Generate(const PathQuery& query,
                                      const DecodeConfig& config) override;
  double Perplexity(const KnowledgePath& path) override;

 private:
  std::string command_;
  const PathModel* scorer_;
};

// Answers protocol query lines with the reference model: one output line per
// input line, empty when generation fails. Line i decodes with seed
// MixSeed(config.seed, i).
void ServeQueries(const PathModel& model, const DecodeConfig& config, std::istream& in,
                  std::ostream& out);

}  // namespace pathlm
}  // namespace pathbridge
