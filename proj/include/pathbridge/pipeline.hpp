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

// Conditioning-data preparation: entity pairs -> generated paths -> filters
// -> rendered path -> response-generator input sequence.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pathbridge/entities.hpp"
#include "pathbridge/path.hpp"
#include "pathbridge/path_model.hpp"
#include "pathbridge/sequence.hpp"

namespace pathbridge {
namespace pipeline {

struct TransitionInstance {
  std::string id;
  std::vector<std::string> context;  // oldest first
  std::string target;
  std::optional<std::string> response;
  // Optional pre-tagged forms ("surface/TAG" lines) parallel to the texts.
  std::vector<std::string> context_tagged;
  std::string target_tagged;
  std::string response_tagged;
};

enum class MeanBasis {
  kAllCandidates,      // mean over every candidate of the pair
  kAfterRepetition,    // mean over candidates without repeated nodes
};

enum class GoldMatch { kExact, kLemma };

struct PipelineConfig {
  int q = 5;
  int d = 2;
  double perplexity_factor = 2.0;
  MeanBasis mean_basis = MeanBasis::kAllCandidates;
  GoldMatch gold_match = GoldMatch::kExact;
  // Drop extracted entities the generator cannot use.
  bool restrict_to_generator_vocab = true;
  pathlm::DecodeConfig decode;
  uint64_t seed = 0;

  void Validate() const;
};

struct ScoredPath {
  KnowledgePath path;
  double perplexity = 0.0;
};

struct FilterOptions {
  double perplexity_factor = 2.0;
  MeanBasis mean_basis = MeanBasis::kAllCandidates;
  // Pins the perplexity mean; computed from `candidates` when absent. A
  // pinned mean makes FilterPaths idempotent.
  std::optional<double> reference_mean;
  // TRAIN only: every intermediate node must be one of these.
  const std::vector<std::string>* gold_entities = nullptr;
  GoldMatch gold_match = GoldMatch::kExact;
};

double CandidateMean(const std::vector<ScoredPath>& candidates, MeanBasis basis);

// Perplexity cutoff, repetition and gold-containment filters; order kept.
std::vector<ScoredPath> FilterPaths(const std::vector<ScoredPath>& candidates,
                                    const FilterOptions& options);

struct ScoredPathSet {
  std::vector<ScoredPath> paths;
  entities::Phase phase = entities::Phase::kTrain;
  // Entity pair each path was generated for, parallel to `paths`.
  std::vector<std::pair<std::string, std::string>> pairs;
  // Human-readable notes on pairs that produced nothing.
  std::vector<std::string> log;
  size_t candidate_count = 0;
};

// Everything needed to turn raw text into entity sets.
struct EntityResources {
  entities::Tagger* tagger = nullptr;  // used when pre-tagged text is absent
  const entities::IdfTable* idf = nullptr;
  entities::ExtractOptions extract;
};

struct InstanceEntities {
  entities::EntitySet context;
  entities::EntitySet target;
  entities::EntitySet response;
};

InstanceEntities ExtractInstanceEntities(const TransitionInstance& instance,
                                         const EntityResources& resources);

// Decode seed streams derived from the per-instance seed.
inline constexpr uint64_t kInferenceDecodeStream = 0;
inline constexpr uint64_t kInferenceChoiceStream = 1;

// TRAIN flow. Pair j decodes with seeds derived from MixSeed(instance_seed,
// j); when the full gold entity set cannot be covered, each single gold
// entity is tried in turn until q candidates exist. Throws kNoEntities
// (position 0: context, 1: target); generation failures of one pair are
// logged and do not stop the others.
ScoredPathSet BuildTrainingPaths(const TransitionInstance& instance,
                                 pathlm::PathGenerator& generator, const PipelineConfig& config,
                                 const EntityResources& resources, uint64_t instance_seed);

struct InferencePath {
  KnowledgePath path;
  std::string text;
  std::string head;
  std::string tail;
  size_t survivors = 0;
};

// INFER flow: best pair, q HT samples, perplexity and repetition filters,
// uniform choice with Rng(MixSeed(instance_seed, kInferenceChoiceStream)).
// Throws kNoEntities, kNoPathSurvived.
InferencePath BuildInferencePath(const TransitionInstance& instance,
                                 pathlm::PathGenerator& generator, const PipelineConfig& config,
                                 const EntityResources& resources,
                                 const pathlm::RelationTemplateTable& templates,
                                 uint64_t instance_seed);

// "PATH [target] TARGET [context] C1 [sep] C2 [response] RESPONSE"; the
// response segment is left out when absent.
std::string AssembleCrgSequence(const std::string& path_text, const std::string& target,
                                const std::vector<std::string>& context,
                                const std::optional<std::string>& response);

// JSONL: {"id"?, "context": [..] | "..", "target", "response"?, "tagged"?:
// {"context": [..], "target", "response"}}. Throws kFormat with the line.
std::vector<TransitionInstance> ReadInstances(std::istream& in);

struct BatchOutput {
  std::vector<std::string> records;   // JSONL lines in input order
  std::vector<std::string> skipped;   // skip-log JSONL lines
};

// Runs the TRAIN (one record per surviving path) or INFER (one record per
// instance) flow over a batch. Instance i uses MixSeed(config.seed, i), so
// the output does not depend on `workers`.
BatchOutput PrepareBatch(const std::vector<TransitionInstance>& instances, entities::Phase phase,
                         pathlm::PathGenerator& generator, const PipelineConfig& config,
                         const EntityResources& resources,
                         const pathlm::RelationTemplateTable& templates, int workers = 1);

}  // namespace pipeline
}  // namespace pathbridge
