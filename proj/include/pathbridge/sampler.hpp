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

// Random-walk path corpus sampling.
//
// A walk picks a start node (uniform over nodes with an outgoing edge, or
// degree-proportional), draws a target hop count uniformly from
// {1..max_hops}, then steps uniformly over the allowed outgoing edges. The
// edge that undoes the previous step is not allowed unless
// allow_immediate_backtrack is set. A walk that reaches a node with no
// allowed continuation stops there.
//
// Corpus sampling splits the requested count into fixed-size chunks, each
// with its own RNG derived from (seed, chunk index). Workers take whole
// chunks and results are merged in chunk order, so the corpus depends only
// on (graph, config) and not on the worker count.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "pathbridge/kg.hpp"
#include "pathbridge/path.hpp"
#include "pathbridge/rng.hpp"

namespace pathbridge {
namespace sampler {

struct SamplerConfig {
  int max_hops = 6;
  uint64_t seed = 0;
  uint64_t count = 1;
  bool allow_immediate_backtrack = false;
  bool degree_proportional_start = false;

  void Validate() const;
};

inline constexpr uint64_t kChunkSize = 4096;

// A walk in graph ids: nodes.size() == relations.size() + 1.
struct IdWalk {
  std::vector<kg::ConceptId> nodes;
  std::vector<kg::RelationId> relations;
};

class WalkSampler {
 public:
  // Throws kNoWalkableNode when no concept has an outgoing edge.
  WalkSampler(const kg::KnowledgeGraph& graph, const SamplerConfig& config);

  void Sample(Rng& rng, IdWalk& walk) const;
  KnowledgePath Sample(Rng& rng) const;

  KnowledgePath ToPath(const IdWalk& walk) const;
  const kg::KnowledgeGraph& graph() const { return graph_; }

 private:
  kg::ConceptId DrawStart(Rng& rng) const;

  const kg::KnowledgeGraph& graph_;
  SamplerConfig config_;
  std::vector<kg::ConceptId> walkable_;
  std::vector<uint64_t> degree_prefix_;  // cumulative out-degree over walkable_
};

KnowledgePath SampleWalk(const kg::KnowledgeGraph& graph, Rng& rng,
                         const SamplerConfig& config);

std::vector<KnowledgePath> SampleCorpus(const kg::KnowledgeGraph& graph,
                                        const SamplerConfig& config,
                                        unsigned workers = 1);

// Streams the corpus as one path per line. Returns the number of paths.
uint64_t WriteCorpus(const kg::KnowledgeGraph& graph, const SamplerConfig& config,
                     unsigned workers, std::ostream& out);

std::vector<KnowledgePath> ReadCorpus(std::istream& in);

}  // namespace sampler
}  // namespace pathbridge
