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

#include "pathbridge/sampler.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>
#include <thread>
#include <unordered_set>

#include "pathbridge/error.hpp"
#include "pathbridge/text.hpp"

namespace pathbridge {

std::vector<std::string> KnowledgePath::Intermediates() const {
  if (nodes.size() < 2) return {};
  return {nodes.begin() + 1, nodes.end() - 1};
}

bool KnowledgePath::WellFormed() const {
  return !relations.empty() && nodes.size() == relations.size() + 1;
}

bool KnowledgePath::HasRepeatedNode() const {
  std::unordered_set<std::string_view> seen;
  for (const auto& n : nodes) {
    if (!seen.insert(n).second) return true;
  }
  return false;
}

std::string KnowledgePath::ToLine() const {
  std::string line;
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (i) {
      line.push_back(' ');
      line.append(relations[i - 1].Token());
      line.push_back(' ');
    }
    line.append(nodes[i]);
  }
  return line;
}

KnowledgePath KnowledgePath::FromLine(std::string_view line) {
  const auto tokens = text::SplitWhitespace(line);
  KnowledgePath path;
  for (size_t i = 0; i < tokens.size(); ++i) {
    const bool want_relation = i % 2 == 1;
    if (IsRelationToken(tokens[i]) != want_relation) {
      // Report the first token of the adjacent same-kind pair.
      const size_t at = i == 0 ? 0 : i - 1;
      throw Error(ErrorKind::kParse, "broken alternation at token " + std::to_string(at),
                  static_cast<int64_t>(at));
    }
    if (want_relation) {
      path.relations.push_back(kg::Relation::FromToken(tokens[i]));
    } else {
      path.nodes.push_back(tokens[i]);
    }
  }
  if (!path.WellFormed()) {
    throw Error(ErrorKind::kParse, "path needs at least one hop and must end on a concept",
                static_cast<int64_t>(tokens.size()));
  }
  return path;
}

bool IsRelationToken(std::string_view token) {
  size_t i = 0;
  while (i < token.size() && token[i] == '_') ++i;
  return i < token.size() && token[i] >= 'A' && token[i] <= 'Z';
}

bool VerifyPath(const kg::KnowledgeGraph& graph, const KnowledgePath& path) {
  if (!path.WellFormed()) return false;
  for (size_t i = 0; i < path.relations.size(); ++i) {
    if (!graph.HasEdge(path.nodes[i], path.relations[i].Token(), path.nodes[i + 1])) {
      return false;
    }
  }
  return true;
}

namespace sampler {

void SamplerConfig::Validate() const {
  if (max_hops < 1) throw Error(ErrorKind::kInvalidArgument, "max_hops must be >= 1");
  if (count < 1) throw Error(ErrorKind::kInvalidArgument, "count must be >= 1");
}

WalkSampler::WalkSampler(const kg::KnowledgeGraph& graph, const SamplerConfig& config)
    : graph_(graph), config_(config) {
  config_.Validate();
  uint64_t total = 0;
  for (kg::ConceptId id = 0; id < graph.ConceptCount(); ++id) {
    const size_t degree = graph.OutDegree(id);
    if (degree == 0) continue;
    walkable_.push_back(id);
    total += degree;
    degree_prefix_.push_back(total);
  }
  if (walkable_.empty()) {
    throw Error(ErrorKind::kNoWalkableNode, "no concept has an outgoing edge");
  }
}

kg::ConceptId WalkSampler::DrawStart(Rng& rng) const {
  if (!config_.degree_proportional_start) {
    return walkable_[UniformIndex(rng, walkable_.size())];
  }
  const uint64_t draw = UniformIndex(rng, degree_prefix_.back());
  const auto it = std::upper_bound(degree_prefix_.begin(), degree_prefix_.end(), draw);
  return walkable_[static_cast<size_t>(it - degree_prefix_.begin())];
}

void WalkSampler::Sample(Rng& rng, IdWalk& walk) const {
  do {
    walk.nodes.clear();
    walk.relations.clear();
    kg::ConceptId current = DrawStart(rng);
    walk.nodes.push_back(current);
    const auto target_hops = 1 + UniformIndex(rng, static_cast<uint64_t>(config_.max_hops));
    for (uint64_t step = 0; step < target_hops; ++step) {
      const auto edges = graph_.OutEdges(current);
      size_t skip = edges.size();
      if (step > 0 && !config_.allow_immediate_backtrack) {
        const kg::EdgeRef back{graph_.InverseOf(walk.relations.back()),
                               walk.nodes[walk.nodes.size() - 2]};
        const auto it = std::lower_bound(edges.begin(), edges.end(), back);
        if (it != edges.end() && *it == back) skip = static_cast<size_t>(it - edges.begin());
      }
      const size_t allowed = edges.size() - (skip < edges.size() ? 1 : 0);
      if (allowed == 0) break;
      size_t pick = static_cast<size_t>(UniformIndex(rng, allowed));
      if (pick >= skip) ++pick;
      walk.relations.push_back(edges[pick].relation);
      walk.nodes.push_back(edges[pick].target);
      current = edges[pick].target;
    }
  } while (walk.relations.empty());
}

KnowledgePath WalkSampler::ToPath(const IdWalk& walk) const {
  KnowledgePath path;
  path.nodes.reserve(walk.nodes.size());
  for (auto id : walk.nodes) path.nodes.push_back(graph_.ConceptName(id));
  path.relations.reserve(walk.relations.size());
  for (auto id : walk.relations) {
    path.relations.push_back(kg::Relation::FromToken(graph_.RelationToken(id)));
  }
  return path;
}

KnowledgePath WalkSampler::Sample(Rng& rng) const {
  IdWalk walk;
  Sample(rng, walk);
  return ToPath(walk);
}

KnowledgePath SampleWalk(const kg::KnowledgeGraph& graph, Rng& rng,
                         const SamplerConfig& config) {
  return WalkSampler(graph, config).Sample(rng);
}

namespace {

// Runs fn(chunk, first_index, end_index) for every chunk of the corpus. Chunks
// are processed in rounds; `sink(chunk)` is called in chunk order after each
// round so callers can stream results.
template <typename Fn, typename Sink>
void ForEachChunk(uint64_t count, unsigned workers, Fn&& fn, Sink&& sink) {
  const uint64_t chunks = (count + kChunkSize - 1) / kChunkSize;
  workers = std::max(1u, workers);
  const uint64_t round = static_cast<uint64_t>(workers) * 4;
  for (uint64_t first = 0; first < chunks; first += round) {
    const uint64_t last = std::min(chunks, first + round);
    auto run = [&](unsigned w) {
      for (uint64_t c = first + w; c < last; c += workers) {
        fn(c, c * kChunkSize, std::min(count, (c + 1) * kChunkSize));
      }
    };
    if (workers == 1) {
      run(0);
    } else {
      std::vector<std::thread> threads;
      threads.reserve(workers);
      for (unsigned w = 0; w < workers; ++w) threads.emplace_back(run, w);
      for (auto& t : threads) t.join();
    }
    for (uint64_t c = first; c < last; ++c) sink(c - first);
  }
}

}  // namespace

std::vector<KnowledgePath> SampleCorpus(const kg::KnowledgeGraph& graph,
                                        const SamplerConfig& config, unsigned workers) {
  const WalkSampler sampler(graph, config);
  std::vector<KnowledgePath> corpus(config.count);
  ForEachChunk(
      config.count, workers,
      [&](uint64_t chunk, uint64_t begin, uint64_t end) {
        Rng rng(MixSeed(config.seed, chunk));
        IdWalk walk;
        for (uint64_t i = begin; i < end; ++i) {
          sampler.Sample(rng, walk);
          corpus[i] = sampler.ToPath(walk);
        }
      },
      [](uint64_t) {});
  return corpus;
}

uint64_t WriteCorpus(const kg::KnowledgeGraph& graph, const SamplerConfig& config,
                     unsigned workers, std::ostream& out) {
  const WalkSampler sampler(graph, config);
  std::vector<std::string> buffers(static_cast<size_t>(std::max(1u, workers)) * 4);
  ForEachChunk(
      config.count, workers,
      [&](uint64_t chunk, uint64_t begin, uint64_t end) {
        // Rounds hold buffers.size() chunks and start on a multiple of it.
        std::string& buf = buffers[chunk % buffers.size()];
        buf.clear();
        Rng rng(MixSeed(config.seed, chunk));
        IdWalk walk;
        for (uint64_t i = begin; i < end; ++i) {
          sampler.Sample(rng, walk);
          for (size_t n = 0; n < walk.nodes.size(); ++n) {
            if (n) {
              buf.push_back(' ');
              buf.append(graph.RelationToken(walk.relations[n - 1]));
              buf.push_back(' ');
            }
            buf.append(graph.ConceptName(walk.nodes[n]));
          }
          buf.push_back('\n');
        }
      },
      [&](uint64_t offset) { out << buffers[offset]; });
  if (!out) throw Error(ErrorKind::kIo, "failed writing corpus");
  return config.count;
}

std::vector<KnowledgePath> ReadCorpus(std::istream& in) {
  std::vector<KnowledgePath> corpus;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::Trim(line).empty()) continue;
    try {
      corpus.push_back(KnowledgePath::FromLine(line));
    } catch (const Error& e) {
      throw Error(ErrorKind::kMalformedLine,
                  "corpus line " + std::to_string(line_no) + ": " + e.what(), line_no);
    }
  }
  return corpus;
}

}  // namespace sampler
}  // namespace pathbridge
