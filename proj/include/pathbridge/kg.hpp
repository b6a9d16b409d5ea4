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

// Immutable commonsense graph loaded from "relation<TAB>head<TAB>tail"
// assertion lines. Concepts are interned in lexicographic order and relation
// tokens likewise, so the CSR adjacency sorted by (relation id, neighbor id)
// is also sorted by (relation name, neighbor name).

#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pathbridge {
namespace kg {

// A relation type, optionally traversed against its stored direction. The
// token form of an inverse relation is the name with a leading underscore.
struct Relation {
  std::string name;
  bool inverse = false;

  std::string Token() const;
  Relation Inverted() const { return Relation{name, !inverse}; }

  // "_IsA" -> {IsA, inverse}. A doubled underscore flips twice.
  static Relation FromToken(std::string_view token);

  friend bool operator==(const Relation&, const Relation&) = default;
  friend auto operator<=>(const Relation&, const Relation&) = default;
};

std::set<std::string> DefaultExcludedRelations();

// One relation name per line; blank lines and '#' comments ignored.
std::set<std::string> ReadRelationList(std::istream& in);

struct GraphConfig {
  std::set<std::string> excluded_relations = DefaultExcludedRelations();
  bool synthesize_inverses = true;
};

using ConceptId = uint32_t;
using RelationId = uint32_t;

struct EdgeRef {
  RelationId relation;
  ConceptId target;

  friend bool operator==(const EdgeRef&, const EdgeRef&) = default;
  friend auto operator<=>(const EdgeRef&, const EdgeRef&) = default;
};

class KnowledgeGraph {
 public:
  size_t ConceptCount() const { return concepts_.size(); }
  size_t EdgeCount() const { return edges_.size(); }
  size_t RelationCount() const { return relation_tokens_.size(); }

  std::optional<ConceptId> Find(std::string_view concept_name) const;
  bool Contains(std::string_view concept_name) const { return Find(concept_name).has_value(); }
  const std::string& ConceptName(ConceptId id) const { return concepts_[id]; }
  const std::vector<std::string>& Concepts() const { return concepts_; }

  std::optional<RelationId> FindRelation(std::string_view token) const;
  const std::string& RelationToken(RelationId id) const { return relation_tokens_[id]; }
  RelationId InverseOf(RelationId id) const { return inverse_of_[id]; }

  std::span<const EdgeRef> OutEdges(ConceptId id) const {
    return {edges_.data() + offsets_[id], edges_.data() + offsets_[id + 1]};
  }
  size_t OutDegree(ConceptId id) const { return offsets_[id + 1] - offsets_[id]; }

  // Outgoing edges in deterministic order; empty when the concept is absent.
  std::vector<std::pair<Relation, std::string>> Neighbors(std::string_view concept_name) const;

  bool HasEdge(std::string_view head, std::string_view relation_token,
               std::string_view tail) const;
  bool HasEdge(ConceptId head, RelationId relation, ConceptId tail) const;

  const std::set<std::string>& ExcludedRelations() const { return excluded_; }

  // Versioned binary cache ("PBKG", version 1).
  void Save(std::ostream& out) const;
  static KnowledgeGraph Load(std::istream& in);

  friend KnowledgeGraph LoadGraph(std::istream& in, const GraphConfig& config);

 private:
  void BuildIndexes();

  std::vector<std::string> concepts_;
  std::unordered_map<std::string, ConceptId> concept_index_;
  std::vector<std::string> relation_tokens_;
  std::unordered_map<std::string, RelationId> relation_index_;
  std::vector<RelationId> inverse_of_;
  std::vector<uint64_t> offsets_;
  std::vector<EdgeRef> edges_;
  std::set<std::string> excluded_;
};

// Parses assertion lines. Throws kMalformedLine (1-based line number as
// position) on a wrong field count or an empty normalized field, kEmptyGraph
// when no edge survives exclusion and self-loop removal.
KnowledgeGraph LoadGraph(std::istream& in, const GraphConfig& config);
KnowledgeGraph LoadGraphFile(const std::string& path, const GraphConfig& config);

// Reads the binary cache when the file starts with the cache magic, otherwise
// parses it as assertions with `config`.
KnowledgeGraph OpenGraph(const std::string& path, const GraphConfig& config = {});

}  // namespace kg
}  // namespace pathbridge
