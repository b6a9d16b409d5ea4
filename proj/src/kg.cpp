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

#include "pathbridge/kg.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <tuple>

#include "pathbridge/error.hpp"
#include "pathbridge/text.hpp"

namespace pathbridge {
namespace kg {

namespace {

constexpr std::array<char, 4> kMagic = {'P', 'B', 'K', 'G'};
constexpr uint32_t kFormatVersion = 1;

struct RawEdge {
  std::string head;
  std::string relation;
  std::string tail;
};

template <typename T>
void WritePod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T ReadPod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error(ErrorKind::kFormat, "truncated graph cache");
  return value;
}

void WriteString(std::ostream& out, const std::string& s) {
  WritePod<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string ReadString(std::istream& in) {
  const auto size = ReadPod<uint32_t>(in);
  std::string s(size, '\0');
  in.read(s.data(), size);
  if (!in) throw Error(ErrorKind::kFormat, "truncated graph cache");
  return s;
}

void WriteStrings(std::ostream& out, const std::vector<std::string>& items) {
  WritePod<uint64_t>(out, items.size());
  for (const auto& s : items) WriteString(out, s);
}

std::vector<std::string> ReadStrings(std::istream& in) {
  const auto n = ReadPod<uint64_t>(in);
  std::vector<std::string> items;
  items.reserve(n);
  for (uint64_t i = 0; i < n; ++i) items.push_back(ReadString(in));
  return items;
}

}  // namespace

std::string Relation::Token() const { return inverse ? "_" + name : name; }

Relation Relation::FromToken(std::string_view token) {
  Relation r;
  while (!token.empty() && token.front() == '_') {
    r.inverse = !r.inverse;
    token.remove_prefix(1);
  }
  r.name = std::string(token);
  return r;
}

std::set<std::string> DefaultExcludedRelations() {
  return {"RelatedTo",    "Synonym",
          "Antonym",      "DerivedFrom",
          "FormOf",       "EtymologicallyDerivedFrom",
          "EtymologicallyRelatedTo"};
}

std::set<std::string> ReadRelationList(std::istream& in) {
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto trimmed = text::Trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    out.emplace(trimmed);
  }
  return out;
}

std::optional<ConceptId> KnowledgeGraph::Find(std::string_view concept_name) const {
  const auto it = concept_index_.find(std::string(concept_name));
  if (it == concept_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> KnowledgeGraph::FindRelation(std::string_view token) const {
  const auto it = relation_index_.find(std::string(token));
  if (it == relation_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::pair<Relation, std::string>> KnowledgeGraph::Neighbors(
    std::string_view concept_name) const {
  std::vector<std::pair<Relation, std::string>> out;
  const auto id = Find(concept_name);
  if (!id) return out;
  for (const EdgeRef& e : OutEdges(*id)) {
    out.emplace_back(Relation::FromToken(relation_tokens_[e.relation]),
                     concepts_[e.target]);
  }
  return out;
}

bool KnowledgeGraph::HasEdge(ConceptId head, RelationId relation,
                             ConceptId tail) const {
  const auto edges = OutEdges(head);
  return std::binary_search(edges.begin(), edges.end(), EdgeRef{relation, tail});
}

bool KnowledgeGraph::HasEdge(std::string_view head, std::string_view relation_token,
                             std::string_view tail) const {
  const auto h = Find(head);
  const auto t = Find(tail);
  const auto r = FindRelation(relation_token);
  if (!h || !t || !r) return false;
  return HasEdge(*h, *r, *t);
}

void KnowledgeGraph::BuildIndexes() {
  concept_index_.clear();
  concept_index_.reserve(concepts_.size());
  for (ConceptId i = 0; i < concepts_.size(); ++i) concept_index_.emplace(concepts_[i], i);
  relation_index_.clear();
  for (RelationId i = 0; i < relation_tokens_.size(); ++i) {
    relation_index_.emplace(relation_tokens_[i], i);
  }
  inverse_of_.assign(relation_tokens_.size(), 0);
  for (RelationId i = 0; i < relation_tokens_.size(); ++i) {
    const Relation inv = Relation::FromToken(relation_tokens_[i]).Inverted();
    const auto it = relation_index_.find(inv.Token());
    if (it == relation_index_.end()) {
      throw Error(ErrorKind::kFormat, "relation without inverse: " + relation_tokens_[i]);
    }
    inverse_of_[i] = it->second;
  }
}

KnowledgeGraph LoadGraph(std::istream& in, const GraphConfig& config) {
  std::vector<RawEdge> raw;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::Trim(line).empty()) continue;
    const auto fields = text::Split(line, '\t');
    if (fields.size() != 3) {
      throw Error(ErrorKind::kMalformedLine,
                  "expected 3 tab-separated fields at line " + std::to_string(line_no),
                  line_no);
    }
    Relation rel = Relation::FromToken(text::Trim(fields[0]));
    std::string head = text::NormalizeConcept(fields[1]);
    std::string tail = text::NormalizeConcept(fields[2]);
    if (rel.name.empty() || head.empty() || tail.empty()) {
      throw Error(ErrorKind::kMalformedLine,
                  "empty field at line " + std::to_string(line_no), line_no);
    }
    if (rel.inverse) std::swap(head, tail);
    if (config.excluded_relations.contains(rel.name)) continue;
    if (head == tail) continue;
    raw.push_back({std::move(head), std::move(rel.name), std::move(tail)});
  }
  if (raw.empty()) throw Error(ErrorKind::kEmptyGraph, "no edge survived filtering");

  KnowledgeGraph g;
  g.excluded_ = config.excluded_relations;

  for (const auto& e : raw) {
    g.concepts_.push_back(e.head);
    g.concepts_.push_back(e.tail);
  }
  std::sort(g.concepts_.begin(), g.concepts_.end());
  g.concepts_.erase(std::unique(g.concepts_.begin(), g.concepts_.end()), g.concepts_.end());

  std::set<std::string> tokens;
  for (const auto& e : raw) {
    tokens.insert(e.relation);
    tokens.insert("_" + e.relation);
  }
  g.relation_tokens_.assign(tokens.begin(), tokens.end());
  g.BuildIndexes();

  std::vector<std::tuple<ConceptId, RelationId, ConceptId>> triples;
  triples.reserve(raw.size() * (config.synthesize_inverses ? 2 : 1));
  for (const auto& e : raw) {
    const ConceptId h = g.concept_index_.at(e.head);
    const ConceptId t = g.concept_index_.at(e.tail);
    const RelationId r = g.relation_index_.at(e.relation);
    triples.emplace_back(h, r, t);
    if (config.synthesize_inverses) triples.emplace_back(t, g.inverse_of_[r], h);
  }
  std::sort(triples.begin(), triples.end());
  triples.erase(std::unique(triples.begin(), triples.end()), triples.end());

  g.offsets_.assign(g.concepts_.size() + 1, 0);
  g.edges_.reserve(triples.size());
  for (const auto& [h, r, t] : triples) {
    ++g.offsets_[h + 1];
    g.edges_.push_back(EdgeRef{r, t});
  }
  for (size_t i = 1; i < g.offsets_.size(); ++i) g.offsets_[i] += g.offsets_[i - 1];
  return g;
}

KnowledgeGraph LoadGraphFile(const std::string& path, const GraphConfig& config) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  return LoadGraph(in, config);
}

void KnowledgeGraph::Save(std::ostream& out) const {
  out.write(kMagic.data(), kMagic.size());
  WritePod<uint32_t>(out, kFormatVersion);
  WriteStrings(out, concepts_);
  WriteStrings(out, relation_tokens_);
  WriteStrings(out, std::vector<std::string>(excluded_.begin(), excluded_.end()));
  WritePod<uint64_t>(out, edges_.size());
  out.write(reinterpret_cast<const char*>(offsets_.data()),
            static_cast<std::streamsize>(offsets_.size() * sizeof(uint64_t)));
  for (const EdgeRef& e : edges_) {
    WritePod<uint32_t>(out, e.relation);
    WritePod<uint32_t>(out, e.target);
  }
  if (!out) throw Error(ErrorKind::kIo, "failed writing graph cache");
}

KnowledgeGraph KnowledgeGraph::Load(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw Error(ErrorKind::kFormat, "not a graph cache");
  const auto version = ReadPod<uint32_t>(in);
  if (version != kFormatVersion) {
    throw Error(ErrorKind::kFormat, "unsupported graph cache version " + std::to_string(version));
  }
  KnowledgeGraph g;
  g.concepts_ = ReadStrings(in);
  g.relation_tokens_ = ReadStrings(in);
  const auto excluded = ReadStrings(in);
  g.excluded_ = std::set<std::string>(excluded.begin(), excluded.end());
  const auto edge_count = ReadPod<uint64_t>(in);
  g.offsets_.resize(g.concepts_.size() + 1);
  in.read(reinterpret_cast<char*>(g.offsets_.data()),
          static_cast<std::streamsize>(g.offsets_.size() * sizeof(uint64_t)));
  if (!in || g.offsets_.back() != edge_count) {
    throw Error(ErrorKind::kFormat, "corrupt graph cache offsets");
  }
  g.edges_.resize(edge_count);
  for (auto& e : g.edges_) {
    e.relation = ReadPod<uint32_t>(in);
    e.target = ReadPod<uint32_t>(in);
    if (e.relation >= g.relation_tokens_.size() || e.target >= g.concepts_.size()) {
      throw Error(ErrorKind::kFormat, "corrupt graph cache edge");
    }
  }
  g.BuildIndexes();
  return g;
}

KnowledgeGraph OpenGraph(const std::string& path, const GraphConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  const bool is_cache = in.gcount() == 4 && magic == kMagic;
  in.clear();
  in.seekg(0);
  return is_cache ? KnowledgeGraph::Load(in) : LoadGraph(in, config);
}

}  // namespace kg
}  // namespace pathbridge
