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

#include "pathbridge/kg.hpp"

namespace pathbridge {

// n_0 e_0 n_1 ... e_{k-1} n_k. Nodes are concepts in storage form; generated
// paths may name concepts or edges absent from any graph.
struct KnowledgePath {
  std::vector<std::string> nodes;
  std::vector<kg::Relation> relations;

  size_t Hops() const { return relations.size(); }
  const std::string& Head() const { return nodes.front(); }
  const std::string& Tail() const { return nodes.back(); }

  // Nodes strictly between head and tail.
  std::vector<std::string> Intermediates() const;

  // True when nodes.size() == relations.size() + 1 and hops >= 1.
  bool WellFormed() const;

  bool HasRepeatedNode() const;

  // Space-separated corpus line: "n_0 e_0 n_1 ... n_k".
  std::string ToLine() const;

  // Inverse of ToLine. Throws kParse (token index as position) when the
  // tokens do not alternate concept/relation or the path has no hop.
  static KnowledgePath FromLine(std::string_view line);

  friend bool operator==(const KnowledgePath&, const KnowledgePath&) = default;
};

// Relation tokens start with an uppercase ASCII letter, optionally behind
// underscores ("IsA", "_UsedFor"); concepts are lowercase by construction.
bool IsRelationToken(std::string_view token);

// Every hop is an edge of `graph`.
bool VerifyPath(const kg::KnowledgeGraph& graph, const KnowledgePath& path);

}  // namespace pathbridge
