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

#include "pathbridge/sequence.hpp"

#include <algorithm>
#include <istream>
#include <unordered_set>

#include "pathbridge/error.hpp"
#include "pathbridge/text.hpp"

namespace pathbridge {
namespace pathlm {

namespace {

bool IsSpecial(std::string_view token) {
  return token == kTargetToken || token == kSepToken || token == kWcToken;
}

[[noreturn]] void ParseFail(const std::string& what, size_t position) {
  throw Error(ErrorKind::kParse, what + " at token " + std::to_string(position),
              static_cast<int64_t>(position));
}

}  // namespace

std::string_view SequenceModeName(SequenceMode mode) {
  switch (mode) {
    case SequenceMode::kHeadTail: return "ht";
    case SequenceMode::kWillContain: return "wc";
    case SequenceMode::kOneEntity: return "oneent";
  }
  return "ht";
}

SequenceMode ParseSequenceMode(std::string_view name) {
  const std::string lower = text::ToLower(name);
  if (lower == "ht") return SequenceMode::kHeadTail;
  if (lower == "wc") return SequenceMode::kWillContain;
  if (lower == "oneent") return SequenceMode::kOneEntity;
  throw Error(ErrorKind::kInvalidArgument, "unknown sequence mode: " + std::string(name));
}

std::vector<std::string> DistinctIntermediates(const KnowledgePath& path) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& n : path.Intermediates()) {
    if (seen.insert(n).second) out.push_back(n);
  }
  return out;
}

std::vector<std::string> SequenceTokens(const KnowledgePath& path,
                                        const std::vector<std::string>& wc_entities) {
  std::vector<std::string> tokens;
  tokens.reserve(2 * wc_entities.size() + 3 + 2 * path.nodes.size());
  for (const auto& e : wc_entities) {
    tokens.emplace_back(kWcToken);
    tokens.push_back(e);
  }
  tokens.emplace_back(kTargetToken);
  tokens.push_back(path.Tail());
  tokens.emplace_back(kSepToken);
  for (size_t i = 0; i < path.nodes.size(); ++i) {
    if (i) tokens.push_back(path.relations[i - 1].Token());
    tokens.push_back(path.nodes[i]);
  }
  return tokens;
}

std::string FormatSequence(const KnowledgePath& path, SequenceMode mode,
                           const FormatOptions& options) {
  if (!path.WellFormed()) throw Error(ErrorKind::kInvalidArgument, "malformed path");
  std::vector<std::string> wc;
  if (mode != SequenceMode::kHeadTail) {
    if (options.wc_entities) {
      wc = *options.wc_entities;
      if (!options.allow_off_path) {
        const auto inner = path.Intermediates();
        for (const auto& e : wc) {
          if (std::find(inner.begin(), inner.end(), e) == inner.end()) {
            throw Error(ErrorKind::kEntityNotOnPath, e);
          }
        }
      }
    } else {
      wc = DistinctIntermediates(path);
      if (!wc.empty()) {
        if (options.rng == nullptr) {
          throw Error(ErrorKind::kInvalidArgument, "random [wc] draw needs an rng");
        }
        Shuffle(std::span<std::string>(wc), *options.rng);
      }
      if (mode == SequenceMode::kOneEntity && wc.size() > 1) wc.resize(1);
    }
    if (mode == SequenceMode::kOneEntity && wc.size() != 1) {
      throw Error(ErrorKind::kInvalidArgument, "ONEENT needs exactly one entity");
    }
  }
  return text::Join(SequenceTokens(path, wc), " ");
}

ParsedSequence ParseSequenceFull(std::string_view text_in) {
  const auto tokens = text::SplitWhitespace(text_in);
  ParsedSequence parsed;
  size_t i = 0;
  while (i < tokens.size() && tokens[i] == kWcToken) {
    if (i + 1 >= tokens.size() || IsSpecial(tokens[i + 1]) || IsRelationToken(tokens[i + 1])) {
      ParseFail("[wc] without entity", i);
    }
    parsed.wc_entities.push_back(tokens[i + 1]);
    i += 2;
  }
  if (i >= tokens.size() || tokens[i] != kTargetToken) ParseFail("expected [target]", i);
  if (i + 1 >= tokens.size() || IsSpecial(tokens[i + 1]) || IsRelationToken(tokens[i + 1])) {
    ParseFail("expected target concept", i + 1);
  }
  const std::string& declared = tokens[i + 1];
  if (i + 2 >= tokens.size() || tokens[i + 2] != kSepToken) ParseFail("expected [sep]", i + 2);
  const size_t body = i + 3;
  if (body >= tokens.size()) ParseFail("empty path body", body);

  for (size_t j = body; j < tokens.size(); ++j) {
    if (IsSpecial(tokens[j])) ParseFail("special token inside path body", j);
    const bool want_relation = (j - body) % 2 == 1;
    if (IsRelationToken(tokens[j]) != want_relation) ParseFail("broken alternation", j - 1);
    if (want_relation) {
      parsed.path.relations.push_back(kg::Relation::FromToken(tokens[j]));
    } else {
      parsed.path.nodes.push_back(tokens[j]);
    }
  }
  if (parsed.path.relations.empty()) ParseFail("path body has no hop", tokens.size());
  if (parsed.path.nodes.size() != parsed.path.relations.size() + 1) {
    ParseFail("path body ends on a relation", tokens.size() - 1);
  }
  if (parsed.path.Tail() != declared) {
    throw Error(ErrorKind::kTargetMismatch,
                "declared " + declared + " but path ends at " + parsed.path.Tail());
  }
  if (parsed.wc_entities.empty()) {
    parsed.mode = SequenceMode::kHeadTail;
  } else if (parsed.wc_entities.size() == 1) {
    parsed.mode = SequenceMode::kOneEntity;
  } else {
    parsed.mode = SequenceMode::kWillContain;
  }
  return parsed;
}

KnowledgePath ParseSequence(std::string_view text_in) {
  return ParseSequenceFull(text_in).path;
}

RelationTemplateTable RelationTemplateTable::Defaults() {
  RelationTemplateTable t;
  // forward, inverse
  const std::pair<const char*, std::pair<const char*, const char*>> kDefaults[] = {
      {"IsA", {"is a", "includes"}},
      {"PartOf", {"is part of", "has part"}},
      {"HasA", {"has", "belongs to"}},
      {"UsedFor", {"is used for", "belongs to"}},
      {"CapableOf", {"capable of", "can be done by"}},
      {"AtLocation", {"is at location", "is a location of"}},
      {"Causes", {"causes", "is caused by"}},
      {"HasSubevent", {"has subevent", "is a subevent of"}},
      {"HasFirstSubevent", {"has first subevent", "is the first subevent of"}},
      {"HasLastSubevent", {"has last subevent", "is the last subevent of"}},
      {"HasPrerequisite", {"has prerequisite", "is a prerequisite of"}},
      {"HasProperty", {"has property", "is a property of"}},
      {"MotivatedByGoal", {"motivated by goal", "motivates"}},
      {"ObstructedBy", {"is obstructed by", "obstructs"}},
      {"Desires", {"desires", "is desired by"}},
      {"CreatedBy", {"is created by", "creates"}},
      {"DistinctFrom", {"is distinct from", "is distinguished from"}},
      {"SymbolOf", {"is a symbol of", "is symbolized by"}},
      {"DefinedAs", {"is defined as", "defines"}},
      {"MannerOf", {"is a manner of", "has manner"}},
      {"LocatedNear", {"is located near", "has nearby"}},
      {"HasContext", {"has context", "is the context of"}},
      {"SimilarTo", {"is similar to", "is resembled by"}},
      {"CausesDesire", {"causes desire", "is desired because of"}},
      {"MadeOf", {"is made of", "is used to make"}},
      {"ReceivesAction", {"receives action", "is an action on"}},
      {"NotDesires", {"not desires", "is not desired by"}},
      {"NotCapableOf", {"not capable of", "cannot be done by"}},
      {"NotHasProperty", {"not has property", "is not a property of"}},
      {"NotUsedFor", {"is not used for", "is not served by"}},
      {"InstanceOf", {"is an instance of", "has instance"}},
      {"Entails", {"entails", "is entailed by"}},
      {"RelatedTo", {"is related to", "is associated with"}},
      {"Synonym", {"is a synonym of", "has synonym"}},
      {"Antonym", {"is the opposite of", "is opposed by"}},
      {"DerivedFrom", {"is derived from", "is the root of"}},
      {"FormOf", {"is a form of", "has form"}},
      {"EtymologicallyDerivedFrom",
       {"is etymologically derived from", "is the etymological root of"}},
      {"EtymologicallyRelatedTo",
       {"is etymologically related to", "is etymologically linked with"}},
  };
  for (const auto& [name, surfaces] : kDefaults) {
    t.Set(name, surfaces.first);
    t.Set(std::string("_") + name, surfaces.second);
  }
  return t;
}

RelationTemplateTable RelationTemplateTable::Load(std::istream& in) {
  RelationTemplateTable t;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = text::Trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto tab = trimmed.find('\t');
    if (tab == std::string_view::npos) {
      throw Error(ErrorKind::kMalformedLine,
                  "template line " + std::to_string(line_no) + " has no tab", line_no);
    }
    t.Set(std::string(text::Trim(trimmed.substr(0, tab))),
          text::CollapseWhitespace(trimmed.substr(tab + 1)));
  }
  return t;
}

const std::string* RelationTemplateTable::Find(std::string_view token) const {
  const auto it = table_.find(token);
  return it == table_.end() ? nullptr : &it->second;
}

std::string RenderText(const KnowledgePath& path, const RelationTemplateTable& templates) {
  std::vector<std::string> parts;
  for (size_t i = 0; i < path.nodes.size(); ++i) {
    if (i) {
      const std::string token = path.relations[i - 1].Token();
      const std::string* surface = templates.Find(token);
      if (surface == nullptr) throw Error(ErrorKind::kMissingTemplate, token);
      parts.push_back(*surface);
    }
    parts.push_back(text::ConceptToText(path.nodes[i]));
  }
  return text::CollapseWhitespace(text::Join(parts, " "));
}

}  // namespace pathlm
}  // namespace pathbridge
