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

#include "pathbridge/pipeline.hpp"

#include <algorithm>
#include <istream>
#include <thread>
#include <unordered_set>

#include "json.hpp"
#include "pathbridge/error.hpp"
#include "pathbridge/rng.hpp"
#include "pathbridge/text.hpp"

namespace pathbridge {
namespace pipeline {

namespace {

using entities::EntitySet;
using entities::EntitySource;
using entities::TaggedSentence;
using Json = nlohmann::ordered_json;

std::string LemmaKey(const std::string& concept_name) {
  std::vector<std::string> parts;
  for (const auto& tok : text::Split(concept_name, '_')) {
    parts.push_back(entities::LemmatizeVerb(entities::Singular(tok)));
  }
  return text::Join(parts, "_");
}

TaggedSentence TagOrParse(const std::string& raw, const std::string& tagged,
                          entities::Tagger* tagger) {
  if (!tagged.empty()) return entities::ParseTagged(tagged);
  if (tagger == nullptr) throw Error(ErrorKind::kInvalidArgument, "no tagger for untagged text");
  return tagger->Tag({raw}).front();
}

void RestrictToGenerator(EntitySet& set, const pathlm::PathGenerator& generator) {
  std::erase_if(set.entities, [&](const std::string& e) { return !generator.Knows(e); });
}

std::vector<std::string> Without(const std::vector<std::string>& items, const std::string& a,
                                 const std::string& b) {
  std::vector<std::string> out;
  for (const auto& x : items) {
    if (x != a && x != b) out.push_back(x);
  }
  return out;
}

// Generates up to `want` distinct paths, swallowing search failures.
void Collect(pathlm::PathGenerator& generator, const pathlm::PathQuery& query,
             pathlm::DecodeConfig decode, int want, uint64_t seed,
             std::vector<KnowledgePath>& out, std::vector<std::string>& log) {
  if (want <= 0) return;
  decode.num_samples = want;
  decode.seed = seed;
  try {
    for (auto& p : generator.Generate(query, decode)) {
      if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kNoPathFound && e.kind() != ErrorKind::kUnknownConcept &&
        e.kind() != ErrorKind::kIo) {
      throw;
    }
    log.push_back(query.head + " -> " + query.tail + " [" + text::Join(query.required, ",") +
                  "]: " + std::string(ErrorKindName(e.kind())) + ": " + e.what());
  }
}

std::vector<std::string> JsonStrings(const Json& j, const char* field) {
  std::vector<std::string> out;
  if (j.is_string()) {
    out.push_back(j.get<std::string>());
  } else if (j.is_array()) {
    for (const auto& x : j) out.push_back(x.get<std::string>());
  } else {
    throw Error(ErrorKind::kFormat, std::string("field ") + field + " must be string or list");
  }
  return out;
}

Json InstanceJson(const TransitionInstance& inst) {
  Json j;
  if (!inst.id.empty()) j["id"] = inst.id;
  j["context"] = inst.context;
  j["target"] = inst.target;
  if (inst.response) j["response"] = *inst.response;
  return j;
}

std::string SkipLine(size_t index, const TransitionInstance& inst, const std::string& reason) {
  Json j;
  j["index"] = index;
  if (!inst.id.empty()) j["id"] = inst.id;
  j["reason"] = reason;
  return j.dump();
}

}  // namespace

void PipelineConfig::Validate() const {
  if (q < 1) throw Error(ErrorKind::kInvalidArgument, "q must be >= 1");
  if (d < 1) throw Error(ErrorKind::kInvalidArgument, "D must be >= 1");
  if (!(perplexity_factor > 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "perplexity factor must be > 1");
  }
  decode.Validate();
}

double CandidateMean(const std::vector<ScoredPath>& candidates, MeanBasis basis) {
  double sum = 0.0;
  size_t n = 0;
  for (const auto& c : candidates) {
    if (basis == MeanBasis::kAfterRepetition && c.path.HasRepeatedNode()) continue;
    sum += c.perplexity;
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

std::vector<ScoredPath> FilterPaths(const std::vector<ScoredPath>& candidates,
                                    const FilterOptions& options) {
  const double mean = options.reference_mean.value_or(CandidateMean(candidates, options.mean_basis));
  const double cutoff = options.perplexity_factor * mean;
  std::unordered_set<std::string> gold;
  if (options.gold_entities) {
    for (const auto& g : *options.gold_entities) {
      gold.insert(options.gold_match == GoldMatch::kLemma ? LemmaKey(g) : g);
    }
  }
  std::vector<ScoredPath> out;
  for (const auto& c : candidates) {
    if (c.perplexity > cutoff) continue;
    if (c.path.HasRepeatedNode()) continue;
    if (options.gold_entities) {
      const auto inner = c.path.Intermediates();
      const bool contained = std::all_of(inner.begin(), inner.end(), [&](const std::string& n) {
        return gold.contains(options.gold_match == GoldMatch::kLemma ? LemmaKey(n) : n);
      });
      if (!contained) continue;
    }
    out.push_back(c);
  }
  return out;
}

InstanceEntities ExtractInstanceEntities(const TransitionInstance& instance,
                                         const EntityResources& resources) {
  InstanceEntities out;
  std::vector<TaggedSentence> context;
  for (size_t i = 0; i < instance.context.size(); ++i) {
    const std::string tagged = i < instance.context_tagged.size() ? instance.context_tagged[i] : "";
    context.push_back(TagOrParse(instance.context[i], tagged, resources.tagger));
  }
  out.context = entities::ExtractEntities(context, EntitySource::kContext, resources.extract);
  out.target = entities::ExtractEntities(
      TagOrParse(instance.target, instance.target_tagged, resources.tagger), EntitySource::kTarget,
      resources.extract);
  out.response.source = EntitySource::kResponse;
  if (instance.response) {
    out.response = entities::ExtractEntities(
        TagOrParse(*instance.response, instance.response_tagged, resources.tagger),
        EntitySource::kResponse, resources.extract);
  }
  return out;
}

namespace {

std::vector<entities::ScoredPair> RankedPairs(InstanceEntities& ents,
                                              const pathlm::PathGenerator& generator,
                                              const PipelineConfig& config,
                                              const EntityResources& resources) {
  if (config.restrict_to_generator_vocab) {
    RestrictToGenerator(ents.context, generator);
    RestrictToGenerator(ents.target, generator);
    RestrictToGenerator(ents.response, generator);
  }
  if (ents.context.entities.empty()) throw Error(ErrorKind::kNoEntities, "no context entities", 0);
  if (ents.target.entities.empty()) throw Error(ErrorKind::kNoEntities, "no target entities", 1);
  if (resources.idf == nullptr) throw Error(ErrorKind::kInvalidArgument, "idf table required");
  return entities::ScorePairs(ents.context, ents.target, *resources.idf);
}

}  // namespace

ScoredPathSet BuildTrainingPaths(const TransitionInstance& instance,
                                 pathlm::PathGenerator& generator, const PipelineConfig& config,
                                 const EntityResources& resources, uint64_t instance_seed) {
  config.Validate();
  if (!instance.response) throw Error(ErrorKind::kInvalidArgument, "training needs a response");
  InstanceEntities ents = ExtractInstanceEntities(instance, resources);
  const auto pairs = entities::SelectPairs(RankedPairs(ents, generator, config, resources),
                                           entities::Phase::kTrain, config.d);
  const std::vector<std::string>& gold = ents.response.entities;

  ScoredPathSet out;
  out.phase = entities::Phase::kTrain;
  for (size_t j = 0; j < pairs.size(); ++j) {
    const auto& pair = pairs[j];
    const uint64_t pair_seed = MixSeed(instance_seed, j);
    const auto required = Without(gold, pair.head, pair.tail);

    pathlm::PathQuery query;
    query.head = pair.head;
    query.tail = pair.tail;
    query.required = required;
    query.mode = required.empty() ? pathlm::SequenceMode::kHeadTail : pathlm::SequenceMode::kWillContain;
    std::vector<KnowledgePath> paths;
    Collect(generator, query, config.decode, config.q, MixSeed(pair_seed, 0), paths, out.log);
    if (paths.empty() && required.size() > 1) {
      for (size_t k = 0; k < required.size() && paths.size() < static_cast<size_t>(config.q); ++k) {
        query.required = {required[k]};
        Collect(generator, query, config.decode, config.q - static_cast<int>(paths.size()),
                MixSeed(pair_seed, k + 1), paths, out.log);
      }
    }

    std::vector<ScoredPath> candidates;
    for (auto& p : paths) {
      const double ppl = generator.Perplexity(p);
      candidates.push_back({std::move(p), ppl});
    }
    out.candidate_count += candidates.size();
    FilterOptions fo;
    fo.perplexity_factor = config.perplexity_factor;
    fo.mean_basis = config.mean_basis;
    fo.gold_entities = &gold;
    fo.gold_match = config.gold_match;
    const auto kept = FilterPaths(candidates, fo);
    if (kept.empty()) {
      out.log.push_back(pair.head + " -> " + pair.tail + ": " + std::to_string(candidates.size()) +
                        " candidates, none survived filtering");
    }
    for (const auto& k : kept) {
      out.paths.push_back(k);
      out.pairs.emplace_back(pair.head, pair.tail);
    }
  }
  return out;
}

InferencePath BuildInferencePath(const TransitionInstance& instance,
                                 pathlm::PathGenerator& generator, const PipelineConfig& config,
                                 const EntityResources& resources,
                                 const pathlm::RelationTemplateTable& templates,
                                 uint64_t instance_seed) {
  config.Validate();
  TransitionInstance no_response = instance;
  no_response.response.reset();
  InstanceEntities ents = ExtractInstanceEntities(no_response, resources);
  const auto pair = entities::SelectPairs(RankedPairs(ents, generator, config, resources),
                                          entities::Phase::kInfer, 1)
                        .front();

  pathlm::PathQuery query;
  query.mode = pathlm::SequenceMode::kHeadTail;
  query.head = pair.head;
  query.tail = pair.tail;
  std::vector<KnowledgePath> paths;
  std::vector<std::string> log;
  Collect(generator, query, config.decode, config.q,
          MixSeed(instance_seed, kInferenceDecodeStream), paths, log);
  std::vector<ScoredPath> candidates;
  for (auto& p : paths) {
    const double ppl = generator.Perplexity(p);
    candidates.push_back({std::move(p), ppl});
  }
  FilterOptions fo;
  fo.perplexity_factor = config.perplexity_factor;
  fo.mean_basis = config.mean_basis;
  const auto kept = FilterPaths(candidates, fo);
  if (kept.empty()) {
    throw Error(ErrorKind::kNoPathSurvived,
                pair.head + " -> " + pair.tail + ": " + std::to_string(candidates.size()) +
                    " candidates, none survived" + (log.empty() ? "" : " (" + log.front() + ")"));
  }
  Rng rng(MixSeed(instance_seed, kInferenceChoiceStream));
  const auto& chosen = kept[UniformIndex(rng, kept.size())];
  InferencePath out;
  out.path = chosen.path;
  out.text = pathlm::RenderText(chosen.path, templates);
  out.head = pair.head;
  out.tail = pair.tail;
  out.survivors = kept.size();
  return out;
}

std::string AssembleCrgSequence(const std::string& path_text, const std::string& target,
                                const std::vector<std::string>& context,
                                const std::optional<std::string>& response) {
  std::vector<std::string> turns;
  for (const auto& c : context) turns.push_back(text::CollapseWhitespace(c));
  std::string out = text::CollapseWhitespace(path_text) + " [target] " +
                    text::CollapseWhitespace(target) + " [context] " + text::Join(turns, " [sep] ");
  if (response) out += " [response] " + text::CollapseWhitespace(*response);
  return out;
}

std::vector<TransitionInstance> ReadInstances(std::istream& in) {
  std::vector<TransitionInstance> out;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::Trim(line).empty()) continue;
    try {
      const Json j = Json::parse(line);
      TransitionInstance inst;
      if (j.contains("id")) {
        inst.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
      }
      inst.context = JsonStrings(j.at("context"), "context");
      inst.target = j.at("target").get<std::string>();
      if (j.contains("response") && !j["response"].is_null()) {
        inst.response = j["response"].get<std::string>();
      }
      if (j.contains("tagged")) {
        const auto& t = j["tagged"];
        if (t.contains("context")) inst.context_tagged = JsonStrings(t["context"], "tagged.context");
        if (t.contains("target")) inst.target_tagged = t["target"].get<std::string>();
        if (t.contains("response")) inst.response_tagged = t["response"].get<std::string>();
      }
      if (inst.context.empty() || text::Trim(inst.target).empty()) {
        throw Error(ErrorKind::kFormat, "context and target must be non-empty");
      }
      out.push_back(std::move(inst));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kFormat, "instance line " + std::to_string(line_no) + ": " + e.what(),
                  line_no);
    } catch (const Error& e) {
      throw Error(ErrorKind::kFormat, "instance line " + std::to_string(line_no) + ": " + e.what(),
                  line_no);
    }
  }
  return out;
}

BatchOutput PrepareBatch(const std::vector<TransitionInstance>& instances, entities::Phase phase,
                         pathlm::PathGenerator& generator, const PipelineConfig& config,
                         const EntityResources& resources,
                         const pathlm::RelationTemplateTable& templates, int workers) {
  config.Validate();
  struct Slot {
    std::vector<std::string> records;
    std::string skip;
  };
  std::vector<Slot> slots(instances.size());

  auto run_one = [&](size_t i) {
    const auto& inst = instances[i];
    const uint64_t seed = MixSeed(config.seed, i);
    try {
      if (phase == entities::Phase::kTrain) {
        const auto set = BuildTrainingPaths(inst, generator, config, resources, seed);
        if (set.paths.empty()) {
          std::string reason = "no path survived";
          if (!set.log.empty()) reason += ": " + text::Join(set.log, "; ");
          slots[i].skip = SkipLine(i, inst, reason);
          return;
        }
        for (size_t k = 0; k < set.paths.size(); ++k) {
          const auto& sp = set.paths[k];
          Json j = InstanceJson(inst);
          j["path"] = sp.path.ToLine();
          j["path_text"] = pathlm::RenderText(sp.path, templates);
          j["perplexity"] = sp.perplexity;
          j["crg_sequence"] = AssembleCrgSequence(j["path_text"].get<std::string>(), inst.target,
                                                  inst.context, inst.response);
          slots[i].records.push_back(j.dump());
        }
      } else {
        const auto inf = BuildInferencePath(inst, generator, config, resources, templates, seed);
        Json j = InstanceJson(inst);
        j["path"] = inf.path.ToLine();
        j["path_text"] = inf.text;
        j["crg_sequence"] = AssembleCrgSequence(inf.text, inst.target, inst.context, std::nullopt);
        slots[i].records.push_back(j.dump());
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kIo) throw;
      slots[i].skip = SkipLine(i, inst, std::string(ErrorKindName(e.kind())) + ": " + e.what());
    }
  };

  const size_t n_workers = std::max<size_t>(1, std::min<size_t>(workers, instances.size()));
  if (n_workers == 1) {
    for (size_t i = 0; i < instances.size(); ++i) run_one(i);
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(n_workers);
    for (size_t w = 0; w < n_workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          for (size_t i = w; i < instances.size(); i += n_workers) run_one(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  BatchOutput out;
  for (auto& s : slots) {
    for (auto& r : s.records) out.records.push_back(std::move(r));
    if (!s.skip.empty()) out.skipped.push_back(std::move(s.skip));
  }
  return out;
}

}  // namespace pipeline
}  // namespace pathbridge
