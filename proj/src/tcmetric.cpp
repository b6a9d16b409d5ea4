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

#include "pathbridge/tcmetric.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "json.hpp"
#include "pathbridge/error.hpp"
#include "pathbridge/rng.hpp"
#include "pathbridge/subprocess.hpp"
#include "pathbridge/text.hpp"

namespace pathbridge {
namespace tcmetric {

namespace {

using pipeline::TransitionInstance;

LabeledTriple Gold(const TransitionInstance& inst, size_t index) {
  LabeledTriple t;
  t.context = inst.context;
  t.response = inst.response.value_or("");
  t.target = inst.target;
  t.label = Label::kPositive;
  t.provenance = Provenance::kGold;
  t.source = index;
  return t;
}

enum class Field { kContext, kTarget, kResponse };

bool Differs(const TransitionInstance& a, const TransitionInstance& b, Field f) {
  switch (f) {
    case Field::kContext: return a.context != b.context;
    case Field::kTarget: return a.target != b.target;
    case Field::kResponse: return a.response.value_or("") != b.response.value_or("");
  }
  return false;
}

std::vector<LabeledTriple> RandomSwaps(const std::vector<TransitionInstance>& data, size_t i,
                                       int limit, Rng& rng) {
  std::vector<Field> fields{Field::kContext, Field::kTarget, Field::kResponse};
  Shuffle(std::span<Field>(fields), rng);
  std::vector<LabeledTriple> out;
  const LabeledTriple gold = Gold(data[i], i);
  const int attempts = limit * 4;
  for (int k = 0; k < attempts && static_cast<int>(out.size()) < limit; ++k) {
    const Field f = fields[static_cast<size_t>(k) % fields.size()];
    std::vector<size_t> donors;
    for (size_t j = 0; j < data.size(); ++j) {
      if (j != i && Differs(data[i], data[j], f)) donors.push_back(j);
    }
    if (donors.empty()) continue;
    const auto& donor = data[donors[UniformIndex(rng, donors.size())]];
    LabeledTriple neg = gold;
    neg.label = Label::kNegative;
    switch (f) {
      case Field::kContext:
        neg.context = donor.context;
        neg.provenance = Provenance::kRandSwapContext;
        break;
      case Field::kTarget:
        neg.target = donor.target;
        neg.provenance = Provenance::kRandSwapTarget;
        break;
      case Field::kResponse:
        neg.response = donor.response.value_or("");
        neg.provenance = Provenance::kRandSwapResponse;
        break;
    }
    const bool dup = std::any_of(out.begin(), out.end(),
                                 [&](const LabeledTriple& o) { return o.SameFields(neg); });
    if (!dup) out.push_back(std::move(neg));
  }
  return out;
}

std::vector<std::string> RandomTargets(const std::vector<TransitionInstance>& data, size_t i,
                                       int limit, Rng& rng) {
  std::set<std::string> pool;
  for (const auto& d : data) {
    if (d.target != data[i].target) pool.insert(d.target);
  }
  std::vector<std::string> choices(pool.begin(), pool.end());
  Shuffle(std::span<std::string>(choices), rng);
  if (choices.size() > static_cast<size_t>(limit)) choices.resize(static_cast<size_t>(limit));
  return choices;
}

std::vector<LabeledTriple> SameTarget(const std::vector<TransitionInstance>& data, size_t i,
                                      int limit, Rng& rng) {
  const LabeledTriple gold = Gold(data[i], i);
  std::vector<size_t> donors;
  std::set<std::string> responses;
  for (size_t j = 0; j < data.size(); ++j) {
    const std::string r = data[j].response.value_or("");
    if (j != i && data[j].target == data[i].target && data[j].context != data[i].context &&
        r != gold.response && responses.insert(r).second) {
      donors.push_back(j);
    }
  }
  Shuffle(std::span<size_t>(donors), rng);
  std::vector<LabeledTriple> out;
  for (size_t j : donors) {
    if (static_cast<int>(out.size()) >= limit) break;
    LabeledTriple neg = gold;
    neg.label = Label::kNegative;
    neg.provenance = Provenance::kSameTargetOtherContext;
    neg.response = data[j].response.value_or("");
    out.push_back(std::move(neg));
  }
  return out;
}

}  // namespace

std::string_view LabelName(Label label) {
  return label == Label::kPositive ? "POSITIVE" : "NEGATIVE";
}

std::string_view ProvenanceName(Provenance provenance) {
  switch (provenance) {
    case Provenance::kGold: return "GOLD";
    case Provenance::kRandSwapContext: return "RAND_SWAP(c)";
    case Provenance::kRandSwapTarget: return "RAND_SWAP(t)";
    case Provenance::kRandSwapResponse: return "RAND_SWAP(r)";
    case Provenance::kGenRandomTarget: return "GEN_RANDOM_TARGET";
    case Provenance::kSameTargetOtherContext: return "SAME_TARGET_OTHER_CONTEXT";
    case Provenance::kRepeatPositive: return "REPEAT_POSITIVE";
  }
  return "GOLD";
}

std::vector<std::optional<std::string>> CommandResponseGenerator::Generate(
    const std::vector<std::pair<std::string, std::string>>& context_target) {
  std::vector<std::string> lines;
  for (const auto& [c, t] : context_target) {
    lines.push_back(text::SanitizeField(c) + "\t" + text::SanitizeField(t));
  }
  const auto replies = RunLineProtocol(command_, lines);
  std::vector<std::optional<std::string>> out;
  for (size_t i = 0; i < context_target.size(); ++i) {
    if (i < replies.size() && !text::Trim(replies[i]).empty()) {
      out.emplace_back(text::CollapseWhitespace(replies[i]));
    } else {
      out.emplace_back(std::nullopt);
    }
  }
  return out;
}

void SynthConfig::Validate() const {
  if (max_per_mechanism < 0) throw Error(ErrorKind::kInvalidArgument, "max_per_mechanism must be >= 0");
}

SynthResult SynthesizeNegatives(const std::vector<TransitionInstance>& dataset,
                                ResponseGenerator* generator, const SynthConfig& config) {
  config.Validate();
  if (dataset.size() < 2) {
    throw Error(ErrorKind::kInsufficientDataset, "need at least two instances");
  }
  SynthResult result;
  {
    std::set<std::vector<std::string>> contexts;
    std::set<std::string> targets;
    for (const auto& d : dataset) {
      contexts.insert(d.context);
      targets.insert(d.target);
    }
    if (contexts.size() < 2 || targets.size() < 2) {
      result.warnings.push_back("fewer than two distinct contexts or targets; swaps degenerate");
    }
  }
  const bool use_generator = config.generated_response && generator != nullptr;
  if (config.generated_response && generator == nullptr) {
    result.warnings.push_back("generated-response mechanism skipped: no generator");
  }

  struct Draws {
    std::vector<LabeledTriple> swaps;
    std::vector<std::string> random_targets;
    std::vector<LabeledTriple> same_target;
  };
  std::vector<Draws> draws(dataset.size());
  for (size_t i = 0; i < dataset.size(); ++i) {
    Rng rng(MixSeed(config.seed, i));
    if (config.random_swap) draws[i].swaps = RandomSwaps(dataset, i, config.max_per_mechanism, rng);
    if (use_generator) {
      draws[i].random_targets = RandomTargets(dataset, i, config.max_per_mechanism, rng);
    }
    if (config.same_target) {
      draws[i].same_target = SameTarget(dataset, i, config.max_per_mechanism, rng);
    }
  }

  std::vector<std::pair<std::string, std::string>> requests;
  std::vector<size_t> request_owner;
  for (size_t i = 0; i < dataset.size(); ++i) {
    for (const auto& t : draws[i].random_targets) {
      requests.emplace_back(text::Join(dataset[i].context, " "), t);
      request_owner.push_back(i);
    }
  }
  std::vector<std::optional<std::string>> generated;
  if (!requests.empty()) {
    generated = generator->Generate(requests);
    generated.resize(requests.size());
  }
  std::vector<std::vector<LabeledTriple>> from_generator(dataset.size());
  size_t failed = 0;
  for (size_t k = 0; k < requests.size(); ++k) {
    const size_t i = request_owner[k];
    LabeledTriple neg = Gold(dataset[i], i);
    if (!generated[k] || *generated[k] == neg.response) {
      ++failed;
      continue;
    }
    neg.label = Label::kNegative;
    neg.provenance = Provenance::kGenRandomTarget;
    neg.response = *generated[k];
    from_generator[i].push_back(std::move(neg));
  }
  if (failed) {
    result.warnings.push_back(std::to_string(failed) + " generated responses unusable");
  }

  for (size_t i = 0; i < dataset.size(); ++i) {
    result.triples.push_back(Gold(dataset[i], i));
    for (auto* group : {&draws[i].swaps, &from_generator[i], &draws[i].same_target}) {
      for (auto& t : *group) result.triples.push_back(std::move(t));
    }
  }
  return result;
}

std::vector<LabeledTriple> Balance(const std::vector<LabeledTriple>& labeled, uint64_t seed) {
  std::vector<LabeledTriple> positives;
  std::vector<LabeledTriple> out;
  for (const auto& t : labeled) {
    if (t.label == Label::kPositive) {
      positives.push_back(t);
    } else {
      out.push_back(t);
    }
  }
  if (positives.empty()) throw Error(ErrorKind::kNoPositives, "nothing to balance against");
  const size_t negatives = out.size();
  for (size_t k = 0; k < negatives; ++k) {
    LabeledTriple p = positives[k % positives.size()];
    if (k >= positives.size()) p.provenance = Provenance::kRepeatPositive;
    out.push_back(std::move(p));
  }
  Rng rng(seed);
  Shuffle(std::span<LabeledTriple>(out), rng);
  return out;
}

std::string TripleToJson(const LabeledTriple& triple) {
  nlohmann::ordered_json j;
  j["context"] = triple.context;
  j["response"] = triple.response;
  j["target"] = triple.target;
  j["label"] = LabelName(triple.label);
  j["provenance"] = ProvenanceName(triple.provenance);
  j["source"] = triple.source;
  return j.dump();
}

LabeledTriple TripleFromJson(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    LabeledTriple t;
    if (j.at("context").is_string()) {
      t.context = {j["context"].get<std::string>()};
    } else {
      t.context = j["context"].get<std::vector<std::string>>();
    }
    t.response = j.at("response").get<std::string>();
    t.target = j.at("target").get<std::string>();
    const std::string label = j.at("label").get<std::string>();
    if (label == "POSITIVE") {
      t.label = Label::kPositive;
    } else if (label == "NEGATIVE") {
      t.label = Label::kNegative;
    } else {
      throw Error(ErrorKind::kFormat, "unknown label " + label);
    }
    const std::string prov = j.value("provenance", "GOLD");
    bool found = false;
    for (auto p : {Provenance::kGold, Provenance::kRandSwapContext, Provenance::kRandSwapTarget,
                   Provenance::kRandSwapResponse, Provenance::kGenRandomTarget,
                   Provenance::kSameTargetOtherContext, Provenance::kRepeatPositive}) {
      if (ProvenanceName(p) == prov) {
        t.provenance = p;
        found = true;
      }
    }
    if (!found) throw Error(ErrorKind::kFormat, "unknown provenance " + prov);
    t.source = j.value("source", size_t{0});
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("triple json: ") + e.what());
  }
}

double ReferenceScore(std::string_view context, std::string_view response,
                      std::string_view target) {
  const auto as_set = [](std::string_view s) {
    const auto toks = text::ContentTokens(s);
    return std::unordered_set<std::string>(toks.begin(), toks.end());
  };
  const auto c = as_set(context);
  const auto t = as_set(target);
  const auto r = as_set(response);
  if (c.empty() || t.empty() || r.empty()) return 0.0;
  const auto overlap = [&](const std::unordered_set<std::string>& side) {
    size_t hit = 0;
    for (const auto& w : side) hit += r.contains(w) ? 1 : 0;
    return static_cast<double>(hit) / static_cast<double>(side.size());
  };
  const double ov_c = overlap(c);
  const double ov_t = overlap(t);
  if (ov_c + ov_t == 0.0) return 0.0;
  const double hm = 2.0 * ov_c * ov_t / (ov_c + ov_t);
  return hm * (1.0 - ov_t * ov_t) * (1.0 - ov_c * ov_c * ov_c * ov_c);
}

std::vector<std::optional<double>> ReferenceScorer::ScoreBatch(
    const std::vector<ScoreRequest>& requests) {
  std::vector<std::optional<double>> out;
  out.reserve(requests.size());
  for (const auto& r : requests) out.emplace_back(ReferenceScore(r.context, r.response, r.target));
  return out;
}

}  // namespace tcmetric
}  // namespace pathbridge
