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

// Training data for a target-coherence classifier: gold positives plus
// synthesized negatives, balanced by repeating positives. Also a lexical
// reference scorer honoring the Scorer contract.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pathbridge/pipeline.hpp"
#include "pathbridge/scorer.hpp"

namespace pathbridge {
namespace tcmetric {

enum class Label { kPositive, kNegative };

enum class Provenance {
  kGold,
  kRandSwapContext,
  kRandSwapTarget,
  kRandSwapResponse,
  kGenRandomTarget,
  kSameTargetOtherContext,
  kRepeatPositive,
};

std::string_view LabelName(Label label);
// "GOLD", "RAND_SWAP(c)", "RAND_SWAP(t)", "RAND_SWAP(r)", "GEN_RANDOM_TARGET",
// "SAME_TARGET_OTHER_CONTEXT", "REPEAT_POSITIVE".
std::string_view ProvenanceName(Provenance provenance);

struct LabeledTriple {
  std::vector<std::string> context;
  std::string response;
  std::string target;
  Label label = Label::kPositive;
  Provenance provenance = Provenance::kGold;
  size_t source = 0;  // index of the gold instance it derives from

  bool SameFields(const LabeledTriple& other) const {
    return context == other.context && response == other.response && target == other.target;
  }
};

// Response generator contract for the random-target mechanism.
class ResponseGenerator {
 public:
  virtual ~ResponseGenerator() = default;
  // One response per (context, target) request; nullopt where it failed.
  virtual std::vector<std::optional<std::string>> Generate(
      const std::vector<std::pair<std::string, std::string>>& context_target) = 0;
};

// "context<TAB>target" lines in, one response per line out; empty lines
// count as failures.
class CommandResponseGenerator : public ResponseGenerator {
 public:
  explicit CommandResponseGenerator(std::string command) : command_(std::move(command)) {}
  std::vector<std::optional<std::string>> Generate(
      const std::vector<std::pair<std::string, std::string>>& context_target) override;

 private:
  std::string command_;
};

struct SynthConfig {
  int max_per_mechanism = 2;
  uint64_t seed = 0;
  bool random_swap = true;          // mechanism 1
  bool generated_response = true;   // mechanism 2 (needs a generator)
  bool same_target = true;          // mechanism 3

  void Validate() const;
};

struct SynthResult {
  // Each gold positive followed by its negatives, in dataset order.
  std::vector<LabeledTriple> triples;
  std::vector<std::string> warnings;
};

// Instance i draws from Rng(MixSeed(seed, i)). Throws kInsufficientDataset
// for fewer than two instances.
SynthResult SynthesizeNegatives(const std::vector<pipeline::TransitionInstance>& dataset,
                                ResponseGenerator* generator, const SynthConfig& config);

// Repeats positives cyclically until they match the negative count (extra
// copies are REPEAT_POSITIVE), then shuffles with `seed`. Throws kNoPositives.
std::vector<LabeledTriple> Balance(const std::vector<LabeledTriple>& labeled, uint64_t seed);

std::string TripleToJson(const LabeledTriple& triple);
LabeledTriple TripleFromJson(std::string_view line);

// Lexical stand-in for a trained coherence classifier. With C, T, R the
// content-token sets of context, target and response,
//   ov_c = |R ∩ C| / |C|,  ov_t = |R ∩ T| / |T|
//   score = HM(ov_c, ov_t) * (1 - ov_t^2) * (1 - ov_c^4)
// The last two factors push verbatim copies of either side toward 0.
double ReferenceScore(std::string_view context, std::string_view response,
                      std::string_view target);

class ReferenceScorer : public Scorer {
 public:
  std::vector<std::optional<double>> ScoreBatch(
      const std::vector<ScoreRequest>& requests) override;
};

}  // namespace tcmetric
}  // namespace pathbridge
