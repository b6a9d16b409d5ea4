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

#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "pathbridge/pipeline.hpp"

namespace pathbridge {
namespace evalkit {

struct EvalInstance {
  std::string id;
  std::vector<std::string> context;
  std::string target;
  std::string hypothesis;
  std::vector<std::string> references;
};

// JSONL {"id"?, "context": [..] | "..", "target", "hypothesis"?, "references": [..]}.
std::vector<EvalInstance> ReadEvalInstances(std::istream& in);

struct BleuCase {
  std::string hypothesis;
  std::vector<std::string> references;
};

// Corpus BLEU-4 on lowercase whitespace tokens: clipped n-gram counts summed
// over the corpus, geometric mean of the precisions, brevity penalty against
// the closest reference length (shorter wins ties). Orders for which the
// hypotheses contain no n-grams at all are left out of the mean; any other
// zero precision gives 0. Throws kEmptyCorpus.
double Bleu(const std::vector<BleuCase>& corpus);

// Max over references of the LCS F1.
double RougeL(std::string_view hypothesis, const std::vector<std::string>& references);

// Pearson correlation of average ranks. Throws kLengthMismatch,
// kInvalidArgument (fewer than 3 points), kDegenerateInput (constant series).
double Spearman(const std::vector<double>& xs, const std::vector<double>& ys);
std::vector<double> FractionalRanks(const std::vector<double>& values);

// Corpus-level metric over parallel hypotheses and reference lists.
using CorpusMetric = std::function<double(const std::vector<BleuCase>&)>;
double MeanRougeL(const std::vector<BleuCase>& corpus);
CorpusMetric MetricByName(std::string_view name);  // "bleu", "rouge_l"

struct ProbeRow {
  std::string name;  // TARGET_AS_RESPONSE, CONTEXT_AS_RESPONSE, REFERENCE_AS_RESPONSE
  double score = 0.0;
};

struct ProbeResult {
  std::vector<ProbeRow> rows;
  size_t target_in_references = 0;   // instances with the target among the scoring refs
  size_t context_in_references = 0;
  std::vector<std::string> flags;
};

// references[0] is held out as the REFERENCE_AS_RESPONSE hypothesis; all
// three rows are scored against references[1..]. Multi-turn contexts use
// their last utterance. Throws kInsufficientReferences.
ProbeResult BiasProbe(const std::vector<EvalInstance>& dataset, const CorpusMetric& metric);

enum class OverlapBasis { kTarget, kResponse, kMax };

// |content(r) ∩ content(t)| (multiset) over the content-token count chosen
// by `basis`; 0 when that count is 0.
double CopyOverlap(std::string_view response, std::string_view target, OverlapBasis basis);

struct CleanResult {
  std::vector<pipeline::TransitionInstance> kept;
  std::vector<size_t> removed;
};

// Drops instances whose response-target overlap exceeds `threshold`.
CleanResult CleanTestSet(const std::vector<pipeline::TransitionInstance>& instances,
                         double threshold = 0.75, OverlapBasis basis = OverlapBasis::kTarget);

struct Rating {
  std::string id;
  double metric = 0.0;
  double human = 0.0;
};

// CSV "instance_id,metric_score,human_rating"; a non-numeric first line is
// taken as a header. Throws kMalformedLine.
std::vector<Rating> ReadRatings(std::istream& in);

}  // namespace evalkit
}  // namespace pathbridge
