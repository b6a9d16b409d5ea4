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

// Slow, direct reimplementations used to check the library. They share only
// public accessors with the code under test.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "pathbridge/kg.hpp"
#include "pathbridge/path.hpp"
#include "pathbridge/path_model.hpp"
#include "pathbridge/pipeline.hpp"
#include "pathbridge/tcmetric.hpp"

namespace pathbridge::oracle {

// Exact probability of each walk length 1..max_hops, by expanding the whole
// walk tree from uniform start nodes.
std::vector<double> WalkLengthDistribution(const kg::KnowledgeGraph& graph, int max_hops,
                                           bool allow_backtrack);

// Pearson chi-square statistic and its upper-tail p-value.
struct ChiSquare {
  double statistic = 0.0;
  double p_value = 0.0;
};
ChiSquare ChiSquareTest(const std::vector<double>& observed, const std::vector<double>& expected);

// Smoothed probability recomputed from Count() alone.
double NgramProbability(const pathlm::PathModel& model, const std::vector<std::string>& history,
                        const std::string& next);

// Sum of log-probabilities of the HT tokens and the end marker.
double HtLogProb(const pathlm::PathModel& model, const KnowledgePath& path, size_t* tokens);
double Perplexity(const pathlm::PathModel& model, const KnowledgePath& path);

struct Scored {
  KnowledgePath path;
  double log_prob = 0.0;
};
// Every body the constrained decoder may produce for `query`, scored like the
// decoder (tokens after the head plus the end marker), best first.
std::vector<Scored> EnumerateConstrained(const pathlm::PathModel& model,
                                         const pathlm::PathQuery& query, int max_len,
                                         int max_hops);

std::vector<pipeline::ScoredPath> NaiveFilter(const std::vector<pipeline::ScoredPath>& candidates,
                                              double factor, bool mean_after_repetition,
                                              const std::vector<std::string>* gold);

// Corpus BLEU-4 written straight from the definition, same conventions as
// the library (orders without hypothesis n-grams skipped).
double Bleu(const std::vector<std::vector<std::string>>& hypotheses,
            const std::vector<std::vector<std::vector<std::string>>>& references);
double RougeL(const std::vector<std::string>& hypothesis,
              const std::vector<std::vector<std::string>>& references);

// Number of differing fields among context, response and target.
int FieldDiff(const tcmetric::LabeledTriple& a, const tcmetric::LabeledTriple& b);

}  // namespace pathbridge::oracle
