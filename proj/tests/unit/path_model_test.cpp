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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pathbridge/error.hpp"
#include "pathbridge/path_model.hpp"
#include "pathbridge/sampler.hpp"
#include "pathbridge/text.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace pathbridge {
namespace {

using pathlm::DecodeConfig;
using pathlm::DecodeStrategy;
using pathlm::PathModel;
using pathlm::PathQuery;
using pathlm::SequenceMode;

std::vector<KnowledgePath> Paths(std::initializer_list<const char*> lines) {
  std::vector<KnowledgePath> out;
  for (const char* l : lines) out.push_back(KnowledgePath::FromLine(l));
  return out;
}

PathModel Train(const std::vector<KnowledgePath>& corpus, int order = 3, double eps = 0.01) {
  pathlm::TrainOptions o;
  o.order = order;
  o.smoothing = eps;
  return PathModel::Train(corpus, o);
}

uint64_t Count(const PathModel& m, std::initializer_list<std::string> gram) {
  const std::vector<std::string> g(gram);
  return m.Count(g);
}

TEST(Train, BigramCountsByHand) {
  const auto m = Train(Paths({"a IsA b"}), 2);
  EXPECT_EQ(Count(m, {"a", "IsA"}), 1u);
  EXPECT_EQ(Count(m, {"IsA", "b"}), 1u);
  EXPECT_EQ(Count(m, {"b", "[sep]"}), 1u);
  EXPECT_EQ(Count(m, {"b", "</s>"}), 1u);
  EXPECT_EQ(Count(m, {"b"}), 2u);
  EXPECT_EQ(Count(m, {"zzz"}), 0u);
}

TEST(Train, EmptyCorpus) {
  try {
    Train({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyCorpus);
  }
}

TEST(Train, TrainingSequencesHtThenWc) {
  const auto p = KnowledgePath::FromLine("sand AtLocation beach _UsedFor walk _Desires puppy");
  const auto seqs = pathlm::TrainingSequences(p, {});
  ASSERT_EQ(seqs.size(), 2u);
  EXPECT_EQ(text::Join(seqs[0], " "),
            "[target] puppy [sep] sand AtLocation beach _UsedFor walk _Desires puppy");
  EXPECT_EQ(seqs[1][0], "[wc]");
  EXPECT_EQ(pathlm::TrainingSequences(p, {}), seqs);
  pathlm::TrainOptions one;
  one.include_one_entity = true;
  EXPECT_EQ(pathlm::TrainingSequences(p, one).size(), 3u);
  EXPECT_EQ(pathlm::TrainingSequences(KnowledgePath::FromLine("a IsA b"), {}).size(), 1u);
}

TEST(Train, DuplicatedCorpusDoublesCounts) {
  sampler::SamplerConfig sc;
  sc.count = 300;
  sc.seed = 2;
  const auto corpus = sampler::SampleCorpus(testing::FixtureGraph(), sc);
  auto doubled = corpus;
  doubled.insert(doubled.end(), corpus.begin(), corpus.end());
  const auto m1 = Train(corpus);
  const auto m2 = Train(doubled);
  ASSERT_EQ(m1.vocabulary(), m2.vocabulary());
  for (const auto& p : corpus) {
    for (const auto& seq : pathlm::TrainingSequences(p, {})) {
      for (size_t i = 0; i + 3 <= seq.size(); ++i) {
        const std::vector<std::string> g(seq.begin() + i, seq.begin() + i + 3);
        EXPECT_EQ(m2.Count(g), 2 * m1.Count(g));
      }
    }
  }
  // Argmax continuation after each two-token history is unchanged.
  for (const auto& p : corpus) {
    const auto seq = pathlm::TrainingSequences(p, {})[0];
    std::vector<pathlm::TokenId> hist;
    for (const auto& t : seq) hist.push_back(*m1.Id(t));
    auto argmax = [&](const PathModel& m) {
      pathlm::TokenId best = 0;
      double bp = -1;
      for (pathlm::TokenId w = 0; w < m.vocabulary().size(); ++w) {
        const double pw = m.Probability(hist, w);
        if (pw > bp) {
          bp = pw;
          best = w;
        }
      }
      return best;
    };
    EXPECT_EQ(argmax(m1), argmax(m2));
  }
}

TEST(Train, JsonRoundTrip) {
  const auto& m = testing::FixtureModel();
  const auto back = PathModel::FromJson(m.ToJson());
  EXPECT_EQ(back.ToJson(), m.ToJson());
  const auto p = KnowledgePath::FromLine("sand AtLocation beach UsedFor walk");
  EXPECT_DOUBLE_EQ(pathlm::PathPerplexity(back, p), pathlm::PathPerplexity(m, p));
}

TEST(Train, RejectsForeignJson) {
  EXPECT_THROW(PathModel::FromJson("{\"format\":\"other\"}"), std::exception);
}

TEST(Probability, SumsToOne) {
  const auto& m = testing::FixtureModel();
  const std::vector<pathlm::TokenId> hist{*m.Id("[sep]"), *m.Id("sand")};
  double total = 0.0;
  for (pathlm::TokenId w = 0; w < m.vocabulary().size(); ++w) total += m.Probability(hist, w);
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Perplexity, DeterministicModelIsOne) {
  const auto m = Train(Paths({"a IsA b"}), 3, 1e-13);
  EXPECT_NEAR(pathlm::PathPerplexity(m, KnowledgePath::FromLine("a IsA b")), 1.0, 1e-9);
}

TEST(Perplexity, TwoWayBranchingIsTwo) {
  // Bigram counts where each history along "[target] b [sep] a IsA b </s>"
  // has exactly two continuations of count 1.
  const std::vector<std::string> vocab{"<s>", "</s>", "[target]", "[sep]", "[wc]",
                                       "a",   "b",    "x",        "IsA"};
  std::vector<std::pair<std::vector<std::string>, uint64_t>> counts{
      {{"<s>", "[target]"}, 1}, {{"<s>", "x"}, 1},   {{"[target]", "b"}, 1},
      {{"[target]", "x"}, 1},   {{"b", "[sep]"}, 1}, {{"b", "</s>"}, 1},
      {{"[sep]", "a"}, 1},      {{"[sep]", "x"}, 1}, {{"a", "IsA"}, 1},
      {{"a", "x"}, 1},          {{"IsA", "b"}, 1},   {{"IsA", "x"}, 1},
  };
  const auto m = PathModel::FromCounts(2, 1e-13, vocab, counts);
  EXPECT_NEAR(pathlm::PathPerplexity(m, KnowledgePath::FromLine("a IsA b")), 2.0, 1e-9);
}

TEST(Perplexity, MatchesOracleOnSampledPaths) {
  const auto& m = testing::FixtureModel();
  sampler::SamplerConfig sc;
  sc.count = 60;
  sc.seed = 31;
  for (const auto& p : sampler::SampleCorpus(testing::FixtureGraph(), sc)) {
    EXPECT_NEAR(pathlm::PathPerplexity(m, p), oracle::Perplexity(m, p), 1e-9) << p.ToLine();
  }
}

TEST(Perplexity, UnknownToken) {
  EXPECT_THROW(pathlm::PathPerplexity(testing::FixtureModel(), KnowledgePath::FromLine("zebra IsA sand")),
               Error);
}

TEST(Generate, SingleContinuationDominates) {
  const auto m = Train(Paths({"a IsA b"}));
  PathQuery q{SequenceMode::kHeadTail, "a", "b", {}};
  DecodeConfig c;
  c.seed = 4;
  const auto sampled = pathlm::GeneratePath(m, q, c);
  ASSERT_EQ(sampled.size(), 1u);
  EXPECT_EQ(sampled[0].ToLine(), "a IsA b");
  c.strategy = DecodeStrategy::kBeam;
  EXPECT_EQ(pathlm::GeneratePath(m, q, c)[0].ToLine(), "a IsA b");
}

TEST(Generate, UnknownConcept) {
  const auto m = Train(Paths({"a IsA b"}));
  try {
    pathlm::GeneratePath(m, {SequenceMode::kHeadTail, "a", "z", {}}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnknownConcept);
  }
}

TEST(Generate, WillContainForcesRequiredEntity) {
  const auto m = Train(Paths({"a R1 m R2 b", "a R3 b"}));
  PathQuery q{SequenceMode::kWillContain, "a", "b", {"m"}};
  DecodeConfig c;
  c.strategy = DecodeStrategy::kBeam;
  c.beam_width = 64;
  c.max_len = 5;
  const auto beam = pathlm::GeneratePathsScored(m, q, c);
  ASSERT_FALSE(beam.empty());
  EXPECT_EQ(beam[0].path.ToLine(), "a R1 m R2 b");
  const auto brute = oracle::EnumerateConstrained(m, q, 5, 6);
  ASSERT_FALSE(brute.empty());
  EXPECT_EQ(brute[0].path, beam[0].path);
  EXPECT_NEAR(brute[0].log_prob, beam[0].log_prob, 1e-9);
}

TEST(Generate, InfeasibleConstraintsFail) {
  const auto m = Train(Paths({"a R1 m R2 b", "a R3 n R4 b"}));
  PathQuery q{SequenceMode::kWillContain, "a", "b", {"m", "n"}};
  DecodeConfig c;
  c.max_len = 5;  // two hops cannot hold two intermediates plus the tail
  try {
    pathlm::GeneratePath(m, q, c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kNoPathFound);
  }
}

TEST(Generate, SamplesHonorConstraints) {
  const auto& m = testing::FixtureModel();
  PathQuery q{SequenceMode::kWillContain, "garden", "restaurant", {"best_ingredients"}};
  DecodeConfig c;
  c.num_samples = 10;
  for (uint64_t seed = 0; seed < 10; ++seed) {
    c.seed = seed;
    for (const auto& p : pathlm::GeneratePath(m, q, c)) {
      EXPECT_EQ(p.Head(), "garden");
      EXPECT_EQ(p.Tail(), "restaurant");
      const auto inner = p.Intermediates();
      EXPECT_NE(std::find(inner.begin(), inner.end(), "best_ingredients"), inner.end());
      EXPECT_EQ(std::find(inner.begin(), inner.end(), "restaurant"), inner.end());
      EXPECT_LE(p.Hops(), 6u);
    }
  }
}

TEST(Generate, SamplingIsSeeded) {
  const auto& m = testing::FixtureModel();
  PathQuery q{SequenceMode::kHeadTail, "sand", "puppy", {}};
  DecodeConfig c;
  c.seed = 7;
  c.num_samples = 5;
  EXPECT_EQ(pathlm::GeneratePath(m, q, c), pathlm::GeneratePath(m, q, c));
}

TEST(Generate, SamplesAreDistinct) {
  const auto& m = testing::FixtureModel();
  DecodeConfig c;
  c.seed = 1;
  c.num_samples = 8;
  const auto paths = pathlm::GeneratePath(m, {SequenceMode::kHeadTail, "sand", "puppy", {}}, c);
  for (size_t i = 0; i < paths.size(); ++i) {
    for (size_t j = i + 1; j < paths.size(); ++j) EXPECT_NE(paths[i], paths[j]);
  }
}

TEST(Generate, BeamMatchesBruteForceOnFixture) {
  const auto& m = testing::FixtureModel();
  DecodeConfig c;
  c.strategy = DecodeStrategy::kBeam;
  c.beam_width = 4096;
  c.max_len = 5;
  const std::vector<PathQuery> queries{
      {SequenceMode::kHeadTail, "sand", "walk", {}},
      {SequenceMode::kOneEntity, "sand", "walk", {"beach"}},
      {SequenceMode::kOneEntity, "chef", "cook", {"kitchen"}},
  };
  for (const auto& q : queries) {
    const auto beam = pathlm::GeneratePathsScored(m, q, c);
    const auto brute = oracle::EnumerateConstrained(m, q, c.max_len, c.max_hops);
    ASSERT_FALSE(beam.empty());
    EXPECT_EQ(beam[0].path, brute[0].path) << q.head << "->" << q.tail;
    EXPECT_NEAR(beam[0].log_prob, brute[0].log_prob, 1e-9);
  }
}

TEST(Generate, HopCapFromMaxLen) {
  const auto& m = testing::FixtureModel();
  DecodeConfig c;
  c.max_len = 7;
  c.num_samples = 20;
  for (const auto& p :
       pathlm::GeneratePath(m, {SequenceMode::kHeadTail, "sand", "puppy", {}}, c)) {
    EXPECT_LE(p.Hops(), 3u);
  }
}

TEST(QueryLine, RoundTrip) {
  PathQuery q{SequenceMode::kWillContain, "a", "b", {"m", "n"}};
  EXPECT_EQ(pathlm::FormatQueryLine(q), "WC\ta\tb\tm,n");
  const auto back = pathlm::ParseQueryLine("WC\ta\tb\tm,n");
  EXPECT_EQ(back.required, q.required);
  EXPECT_EQ(pathlm::FormatQueryLine({SequenceMode::kHeadTail, "a", "b", {}}), "HT\ta\tb");
  EXPECT_EQ(pathlm::FormatQueryLine({SequenceMode::kOneEntity, "a", "b", {"m"}}), "WC\ta\tb\tm");
  EXPECT_THROW(pathlm::ParseQueryLine("XX\ta"), Error);
}

TEST(Serve, OneLinePerQuery) {
  const auto& m = testing::FixtureModel();
  std::istringstream in("HT\tsand\tpuppy\nHT\tsand\tzebra\nWC\tgarden\trestaurant\tbest_ingredients\n");
  std::ostringstream out;
  DecodeConfig c;
  c.seed = 3;
  pathlm::ServeQueries(m, c, in, out);
  const auto lines = text::Split(out.str(), '\n');
  ASSERT_EQ(lines.size(), 4u);  // trailing newline
  EXPECT_EQ(pathlm::ParseSequence(lines[0]).Tail(), "puppy");
  EXPECT_EQ(lines[1], "");
  const auto wc = pathlm::ParseSequenceFull(lines[2]);
  EXPECT_EQ(wc.wc_entities, std::vector<std::string>{"best_ingredients"});
  EXPECT_EQ(wc.path.Tail(), "restaurant");
}

TEST(DecodeConfig, Defaults) {
  DecodeConfig c;
  EXPECT_DOUBLE_EQ(c.temperature, 0.7);
  EXPECT_DOUBLE_EQ(c.top_p, 0.9);
  EXPECT_EQ(c.max_hops, 6);
  c.top_p = 0.0;
  EXPECT_THROW(c.Validate(), Error);
}

}  // namespace
}  // namespace pathbridge
