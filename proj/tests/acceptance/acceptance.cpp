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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pathbridge/augment.hpp"
#include "pathbridge/error.hpp"
#include "pathbridge/evalkit.hpp"
#include "pathbridge/kg.hpp"
#include "pathbridge/path.hpp"
#include "pathbridge/path_model.hpp"
#include "pathbridge/pipeline.hpp"
#include "pathbridge/rng.hpp"
#include "pathbridge/sampler.hpp"
#include "pathbridge/sequence.hpp"
#include "pathbridge/tcmetric.hpp"
#include "pathbridge/text.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;

namespace pathbridge {
namespace {

// Pinned thresholds.
constexpr uint64_t kWalks = 10000;
constexpr double kChiSquareMinP = 0.01;
constexpr double kSamplerSeconds = 10.0;
constexpr int kRoundTrips = 1000;
constexpr int kDecodeInstances = 100;
constexpr int kBruteForceMaxLen = 5;
constexpr int kBruteForceBeam = 2048;
constexpr double kLogProbTolerance = 1e-9;
constexpr int kPerplexityPaths = 200;
constexpr double kPerplexityRelTolerance = 1e-9;
constexpr int kFilterSets = 100;
constexpr int kMaxPerMechanism = 2;
constexpr int kMetricCases = 50;
constexpr double kMetricTolerance = 1e-6;
constexpr double kSpearmanTieTolerance = 1e-9;
constexpr double kEndToEndSeconds = 60.0;
constexpr double kMinWalksPerSecond = 100000.0;
constexpr double kMinScaling = 3.0;
constexpr size_t kSyntheticEdges = 100000;

struct Paths {
  std::string data;
  std::string cli;
  std::string work;
};

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Checker {
 public:
  void Expect(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      if (failures_++ < 5) fails_ += (fails_.empty() ? "" : "; ") + what;
    }
  }
  void Note(const std::string& s) { notes_ += (notes_.empty() ? "" : ", ") + s; }
  Outcome Done() const {
    std::string d = notes_;
    if (!pass_) d += (d.empty() ? "" : " | ") + std::string("failed: ") + fails_ +
                     (failures_ > 5 ? " (+" + std::to_string(failures_ - 5) + " more)" : "");
    return {pass_, d};
  }

 private:
  bool pass_ = true;
  int failures_ = 0;
  std::string fails_;
  std::string notes_;
};

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

std::string Fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const kg::KnowledgeGraph& Fixture(const Paths& p) {
  static const kg::KnowledgeGraph g = kg::LoadGraphFile(p.data + "/graph50.tsv", {});
  return g;
}

const pathlm::PathModel& FixtureModel(const Paths& p) {
  static const pathlm::PathModel m = [&] {
    sampler::SamplerConfig config;
    config.seed = 3;
    config.count = 20000;
    pathlm::TrainOptions options;
    options.seed = 1;
    return pathlm::PathModel::Train(sampler::SampleCorpus(Fixture(p), config), options);
  }();
  return m;
}

// Walks with at least `min_hops` hops and distinct endpoints.
std::vector<KnowledgePath> WalkPool(const kg::KnowledgeGraph& g, uint64_t seed, size_t want,
                                    size_t min_hops) {
  sampler::SamplerConfig config;
  config.seed = seed;
  config.count = want * 8;
  std::vector<KnowledgePath> out;
  for (auto& p : sampler::SampleCorpus(g, config)) {
    if (out.size() == want) break;
    if (p.Hops() >= min_hops && p.Head() != p.Tail()) out.push_back(std::move(p));
  }
  return out;
}

Outcome GraphSampler(const Paths& p) {
  Checker c;
  const auto start = std::chrono::steady_clock::now();
  const auto& g = Fixture(p);
  c.Expect(g.ConceptCount() == 50, "fixture has " + std::to_string(g.ConceptCount()) + " nodes");
  sampler::SamplerConfig config;
  config.seed = 20261019;
  config.count = kWalks;
  const auto corpus = sampler::SampleCorpus(g, config);
  c.Expect(corpus.size() == kWalks, "walk count");
  const auto excluded = kg::DefaultExcludedRelations();
  std::vector<double> histogram(static_cast<size_t>(config.max_hops) + 1, 0.0);
  for (const auto& path : corpus) {
    c.Expect(path.nodes.size() == path.relations.size() + 1 && path.Hops() >= 1,
             "alternation: " + path.ToLine());
    c.Expect(VerifyPath(g, path), "edge membership: " + path.ToLine());
    c.Expect(KnowledgePath::FromLine(path.ToLine()) == path, "line form: " + path.ToLine());
    for (const auto& r : path.relations) {
      c.Expect(!excluded.contains(r.name), "excluded relation " + r.name);
    }
    if (path.Hops() < histogram.size()) histogram[path.Hops()] += 1.0;
  }
  std::vector<double> observed(histogram.begin() + 1, histogram.end());
  std::vector<double> uniform(observed.size(), static_cast<double>(kWalks) / observed.size());
  const auto chi = oracle::ChiSquareTest(observed, uniform);
  c.Expect(chi.p_value > kChiSquareMinP, "chi-square p=" + Fmt(chi.p_value));
  // The walk-tree oracle agrees that lengths are uniform on this fixture.
  const auto exact = oracle::WalkLengthDistribution(g, config.max_hops, false);
  for (size_t k = 1; k < exact.size(); ++k) {
    c.Expect(std::abs(exact[k] - 1.0 / config.max_hops) < 1e-12, "oracle length " + std::to_string(k));
  }
  for (unsigned workers : {1u, 3u}) {
    std::ostringstream a, b;
    sampler::WriteCorpus(g, config, workers, a);
    sampler::WriteCorpus(g, config, workers, b);
    c.Expect(a.str() == b.str(), "rerun differs at workers=" + std::to_string(workers));
  }
  const double secs = Seconds(start);
  c.Expect(secs < kSamplerSeconds, "runtime " + Fmt(secs) + " s");
  c.Note("chi-square p=" + Fmt(chi.p_value) + ", " + Fmt(secs, 3) + " s");
  return c.Done();
}

Outcome Serialization(const Paths& p) {
  Checker c;
  const auto pool = WalkPool(Fixture(p), 404, kRoundTrips, 2);
  c.Expect(pool.size() == static_cast<size_t>(kRoundTrips), "pool size");
  Rng rng(405);
  pathlm::FormatOptions o;
  o.rng = &rng;
  int ok = 0;
  for (const auto& path : pool) {
    bool all = true;
    for (auto mode : {pathlm::SequenceMode::kHeadTail, pathlm::SequenceMode::kWillContain,
                      pathlm::SequenceMode::kOneEntity}) {
      const auto seq = pathlm::FormatSequence(path, mode, o);
      const auto back = pathlm::ParseSequenceFull(seq);
      all = all && back.path == path && pathlm::FormatSequence(back.path, mode, [&] {
              pathlm::FormatOptions again;
              again.wc_entities = back.wc_entities;
              return again;
            }()) == seq;
    }
    c.Expect(all, "round trip: " + path.ToLine());
    ok += all;
  }
  c.Note(std::to_string(ok) + "/" + std::to_string(pool.size()) + " paths x 3 modes");
  return c.Done();
}

bool ContainsAll(const KnowledgePath& path, const std::vector<std::string>& required) {
  for (const auto& r : required) {
    if (std::find(path.nodes.begin(), path.nodes.end(), r) == path.nodes.end()) return false;
  }
  return true;
}

Outcome ConstrainedDecoding(const Paths& p) {
  Checker c;
  const auto& model = FixtureModel(p);
  const auto pool = WalkPool(Fixture(p), 606, kDecodeInstances, 1);
  int wc_ok = 0, ht_ok = 0, wc_total = 0, ht_total = 0, brute = 0, brute_ok = 0;
  for (size_t i = 0; i < pool.size(); ++i) {
    const auto& walk = pool[i];
    const auto required = pathlm::DistinctIntermediates(walk);
    for (auto strategy : {pathlm::DecodeStrategy::kSample, pathlm::DecodeStrategy::kBeam}) {
      pathlm::DecodeConfig config;
      config.strategy = strategy;
      config.seed = MixSeed(607, i);
      config.num_samples = 2;
      const pathlm::PathQuery wc{pathlm::SequenceMode::kWillContain, walk.Head(), walk.Tail(), required};
      const pathlm::PathQuery ht{pathlm::SequenceMode::kHeadTail, walk.Head(), walk.Tail(), {}};
      for (const auto* q : {&wc, &ht}) {
        std::vector<KnowledgePath> out;
        try {
          out = pathlm::GeneratePath(model, *q, config);
        } catch (const Error& e) {
          c.Expect(false, walk.ToLine() + ": " + e.what());
        }
        for (const auto& g : out) {
          const bool ok = g.Head() == walk.Head() && g.Tail() == walk.Tail() &&
                          (q == &ht || ContainsAll(g, required));
          c.Expect(ok, "query " + walk.ToLine() + " gave " + g.ToLine());
          (q == &wc ? wc_ok : ht_ok) += ok;
          (q == &wc ? wc_total : ht_total) += 1;
        }
        c.Expect(!out.empty(), "no output for " + walk.ToLine());
      }
    }
    if (walk.Hops() * 2 + 1 <= static_cast<size_t>(kBruteForceMaxLen)) {
      pathlm::DecodeConfig config;
      config.strategy = pathlm::DecodeStrategy::kBeam;
      config.beam_width = kBruteForceBeam;
      config.max_len = kBruteForceMaxLen;
      const pathlm::PathQuery wc{pathlm::SequenceMode::kWillContain, walk.Head(), walk.Tail(), required};
      const auto beam = pathlm::GeneratePathsScored(model, wc, config);
      const auto all = oracle::EnumerateConstrained(model, wc, config.max_len, config.max_hops);
      const bool ok = !beam.empty() && !all.empty() && beam[0].path == all[0].path &&
                      std::abs(beam[0].log_prob - all[0].log_prob) <= kLogProbTolerance;
      c.Expect(ok, "brute force mismatch for " + walk.ToLine());
      ++brute;
      brute_ok += ok;
    }
  }
  c.Note("WC " + std::to_string(wc_ok) + "/" + std::to_string(wc_total) + ", HT " +
         std::to_string(ht_ok) + "/" + std::to_string(ht_total) + ", brute force " +
         std::to_string(brute_ok) + "/" + std::to_string(brute));
  c.Expect(brute > 0, "no short instances");
  return c.Done();
}

Outcome PerplexityAndFilters(const Paths& p) {
  Checker c;
  const auto& model = FixtureModel(p);
  const auto& g = Fixture(p);
  auto paths = WalkPool(g, 808, kPerplexityPaths / 2, 1);
  // Random token strings exercise the smoothed lower orders.
  Rng rng(809);
  const auto concepts = g.Concepts();
  std::vector<std::string> relations;
  for (size_t r = 0; r < g.RelationCount(); ++r) {
    relations.push_back(g.RelationToken(static_cast<kg::RelationId>(r)));
  }
  while (paths.size() < static_cast<size_t>(kPerplexityPaths)) {
    std::string line = concepts[UniformIndex(rng, concepts.size())];
    const size_t hops = 1 + UniformIndex(rng, 6);
    for (size_t h = 0; h < hops; ++h) {
      line += " " + relations[UniformIndex(rng, relations.size())] + " " +
              concepts[UniformIndex(rng, concepts.size())];
    }
    paths.push_back(KnowledgePath::FromLine(line));
  }
  double worst = 0.0;
  for (const auto& path : paths) {
    const double got = pathlm::PathPerplexity(model, path);
    const double want = oracle::Perplexity(model, path);
    const double rel = std::abs(got - want) / std::max(1.0, std::abs(want));
    worst = std::max(worst, rel);
    c.Expect(rel <= kPerplexityRelTolerance, "perplexity " + path.ToLine());
  }
  int sets_ok = 0;
  for (int k = 0; k < kFilterSets; ++k) {
    std::vector<pipeline::ScoredPath> cands;
    const size_t n = 1 + UniformIndex(rng, 10);
    for (size_t i = 0; i < n; ++i) {
      cands.push_back({paths[UniformIndex(rng, paths.size())], 1.0 + 20.0 * UniformUnit(rng)});
    }
    std::vector<std::string> gold;
    for (const auto& concept_name : concepts) {
      if (UniformUnit(rng) < 0.6) gold.push_back(concept_name);
    }
    pipeline::FilterOptions o;
    o.gold_entities = k % 3 == 0 ? nullptr : &gold;
    o.mean_basis = k % 2 ? pipeline::MeanBasis::kAfterRepetition : pipeline::MeanBasis::kAllCandidates;
    const auto got = pipeline::FilterPaths(cands, o);
    const auto want = oracle::NaiveFilter(cands, o.perplexity_factor, k % 2 == 1, o.gold_entities);
    bool same = got.size() == want.size();
    for (size_t i = 0; same && i < got.size(); ++i) {
      same = got[i].path == want[i].path && got[i].perplexity == want[i].perplexity;
    }
    c.Expect(same, "filter set " + std::to_string(k));
    sets_ok += same;
  }
  c.Note("max rel. perplexity error " + Fmt(worst, 3) + ", filters " + std::to_string(sets_ok) +
         "/" + std::to_string(kFilterSets));
  return c.Done();
}

Outcome FixedAnchors(const Paths&) {
  Checker c;
  const auto templates = pathlm::RelationTemplateTable::Defaults();
  c.Expect(pathlm::RenderText(KnowledgePath::FromLine("art_gallery UsedFor art"), templates) ==
               "art gallery is used for art",
           "render art_gallery");
  c.Expect(pathlm::RenderText(KnowledgePath::FromLine(
                                  "sand AtLocation beach _UsedFor walk _Desires puppy"),
                              templates) ==
               "sand is at location beach belongs to walk is desired by puppy",
           "render sand..puppy");
  const std::string r = "the chef trained in florence. the pasta tastes nice here.";
  auto at = [&](const std::string& piece) {
    const size_t s = r.find(piece);
    return augment::Span{piece, s, s + piece.size()};
  };
  std::vector<augment::SrlFrame> frames(2);
  frames[0].predicate = at("trained");
  frames[0].arguments = {at("the chef"), at("in florence")};
  frames[1].predicate = at("tastes");
  frames[1].arguments = {at("the pasta"), at("nice"), at("here")};
  c.Expect(augment::CreateTarget(r, frames) == std::optional<std::string>("the pasta tastes nice here."),
           "create_target");
  const std::set<std::string> seven{"RelatedTo", "Synonym", "Antonym", "DerivedFrom", "FormOf",
                                    "EtymologicallyDerivedFrom", "EtymologicallyRelatedTo"};
  c.Expect(kg::DefaultExcludedRelations() == seven, "exclusion set");
  const pathlm::DecodeConfig decode;
  c.Expect(decode.temperature == 0.7 && decode.top_p == 0.9, "decode defaults");
  c.Expect(decode.max_hops == 6 && sampler::SamplerConfig{}.max_hops == 6, "K_max default");
  const augment::AugmentConfig aug;
  c.Expect(aug.threshold == 0.7 && aug.max_history == 2, "augment defaults");
  c.Note("10 anchors");
  return c.Done();
}

// Answers every request with a fixed sentence about the requested target.
class TemplateResponder : public tcmetric::ResponseGenerator {
 public:
  std::vector<std::optional<std::string>> Generate(
      const std::vector<std::pair<std::string, std::string>>& ct) override {
    std::vector<std::optional<std::string>> out;
    for (const auto& [context, target] : ct) out.emplace_back("well, " + target);
    return out;
  }
};

int Mechanism(tcmetric::Provenance p) {
  switch (p) {
    case tcmetric::Provenance::kRandSwapContext:
    case tcmetric::Provenance::kRandSwapTarget:
    case tcmetric::Provenance::kRandSwapResponse: return 1;
    case tcmetric::Provenance::kGenRandomTarget: return 2;
    case tcmetric::Provenance::kSameTargetOtherContext: return 3;
    default: return 0;
  }
}

Outcome TcSynthesis(const Paths& p) {
  Checker c;
  std::ifstream in(p.data + "/tc20.jsonl");
  const auto data = pipeline::ReadInstances(in);
  c.Expect(data.size() == 20, "fixture size");
  TemplateResponder gen;
  tcmetric::SynthConfig config;
  config.max_per_mechanism = kMaxPerMechanism;
  config.seed = 2026;
  const auto synth = tcmetric::SynthesizeNegatives(data, &gen, config);
  std::map<std::pair<size_t, int>, int> per;
  std::map<size_t, tcmetric::LabeledTriple> gold;
  for (const auto& t : synth.triples) {
    if (t.label == tcmetric::Label::kPositive) gold[t.source] = t;
  }
  int mech[4] = {0, 0, 0, 0};
  for (const auto& t : synth.triples) {
    if (t.label == tcmetric::Label::kPositive) continue;
    const int m = Mechanism(t.provenance);
    ++per[{t.source, m}];
    ++mech[m];
    if (m == 1) c.Expect(oracle::FieldDiff(t, gold.at(t.source)) == 1, "field diff");
  }
  for (const auto& [key, n] : per) {
    c.Expect(n <= kMaxPerMechanism, "instance " + std::to_string(key.first) + " mechanism " +
                                        std::to_string(key.second) + " has " + std::to_string(n));
  }
  c.Expect(mech[1] > 0 && mech[2] > 0 && mech[3] > 0, "a mechanism produced nothing");
  const auto balanced = tcmetric::Balance(synth.triples, 2027);
  size_t pos = 0, neg = 0;
  for (const auto& t : balanced) (t.label == tcmetric::Label::kPositive ? pos : neg)++;
  c.Expect(pos == neg, "balance " + std::to_string(pos) + " vs " + std::to_string(neg));
  c.Note("negatives by mechanism " + std::to_string(mech[1]) + "/" + std::to_string(mech[2]) + "/" +
         std::to_string(mech[3]) + ", balanced " + std::to_string(pos) + "+" + std::to_string(neg));
  return c.Done();
}

std::string RandomSentence(Rng& rng) {
  static const char* kWords[] = {"the", "cat", "dog", "sat", "on", "mat", "a", "ran", "far", "home"};
  const size_t n = 1 + UniformIndex(rng, 10);
  std::string s;
  for (size_t i = 0; i < n; ++i) s += std::string(i ? " " : "") + kWords[UniformIndex(rng, 10)];
  return s;
}

// Classical tie-corrected rank formula:
//   rho = (Sx + Sy - sum d^2) / (2 sqrt(Sx Sy)),
//   Sx = (n^3 - n)/12 - sum over tie groups (t^3 - t)/12.
double TieFormula(const std::vector<double>& xs, const std::vector<double>& ys) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
      double less = 0, equal = 0;
      for (double w : v) {
        less += w < v[i];
        equal += w == v[i];
      }
      r[i] = less + (equal + 1) / 2.0;
    }
    return r;
  };
  auto ties = [](const std::vector<double>& v) {
    std::map<double, double> groups;
    for (double w : v) groups[w] += 1;
    double t = 0;
    for (const auto& [k, n] : groups) t += (n * n * n - n) / 12.0;
    return t;
  };
  const double n = static_cast<double>(xs.size());
  const auto rx = ranks(xs), ry = ranks(ys);
  double d2 = 0;
  for (size_t i = 0; i < xs.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  const double sx = (n * n * n - n) / 12.0 - ties(xs);
  const double sy = (n * n * n - n) / 12.0 - ties(ys);
  return (sx + sy - d2) / (2.0 * std::sqrt(sx * sy));
}

Outcome Metrics(const Paths&) {
  Checker c;
  Rng rng(1234);
  double worst = 0.0;
  for (int k = 0; k < kMetricCases; ++k) {
    std::vector<evalkit::BleuCase> corpus;
    std::vector<std::vector<std::string>> hyps;
    std::vector<std::vector<std::vector<std::string>>> refs;
    const size_t n = 1 + UniformIndex(rng, 4);
    for (size_t i = 0; i < n; ++i) {
      evalkit::BleuCase bc{RandomSentence(rng), {}};
      const size_t nr = 1 + UniformIndex(rng, 3);
      for (size_t r = 0; r < nr; ++r) bc.references.push_back(RandomSentence(rng));
      hyps.push_back(text::MetricTokens(bc.hypothesis));
      refs.emplace_back();
      for (const auto& r : bc.references) refs.back().push_back(text::MetricTokens(r));
      corpus.push_back(bc);
    }
    const double db = std::abs(evalkit::Bleu(corpus) - oracle::Bleu(hyps, refs));
    const double dr = std::abs(evalkit::RougeL(corpus[0].hypothesis, corpus[0].references) -
                               oracle::RougeL(hyps[0], refs[0]));
    worst = std::max({worst, db, dr});
    c.Expect(db <= kMetricTolerance, "bleu case " + std::to_string(k));
    c.Expect(dr <= kMetricTolerance, "rouge case " + std::to_string(k));
  }
  c.Expect(evalkit::Spearman({1, 2, 3, 4, 5}, {2, 4, 8, 16, 32}) == 1.0, "spearman +1");
  c.Expect(evalkit::Spearman({1, 2, 3, 4, 5}, {9, 7, 5, 3, 1}) == -1.0, "spearman -1");
  double worst_tie = 0.0;
  for (int k = 0; k < 20; ++k) {
    std::vector<double> xs, ys;
    const size_t n = 4 + UniformIndex(rng, 8);
    for (size_t i = 0; i < n; ++i) {
      xs.push_back(static_cast<double>(UniformIndex(rng, 4)));
      ys.push_back(static_cast<double>(UniformIndex(rng, 4)));
    }
    try {
      const double d = std::abs(evalkit::Spearman(xs, ys) - TieFormula(xs, ys));
      worst_tie = std::max(worst_tie, d);
      c.Expect(d <= kSpearmanTieTolerance, "tie case " + std::to_string(k));
    } catch (const Error& e) {
      c.Expect(e.kind() == ErrorKind::kDegenerateInput, "tie case error");
    }
  }
  std::vector<evalkit::EvalInstance> probe;
  for (int i = 0; i < 10; ++i) {
    evalkit::EvalInstance e;
    e.context = {"hello there", RandomSentence(rng)};
    e.target = RandomSentence(rng);
    e.references = {RandomSentence(rng), RandomSentence(rng), RandomSentence(rng)};
    probe.push_back(e);
  }
  bool probe_ok = true;
  for (const auto& [name, metric] :
       std::vector<std::pair<std::string, evalkit::CorpusMetric>>{{"bleu", evalkit::Bleu},
                                                                 {"rouge_l", evalkit::MeanRougeL}}) {
    const auto result = evalkit::BiasProbe(probe, metric);
    std::vector<evalkit::BleuCase> t, ctx, ref;
    for (const auto& e : probe) {
      const std::vector<std::string> rest(e.references.begin() + 1, e.references.end());
      t.push_back({e.target, rest});
      ctx.push_back({e.context.back(), rest});
      ref.push_back({e.references.front(), rest});
    }
    probe_ok = probe_ok && result.rows.size() == 3 && result.rows[0].score == metric(t) &&
               result.rows[1].score == metric(ctx) && result.rows[2].score == metric(ref);
  }
  c.Expect(probe_ok, "bias probe");
  c.Note("max metric error " + Fmt(worst, 3) + ", max tie error " + Fmt(worst_tie, 3));
  return c.Done();
}

std::string Quote(const std::string& s) {
  std::string out = "'";
  for (char ch : s) out += ch == '\'' ? std::string("'\\''") : std::string(1, ch);
  return out + "'";
}

int Shell(const std::vector<std::string>& args, const std::string& log) {
  std::string cmd;
  for (const auto& a : args) cmd += (cmd.empty() ? "" : " ") + Quote(a);
  cmd += " >>" + Quote(log) + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return rc == -1 ? -1 : WEXITSTATUS(rc);
}

Outcome EndToEnd(const Paths& p) {
  Checker c;
  const fs::path work = fs::path(p.work) / "e2e";
  fs::remove_all(work);
  fs::create_directories(work);
  const std::string log = (work / "log.txt").string();
  auto w = [&](const std::string& name) { return (work / name).string(); };
  const std::vector<std::vector<std::string>> steps{
      {p.cli, "ingest", "--assertions", p.data + "/graph50.tsv", "--out", w("graph.bin")},
      {p.cli, "sample-paths", "--graph", w("graph.bin"), "--count", "20000", "--seed", "3",
       "--out", w("paths.txt")},
      {p.cli, "train-pathlm", "--paths", w("paths.txt"), "--seed", "1", "--out", w("model.json")},
      {p.cli, "prep-crg", "--model", w("model.json"), "--graph", w("graph.bin"), "--idf",
       p.data + "/idf.tsv", "--instances", p.data + "/instances.jsonl", "--phase", "infer",
       "--seed", "5", "--out", w("crg_infer.jsonl")},
      {p.cli, "prep-crg", "--model", w("model.json"), "--graph", w("graph.bin"), "--idf",
       p.data + "/idf.tsv", "--instances", p.data + "/instances.jsonl", "--phase", "train",
       "--q", "50", "--seed", "5", "--out", w("crg_train.jsonl")},
  };
  const auto start = std::chrono::steady_clock::now();
  for (const auto& s : steps) c.Expect(Shell(s, log) == 0, s[1] + " failed (see " + log + ")");
  const double secs = Seconds(start);
  c.Expect(secs < kEndToEndSeconds, "runtime " + Fmt(secs) + " s");

  std::map<std::string, pipeline::TransitionInstance> by_id;
  {
    std::ifstream in(p.data + "/instances.jsonl");
    for (auto& inst : pipeline::ReadInstances(in)) by_id[inst.id] = inst;
  }
  const auto templates = pathlm::RelationTemplateTable::Defaults();
  size_t records = 0;
  for (const std::string name : {"crg_infer.jsonl", "crg_train.jsonl"}) {
    const bool train = name == "crg_train.jsonl";
    std::istringstream lines(Slurp(w(name)));
    std::string line;
    size_t here = 0;
    while (std::getline(lines, line)) {
      const auto j = nlohmann::json::parse(line);
      const auto& inst = by_id.at(j.at("id").get<std::string>());
      const std::string text = pathlm::RenderText(KnowledgePath::FromLine(j.at("path").get<std::string>()), templates);
      std::string want = text + " [target] " + inst.target + " [context] " +
                         text::Join(inst.context, " [sep] ");
      if (train) want += " [response] " + *inst.response;
      c.Expect(j.at("crg_sequence").get<std::string>() == want, "segment order in " + name);
      ++here;
    }
    c.Expect(here > 0, name + " is empty");
    records += here;
  }

  size_t replayed = 0;
  for (const std::string out : {"graph.bin", "paths.txt", "model.json", "crg_infer.jsonl",
                                "crg_train.jsonl"}) {
    const std::string before = Slurp(w(out));
    fs::remove(w(out));
    const int rc = Shell({p.cli, "replay", "--manifest", w(out) + ".manifest.json", "--check"}, log);
    const bool same = rc == 0 && Slurp(w(out)) == before;
    c.Expect(same, "replay of " + out);
    replayed += same;
  }
  c.Note(std::to_string(records) + " records, " + Fmt(secs, 3) + " s, " + std::to_string(replayed) +
         "/5 byte-identical replays");
  return c.Done();
}

// Counts bytes without storing them.
class NullBuffer : public std::streambuf {
 protected:
  int overflow(int c) override { return c; }
  std::streamsize xsputn(const char*, std::streamsize n) override { return n; }
};

Outcome Throughput(const Paths&) {
  Checker c;
  Rng rng(99);
  const size_t nodes = 20000;
  const std::vector<std::string> relations{"IsA", "AtLocation", "UsedFor", "PartOf", "HasA",
                                           "CapableOf", "Desires", "Causes", "HasProperty",
                                           "MadeOf"};
  std::set<std::tuple<size_t, size_t, size_t>> seen;
  std::string tsv;
  while (seen.size() < kSyntheticEdges) {
    const size_t r = UniformIndex(rng, relations.size());
    const size_t h = UniformIndex(rng, nodes), t = UniformIndex(rng, nodes);
    if (h == t || !seen.insert({r, h, t}).second) continue;
    tsv += relations[r] + "\tc" + std::to_string(h) + "\tc" + std::to_string(t) + "\n";
  }
  std::istringstream in(tsv);
  const auto g = kg::LoadGraph(in, {});
  sampler::SamplerConfig config;
  config.seed = 7;
  config.count = 400000;
  NullBuffer null;
  std::ostream sink(&null);
  auto rate = [&](unsigned workers) {
    const auto start = std::chrono::steady_clock::now();
    sampler::WriteCorpus(g, config, workers, sink);
    return static_cast<double>(config.count) / Seconds(start);
  };
  rate(1);  // warm-up
  const double one = rate(1);
  const double four = rate(4);
  const double scaling = four / one;
  c.Expect(one >= kMinWalksPerSecond, "single worker " + Fmt(one, 6) + " walks/s");
  c.Expect(scaling >= kMinScaling, "4-worker scaling " + Fmt(scaling, 3) + "x");
  c.Note(std::to_string(g.EdgeCount()) + " edges incl. inverses, 1 worker " + Fmt(one, 6) +
         " walks/s, 4 workers " + Fmt(four, 6) + " walks/s (" + Fmt(scaling, 3) + "x), " +
         std::to_string(std::thread::hardware_concurrency()) + " hardware threads");
  return c.Done();
}

}  // namespace
}  // namespace pathbridge

int main(int argc, char** argv) {
  using namespace pathbridge;
  CLI::App app{"pathbridge acceptance gate"};
  Paths paths;
  std::vector<int> only;
  app.add_option("--data", paths.data, "Fixture directory")->required();
  app.add_option("--cli", paths.cli, "pathbridge executable")->required();
  app.add_option("--work", paths.work, "Scratch directory")->required();
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(paths.work);

  const std::vector<std::pair<std::string, std::function<Outcome(const Paths&)>>> criteria{
      {"graph and sampler", GraphSampler},
      {"sequence round trip", Serialization},
      {"constrained decoding", ConstrainedDecoding},
      {"perplexity and filters", PerplexityAndFilters},
      {"fixed anchors", FixedAnchors},
      {"coherence data synthesis", TcSynthesis},
      {"metrics", Metrics},
      {"end to end", EndToEnd},
      {"throughput", Throughput},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second(paths);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << criteria[i].first
              << "): " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
