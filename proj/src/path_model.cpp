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

#include "pathbridge/path_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pathbridge/error.hpp"
#include "pathbridge/rng.hpp"
#include "pathbridge/subprocess.hpp"
#include "pathbridge/text.hpp"

namespace pathbridge {
namespace pathlm {

namespace {

constexpr std::string_view kModelFormat = "pathbridge.pathlm";
constexpr int kModelVersion = 1;

uint64_t Fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::vector<std::vector<std::string>> TrainingSequences(const KnowledgePath& path,
                                                        const TrainOptions& options) {
  std::vector<std::vector<std::string>> out;
  out.push_back(SequenceTokens(path, {}));
  auto inner = DistinctIntermediates(path);
  if (inner.empty()) return out;
  Rng rng(MixSeed(options.seed, Fnv1a(path.ToLine())));
  Shuffle(std::span<std::string>(inner), rng);
  out.push_back(SequenceTokens(path, inner));
  if (options.include_one_entity && inner.size() > 1) {
    out.push_back(SequenceTokens(path, {inner.front()}));
  }
  return out;
}

size_t PathModel::KeyHash::operator()(const std::vector<TokenId>& key) const {
  uint64_t h = 0x84222325cbf29ce4ULL;
  for (TokenId t : key) {
    h ^= t + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<size_t>(h);
}

void PathModel::Index() {
  for (std::string_view m : {kBeginToken, kEndToken, kTargetToken, kSepToken, kWcToken}) {
    if (!std::binary_search(vocab_.begin(), vocab_.end(), m)) {
      vocab_.insert(std::lower_bound(vocab_.begin(), vocab_.end(), m), std::string(m));
    }
  }
  index_.clear();
  kind_.assign(vocab_.size(), Kind::kConcept);
  concept_ids_.clear();
  relation_ids_.clear();
  for (TokenId i = 0; i < vocab_.size(); ++i) {
    const std::string& tok = vocab_[i];
    index_.emplace(tok, i);
    if (tok == kBeginToken || tok == kEndToken) {
      kind_[i] = Kind::kMarker;
    } else if (tok == kTargetToken || tok == kSepToken || tok == kWcToken) {
      kind_[i] = Kind::kSpecial;
    } else if (IsRelationToken(tok)) {
      kind_[i] = Kind::kRelation;
      relation_ids_.push_back(i);
    } else {
      concept_ids_.push_back(i);
    }
  }
  begin_id_ = index_.at(std::string(kBeginToken));
  end_id_ = index_.at(std::string(kEndToken));
  ngrams_.assign(static_cast<size_t>(order_), {});
  contexts_.assign(static_cast<size_t>(order_), {});
}

void PathModel::AddSequence(const std::vector<TokenId>& padded) {
  const size_t start = static_cast<size_t>(order_ - 1);
  std::vector<TokenId> key;
  for (size_t i = start; i < padded.size(); ++i) {
    for (int k = 1; k <= order_; ++k) {
      key.assign(padded.begin() + static_cast<std::ptrdiff_t>(i + 1 - k),
                 padded.begin() + static_cast<std::ptrdiff_t>(i));
      ++contexts_[k - 1][key];
      key.push_back(padded[i]);
      ++ngrams_[k - 1][key];
    }
  }
}

PathModel PathModel::Train(std::span<const KnowledgePath> corpus, const TrainOptions& options) {
  if (corpus.empty()) throw Error(ErrorKind::kEmptyCorpus, "no training paths");
  if (options.order < 2) throw Error(ErrorKind::kInvalidArgument, "order must be >= 2");
  if (!(options.smoothing > 0.0)) throw Error(ErrorKind::kInvalidArgument, "smoothing must be > 0");

  std::vector<std::vector<std::string>> sequences;
  std::set<std::string> tokens;
  for (const auto& path : corpus) {
    if (!path.WellFormed()) throw Error(ErrorKind::kInvalidArgument, "malformed training path");
    for (auto& seq : TrainingSequences(path, options)) {
      tokens.insert(seq.begin(), seq.end());
      sequences.push_back(std::move(seq));
    }
  }

  PathModel model;
  model.order_ = options.order;
  model.smoothing_ = options.smoothing;
  model.vocab_.assign(tokens.begin(), tokens.end());
  model.Index();

  std::vector<TokenId> padded;
  for (const auto& seq : sequences) {
    padded.assign(static_cast<size_t>(model.order_ - 1), model.begin_id_);
    for (const auto& tok : seq) padded.push_back(model.index_.at(tok));
    padded.push_back(model.end_id_);
    model.AddSequence(padded);
  }
  return model;
}

PathModel PathModel::FromCounts(
    int order, double smoothing, const std::vector<std::string>& vocabulary,
    const std::vector<std::pair<std::vector<std::string>, uint64_t>>& counts) {
  if (order < 2) throw Error(ErrorKind::kInvalidArgument, "order must be >= 2");
  if (!(smoothing > 0.0)) throw Error(ErrorKind::kInvalidArgument, "smoothing must be > 0");
  PathModel model;
  model.order_ = order;
  model.smoothing_ = smoothing;
  std::set<std::string> sorted(vocabulary.begin(), vocabulary.end());
  model.vocab_.assign(sorted.begin(), sorted.end());
  model.Index();
  for (const auto& [ngram, count] : counts) {
    if (ngram.empty() || static_cast<int>(ngram.size()) > order) {
      throw Error(ErrorKind::kFormat, "n-gram order out of range");
    }
    std::vector<TokenId> key;
    for (const auto& tok : ngram) {
      const auto id = model.Id(tok);
      if (!id) throw Error(ErrorKind::kFormat, "n-gram token outside vocabulary: " + tok);
      key.push_back(*id);
    }
    const size_t k = key.size();
    model.ngrams_[k - 1][key] += count;
    key.pop_back();
    model.contexts_[k - 1][key] += count;
  }
  return model;
}

std::optional<TokenId> PathModel::Id(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool PathModel::KnowsConcept(std::string_view token) const {
  const auto id = Id(token);
  return id && IsConcept(*id);
}

uint64_t PathModel::Count(std::span<const std::string> ngram) const {
  if (ngram.empty() || static_cast<int>(ngram.size()) > order_) return 0;
  std::vector<TokenId> key;
  for (const auto& tok : ngram) {
    const auto id = Id(tok);
    if (!id) return 0;
    key.push_back(*id);
  }
  const auto& table = ngrams_[ngram.size() - 1];
  const auto it = table.find(key);
  return it == table.end() ? 0 : it->second;
}

double PathModel::ProbabilityAtOrder(std::span<const TokenId> context, TokenId next,
                                     int k) const {
  const double pseudo = smoothing_ * static_cast<double>(PredictableSize());
  double p = 1.0 / static_cast<double>(PredictableSize());
  std::vector<TokenId> key;
  key.reserve(static_cast<size_t>(k));
  for (int level = 1; level <= k; ++level) {
    key.assign(context.end() - (level - 1), context.end());
    const auto ctx_it = contexts_[level - 1].find(key);
    const double ctx_count = ctx_it == contexts_[level - 1].end() ? 0.0 : static_cast<double>(ctx_it->second);
    key.push_back(next);
    const auto it = ngrams_[level - 1].find(key);
    const double count = it == ngrams_[level - 1].end() ? 0.0 : static_cast<double>(it->second);
    p = (count + pseudo * p) / (ctx_count + pseudo);
  }
  return p;
}

double PathModel::Probability(std::span<const TokenId> history, TokenId next) const {
  if (next == begin_id_ || next >= vocab_.size()) return 0.0;
  const size_t need = static_cast<size_t>(order_ - 1);
  if (history.size() >= need) {
    return ProbabilityAtOrder(history.subspan(history.size() - need), next, order_);
  }
  std::vector<TokenId> padded(need - history.size(), begin_id_);
  padded.insert(padded.end(), history.begin(), history.end());
  return ProbabilityAtOrder(padded, next, order_);
}

std::string PathModel::ToJson() const {
  nlohmann::json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["order"] = order_;
  j["smoothing"] = smoothing_;
  j["vocabulary"] = vocab_;
  nlohmann::json grams = nlohmann::json::array();
  for (int k = 1; k <= order_; ++k) {
    std::vector<std::pair<std::vector<TokenId>, uint64_t>> sorted(ngrams_[k - 1].begin(),
                                                                  ngrams_[k - 1].end());
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [key, count] : sorted) {
      nlohmann::json toks = nlohmann::json::array();
      for (TokenId t : key) toks.push_back(vocab_[t]);
      grams.push_back(nlohmann::json::array({toks, count}));
    }
  }
  j["ngrams"] = std::move(grams);
  return j.dump();
}

PathModel PathModel::FromJson(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("model json: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kModelFormat) {
      throw Error(ErrorKind::kFormat, "not a path model file");
    }
    if (j.at("version").get<int>() != kModelVersion) {
      throw Error(ErrorKind::kFormat, "unsupported model version");
    }
    std::vector<std::pair<std::vector<std::string>, uint64_t>> counts;
    for (const auto& g : j.at("ngrams")) {
      counts.emplace_back(g.at(0).get<std::vector<std::string>>(), g.at(1).get<uint64_t>());
    }
    return FromCounts(j.at("order").get<int>(), j.at("smoothing").get<double>(),
                      j.at("vocabulary").get<std::vector<std::string>>(), counts);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("model json: ") + e.what());
  }
}

void PathModel::Save(std::ostream& out) const {
  out << ToJson() << '\n';
  if (!out) throw Error(ErrorKind::kIo, "failed writing model");
}

PathModel PathModel::Load(std::istream& in) {
  std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return FromJson(body);
}

PathModel PathModel::LoadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  return Load(in);
}

PathModel TrainPathModel(std::span<const KnowledgePath> corpus, int order, double smoothing,
                         uint64_t seed) {
  TrainOptions options;
  options.order = order;
  options.smoothing = smoothing;
  options.seed = seed;
  return PathModel::Train(corpus, options);
}

double PathPerplexity(const PathModel& model, const KnowledgePath& path) {
  if (!path.WellFormed()) throw Error(ErrorKind::kInvalidArgument, "malformed path");
  std::vector<TokenId> history(static_cast<size_t>(model.order() - 1), model.begin_id());
  std::vector<TokenId> targets;
  for (const auto& tok : SequenceTokens(path, {})) {
    const auto id = model.Id(tok);
    if (!id) throw Error(ErrorKind::kUnknownConcept, tok);
    targets.push_back(*id);
  }
  targets.push_back(model.end_id());
  double nll = 0.0;
  for (TokenId t : targets) {
    nll -= std::log(model.Probability(history, t));
    history.push_back(t);
  }
  return std::exp(nll / static_cast<double>(targets.size()));
}

void DecodeConfig::Validate() const {
  if (!(temperature > 0.0)) throw Error(ErrorKind::kInvalidArgument, "temperature must be > 0");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw Error(ErrorKind::kInvalidArgument, "top_p must be in (0,1]");
  if (beam_width < 1) throw Error(ErrorKind::kInvalidArgument, "beam_width must be >= 1");
  if (num_samples < 1) throw Error(ErrorKind::kInvalidArgument, "num_samples must be >= 1");
  if (max_hops < 1) throw Error(ErrorKind::kInvalidArgument, "max_hops must be >= 1");
}

namespace {

struct Hypothesis {
  std::vector<TokenId> history;  // padding + prefix + body
  std::vector<TokenId> body;
  double log_prob = 0.0;
  uint64_t remaining = 0;  // bit i set: required[i] not yet on the path
  int hops = 0;
};

class ConstrainedDecoder {
 public:
  ConstrainedDecoder(const PathModel& model, const PathQuery& query, const DecodeConfig& config)
      : model_(model), config_(config) {
    config.Validate();
    head_ = ConceptId(query.head);
    tail_ = ConceptId(query.tail);
    std::vector<TokenId> prefix_entities;
    for (const auto& e : query.required) {
      const TokenId id = ConceptId(e);
      if (std::find(prefix_entities.begin(), prefix_entities.end(), id) != prefix_entities.end()) {
        continue;
      }
      prefix_entities.push_back(id);
      if (id != head_ && id != tail_) required_.push_back(id);
    }
    if (query.mode == SequenceMode::kHeadTail && !prefix_entities.empty()) {
      throw Error(ErrorKind::kInvalidArgument, "HT query with required entities");
    }
    if (query.mode == SequenceMode::kOneEntity && prefix_entities.size() != 1) {
      throw Error(ErrorKind::kInvalidArgument, "ONEENT query needs exactly one entity");
    }
    if (required_.size() > 63) throw Error(ErrorKind::kInvalidArgument, "too many required entities");
    max_hops_ = std::min(config.max_hops, (config.max_len - 1) / 2);

    init_.history.assign(static_cast<size_t>(model.order() - 1), model.begin_id());
    for (TokenId e : prefix_entities) {
      init_.history.push_back(*model.Id(kWcToken));
      init_.history.push_back(e);
    }
    init_.history.push_back(*model.Id(kTargetToken));
    init_.history.push_back(tail_);
    init_.history.push_back(*model.Id(kSepToken));
    init_.history.push_back(head_);
    init_.body.push_back(head_);
    init_.remaining = required_.empty() ? 0 : (~uint64_t{0} >> (64 - required_.size()));
  }

  bool Feasible() const {
    return max_hops_ >= 1 && static_cast<int>(required_.size()) <= max_hops_ - 1;
  }

  std::vector<GeneratedPath> Beam() const {
    std::vector<Hypothesis> beams{init_};
    std::vector<Hypothesis> finished;
    std::vector<std::pair<TokenId, double>> options;
    while (!beams.empty()) {
      std::vector<Hypothesis> next;
      for (const auto& hyp : beams) {
        Options(hyp, options);
        for (const auto& [tok, p] : options) {
          Hypothesis h = Extend(hyp, tok, p);
          if (tok == tail_ && IsConceptStep(hyp)) {
            finished.push_back(std::move(h));
          } else {
            next.push_back(std::move(h));
          }
        }
      }
      std::sort(next.begin(), next.end(), Better);
      if (next.size() > static_cast<size_t>(config_.beam_width)) {
        next.resize(static_cast<size_t>(config_.beam_width));
      }
      beams = std::move(next);
    }
    std::sort(finished.begin(), finished.end(), Better);
    std::vector<GeneratedPath> out;
    for (const auto& h : finished) {
      if (out.size() == static_cast<size_t>(config_.num_samples)) break;
      out.push_back(ToGenerated(h));
    }
    return out;
  }

  std::vector<GeneratedPath> Sample() const {
    Rng rng(config_.seed);
    std::vector<GeneratedPath> out;
    std::set<std::vector<TokenId>> seen;
    const int attempts = config_.num_samples * 4 + 16;
    std::vector<std::pair<TokenId, double>> options;
    for (int a = 0; a < attempts && out.size() < static_cast<size_t>(config_.num_samples); ++a) {
      Hypothesis hyp = init_;
      bool done = false;
      while (!done) {
        const bool concept_step = IsConceptStep(hyp);
        Options(hyp, options);
        if (options.empty()) break;
        const auto [tok, p] = Draw(options, rng);
        hyp = Extend(hyp, tok, p);
        done = concept_step && tok == tail_;
      }
      if (done && seen.insert(hyp.body).second) out.push_back(ToGenerated(hyp));
    }
    return out;
  }

 private:
  TokenId ConceptId(const std::string& token) const {
    const auto id = model_.Id(token);
    if (!id || !model_.IsConcept(*id)) throw Error(ErrorKind::kUnknownConcept, token);
    return *id;
  }

  static bool IsConceptStep(const Hypothesis& h) { return h.body.size() % 2 == 0; }

  static bool Better(const Hypothesis& a, const Hypothesis& b) {
    if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
    return a.body < b.body;
  }

  // Grammar- and constraint-allowed continuations with model probabilities.
  void Options(const Hypothesis& h, std::vector<std::pair<TokenId, double>>& out) const {
    out.clear();
    if (!IsConceptStep(h)) {
      if (h.hops >= max_hops_) return;
      for (TokenId r : model_.RelationIds()) out.emplace_back(r, model_.Probability(h.history, r));
      return;
    }
    const int hop = h.hops;  // relations emitted so far, this node included
    for (TokenId c : model_.ConceptIds()) {
      bool ok;
      if (c == tail_) {
        ok = h.remaining == 0;
      } else {
        uint64_t left = h.remaining;
        for (size_t i = 0; i < required_.size(); ++i) {
          if (required_[i] == c) left &= ~(uint64_t{1} << i);
        }
        ok = hop < max_hops_ && std::popcount(left) <= max_hops_ - hop - 1;
      }
      if (ok) out.emplace_back(c, model_.Probability(h.history, c));
    }
  }

  Hypothesis Extend(const Hypothesis& h, TokenId tok, double p) const {
    Hypothesis n = h;
    const bool concept_step = IsConceptStep(h);
    n.history.push_back(tok);
    n.body.push_back(tok);
    n.log_prob += std::log(p);
    if (concept_step) {
      for (size_t i = 0; i < required_.size(); ++i) {
        if (required_[i] == tok) n.remaining &= ~(uint64_t{1} << i);
      }
      if (tok == tail_) n.log_prob += std::log(model_.Probability(n.history, model_.end_id()));
    } else {
      ++n.hops;
    }
    return n;
  }

  std::pair<TokenId, double> Draw(const std::vector<std::pair<TokenId, double>>& options,
                                  Rng& rng) const {
    std::vector<std::pair<double, size_t>> weights;
    weights.reserve(options.size());
    double max_logit = -INFINITY;
    for (const auto& o : options) max_logit = std::max(max_logit, std::log(o.second) / config_.temperature);
    double total = 0.0;
    for (size_t i = 0; i < options.size(); ++i) {
      const double w = std::exp(std::log(options[i].second) / config_.temperature - max_logit);
      weights.emplace_back(w, i);
      total += w;
    }
    std::sort(weights.begin(), weights.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return options[a.second].first < options[b.second].first;
    });
    double kept = 0.0;
    size_t nucleus = 0;
    while (nucleus < weights.size()) {
      kept += weights[nucleus].first;
      ++nucleus;
      if (kept >= config_.top_p * total) break;
    }
    double u = UniformUnit(rng) * kept;
    for (size_t i = 0; i < nucleus; ++i) {
      u -= weights[i].first;
      if (u < 0.0) return options[weights[i].second];
    }
    return options[weights[nucleus - 1].second];
  }

  GeneratedPath ToGenerated(const Hypothesis& h) const {
    GeneratedPath g;
    g.log_prob = h.log_prob;
    for (size_t i = 0; i < h.body.size(); ++i) {
      if (i % 2 == 0) {
        g.path.nodes.push_back(model_.Token(h.body[i]));
      } else {
        g.path.relations.push_back(kg::Relation::FromToken(model_.Token(h.body[i])));
      }
    }
    return g;
  }

  const PathModel& model_;
  const DecodeConfig& config_;
  TokenId head_ = 0;
  TokenId tail_ = 0;
  std::vector<TokenId> required_;
  int max_hops_ = 0;
  Hypothesis init_;
};

}  // namespace

std::vector<GeneratedPath> GeneratePathsScored(const PathModel& model, const PathQuery& query,
                                               const DecodeConfig& config) {
  const ConstrainedDecoder decoder(model, query, config);
  if (!decoder.Feasible()) {
    throw Error(ErrorKind::kNoPathFound, "constraints cannot fit in the hop budget");
  }
  auto out = config.strategy == DecodeStrategy::kBeam ? decoder.Beam() : decoder.Sample();
  if (out.empty()) throw Error(ErrorKind::kNoPathFound, query.head + " -> " + query.tail);
  return out;
}

std::vector<KnowledgePath> GeneratePath(const PathModel& model, const PathQuery& query,
                                        const DecodeConfig& config) {
  std::vector<KnowledgePath> out;
  for (auto& g : GeneratePathsScored(model, query, config)) out.push_back(std::move(g.path));
  return out;
}

std::string FormatQueryLine(const PathQuery& query) {
  if (query.mode == SequenceMode::kHeadTail) return "HT\t" + query.head + "\t" + query.tail;
  return "WC\t" + query.head + "\t" + query.tail + "\t" + text::Join(query.required, ",");
}

PathQuery ParseQueryLine(std::string_view line) {
  const auto fields = text::Split(line, '\t');
  PathQuery q;
  if (fields.size() == 3 && fields[0] == "HT") {
    q.mode = SequenceMode::kHeadTail;
  } else if (fields.size() == 4 && fields[0] == "WC") {
    for (const auto& e : text::Split(fields[3], ',')) {
      const std::string norm = text::NormalizeConcept(e);
      if (!norm.empty()) q.required.push_back(norm);
    }
    q.mode = SequenceMode::kWillContain;
  } else {
    throw Error(ErrorKind::kParse, "bad query line: " + std::string(line));
  }
  q.head = text::NormalizeConcept(fields[1]);
  q.tail = text::NormalizeConcept(fields[2]);
  if (q.head.empty() || q.tail.empty()) throw Error(ErrorKind::kParse, "empty head or tail");
  return q;
}

std::vector<KnowledgePath> NgramPathGenerator::Generate(const PathQuery& query,
                                                        const DecodeConfig& config) {
  return GeneratePath(model_, query, config);
}

double NgramPathGenerator::Perplexity(const KnowledgePath& path) {
  return PathPerplexity(model_, path);
}

bool NgramPathGenerator::Knows(std::string_view concept_name) const {
  return model_.KnowsConcept(concept_name);
}

std::vector<KnowledgePath> ExternalPathGenerator::Generate(const PathQuery& query,
                                                           const DecodeConfig& config) {
  config.Validate();
  const std::vector<std::string> lines(static_cast<size_t>(config.num_samples),
                                       FormatQueryLine(query));
  std::vector<KnowledgePath> out;
  for (const auto& line : RunLineProtocol(command_, lines)) {
    if (text::Trim(line).empty()) continue;
    KnowledgePath path;
    try {
      path = ParseSequence(line);
    } catch (const Error&) {
      continue;
    }
    if (path.Head() != query.head || path.Tail() != query.tail) continue;
    const bool covered = std::all_of(query.required.begin(), query.required.end(),
                                     [&](const std::string& e) {
                                       return std::find(path.nodes.begin(), path.nodes.end(), e) !=
                                              path.nodes.end();
                                     });
    if (!covered) continue;
    if (std::find(out.begin(), out.end(), path) == out.end()) out.push_back(std::move(path));
  }
  if (out.empty()) throw Error(ErrorKind::kNoPathFound, "external generator returned no path");
  return out;
}

double ExternalPathGenerator::Perplexity(const KnowledgePath& path) {
  if (scorer_ == nullptr) return 1.0;
  try {
    return PathPerplexity(*scorer_, path);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kUnknownConcept) return 1.0;
    throw;
  }
}

void ServeQueries(const PathModel& model, const DecodeConfig& config, std::istream& in,
                  std::ostream& out) {
  std::string line;
  uint64_t index = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    DecodeConfig c = config;
    c.seed = MixSeed(config.seed, index++);
    c.num_samples = 1;
    try {
      const PathQuery q = ParseQueryLine(line);
      const auto paths = GeneratePath(model, q, c);
      FormatOptions fo;
      fo.wc_entities = q.required;
      fo.allow_off_path = true;
      out << FormatSequence(paths.front(), q.required.empty() ? SequenceMode::kHeadTail : q.mode, fo);
    } catch (const Error&) {
      // Failed queries answer with an empty line to keep lines aligned.
    }
    out << '\n';
  }
  out.flush();
}

}  // namespace pathlm
}  // namespace pathbridge
