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

#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include <boost/math/distributions/chi_squared.hpp>

namespace pathbridge::oracle {

namespace {

void Expand(const kg::KnowledgeGraph& graph, const std::string& node, const std::string* prev_node,
            const kg::Relation* prev_rel, int taken, int target, double prob,
            std::vector<double>& out) {
  if (taken == target) {
    out[static_cast<size_t>(taken)] += prob;
    return;
  }
  std::vector<std::pair<kg::Relation, std::string>> allowed;
  for (const auto& [rel, next] : graph.Neighbors(node)) {
    if (prev_rel != nullptr && next == *prev_node && rel == prev_rel->Inverted()) continue;
    allowed.emplace_back(rel, next);
  }
  if (allowed.empty()) {
    out[static_cast<size_t>(taken)] += prob;
    return;
  }
  const double share = prob / static_cast<double>(allowed.size());
  for (const auto& [rel, next] : allowed) {
    Expand(graph, next, &node, &rel, taken + 1, target, share, out);
  }
}

}  // namespace

std::vector<double> WalkLengthDistribution(const kg::KnowledgeGraph& graph, int max_hops,
                                           bool allow_backtrack) {
  std::vector<std::string> starts;
  for (const auto& c : graph.Concepts()) {
    if (!graph.Neighbors(c).empty()) starts.push_back(c);
  }
  std::vector<double> out(static_cast<size_t>(max_hops) + 1, 0.0);
  const double p_start = 1.0 / static_cast<double>(starts.size());
  for (const auto& s : starts) {
    for (int target = 1; target <= max_hops; ++target) {
      const double p = p_start / max_hops;
      if (allow_backtrack) {
        // Every node with a neighbor keeps walking; only the target matters.
        out[static_cast<size_t>(target)] += p;
      } else {
        Expand(graph, s, nullptr, nullptr, 0, target, p, out);
      }
    }
  }
  return out;
}

ChiSquare ChiSquareTest(const std::vector<double>& observed, const std::vector<double>& expected) {
  ChiSquare r;
  int cells = 0;
  for (size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] <= 0.0) continue;
    const double d = observed[i] - expected[i];
    r.statistic += d * d / expected[i];
    ++cells;
  }
  const boost::math::chi_squared dist(cells - 1);
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  return r;
}

double NgramProbability(const pathlm::PathModel& model, const std::vector<std::string>& history,
                        const std::string& next) {
  std::vector<std::string> predictable;
  for (const auto& v : model.vocabulary()) {
    if (v != pathlm::kBeginToken) predictable.push_back(v);
  }
  const double v_size = static_cast<double>(predictable.size());
  const double eps = model.smoothing();
  std::vector<std::string> padded(static_cast<size_t>(model.order() - 1),
                                  std::string(pathlm::kBeginToken));
  padded.insert(padded.end(), history.begin(), history.end());

  double p = 1.0 / v_size;
  for (int k = 1; k <= model.order(); ++k) {
    std::vector<std::string> ctx(padded.end() - (k - 1), padded.end());
    double ctx_total = 0.0;
    for (const auto& w : model.vocabulary()) {
      auto g = ctx;
      g.push_back(w);
      ctx_total += static_cast<double>(model.Count(g));
    }
    auto g = ctx;
    g.push_back(next);
    const double c = static_cast<double>(model.Count(g));
    p = (c + eps * v_size * p) / (ctx_total + eps * v_size);
  }
  return p;
}

double HtLogProb(const pathlm::PathModel& model, const KnowledgePath& path, size_t* tokens) {
  std::vector<std::string> seq{"[target]", path.Tail(), "[sep]"};
  for (size_t i = 0; i < path.relations.size(); ++i) {
    seq.push_back(path.nodes[i]);
    seq.push_back(path.relations[i].Token());
  }
  seq.push_back(path.Tail());
  seq.push_back(std::string(pathlm::kEndToken));
  double lp = 0.0;
  std::vector<std::string> history;
  for (const auto& tok : seq) {
    lp += std::log(NgramProbability(model, history, tok));
    history.push_back(tok);
  }
  if (tokens != nullptr) *tokens = seq.size();
  return lp;
}

double Perplexity(const pathlm::PathModel& model, const KnowledgePath& path) {
  size_t n = 0;
  const double lp = HtLogProb(model, path, &n);
  return std::exp(-lp / static_cast<double>(n));
}

std::vector<Scored> EnumerateConstrained(const pathlm::PathModel& model,
                                         const pathlm::PathQuery& query, int max_len,
                                         int max_hops) {
  const int hops_cap = std::min(max_hops, (max_len - 1) / 2);
  std::vector<std::string> prefix;
  std::vector<std::string> required;
  std::vector<std::string> seen;
  for (const auto& e : query.required) {
    if (std::find(seen.begin(), seen.end(), e) != seen.end()) continue;
    seen.push_back(e);
    prefix.push_back("[wc]");
    prefix.push_back(e);
    if (e != query.head && e != query.tail) required.push_back(e);
  }
  prefix.push_back("[target]");
  prefix.push_back(query.tail);
  prefix.push_back("[sep]");
  prefix.push_back(query.head);

  std::vector<std::string> concepts;
  std::vector<std::string> relations;
  for (auto id : model.ConceptIds()) concepts.push_back(model.Token(id));
  for (auto id : model.RelationIds()) relations.push_back(model.Token(id));

  std::vector<Scored> out;
  KnowledgePath path;
  path.nodes.push_back(query.head);
  std::function<void(int)> grow = [&](int hops) {
    if (hops == hops_cap) return;
    for (const auto& r : relations) {
      for (const auto& c : concepts) {
        path.relations.push_back(kg::Relation::FromToken(r));
        path.nodes.push_back(c);
        if (c == query.tail) {
          const auto inner = path.Intermediates();
          const bool covered = std::all_of(required.begin(), required.end(), [&](const auto& e) {
            return std::find(inner.begin(), inner.end(), e) != inner.end();
          });
          if (covered) out.push_back({path, 0.0});
        } else {
          grow(hops + 1);
        }
        path.relations.pop_back();
        path.nodes.pop_back();
      }
    }
  };
  grow(0);

  for (auto& s : out) {
    std::vector<std::string> history = prefix;
    for (size_t i = 0; i < s.path.relations.size(); ++i) {
      for (const std::string tok : {s.path.relations[i].Token(), s.path.nodes[i + 1]}) {
        s.log_prob += std::log(NgramProbability(model, history, tok));
        history.push_back(tok);
      }
    }
    s.log_prob += std::log(NgramProbability(model, history, std::string(pathlm::kEndToken)));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Scored& a, const Scored& b) { return a.log_prob > b.log_prob; });
  return out;
}

std::vector<pipeline::ScoredPath> NaiveFilter(const std::vector<pipeline::ScoredPath>& candidates,
                                              double factor, bool mean_after_repetition,
                                              const std::vector<std::string>* gold) {
  auto repeats = [](const KnowledgePath& p) {
    for (size_t i = 0; i < p.nodes.size(); ++i) {
      for (size_t j = i + 1; j < p.nodes.size(); ++j) {
        if (p.nodes[i] == p.nodes[j]) return true;
      }
    }
    return false;
  };
  double sum = 0.0;
  double n = 0.0;
  for (const auto& c : candidates) {
    if (mean_after_repetition && repeats(c.path)) continue;
    sum += c.perplexity;
    n += 1.0;
  }
  const double mean = n > 0 ? sum / n : 0.0;
  std::vector<pipeline::ScoredPath> out;
  for (const auto& c : candidates) {
    if (c.perplexity > factor * mean) continue;
    if (repeats(c.path)) continue;
    if (gold != nullptr) {
      bool ok = true;
      for (size_t i = 1; i + 1 < c.path.nodes.size(); ++i) {
        if (std::find(gold->begin(), gold->end(), c.path.nodes[i]) == gold->end()) ok = false;
      }
      if (!ok) continue;
    }
    out.push_back(c);
  }
  return out;
}

namespace {

std::map<std::string, int> Grams(const std::vector<std::string>& toks, size_t n) {
  std::map<std::string, int> out;
  for (size_t i = 0; i + n <= toks.size(); ++i) {
    std::string key;
    for (size_t k = 0; k < n; ++k) key += toks[i + k] + '\x1f';
    ++out[key];
  }
  return out;
}

}  // namespace

double Bleu(const std::vector<std::vector<std::string>>& hypotheses,
            const std::vector<std::vector<std::vector<std::string>>>& references) {
  double c = 0.0;
  double r = 0.0;
  double log_p = 0.0;
  int used = 0;
  for (size_t n = 1; n <= 4; ++n) {
    double num = 0.0;
    double den = 0.0;
    for (size_t i = 0; i < hypotheses.size(); ++i) {
      const auto h = Grams(hypotheses[i], n);
      for (const auto& [g, k] : h) {
        int clip = 0;
        for (const auto& ref : references[i]) {
          const auto rg = Grams(ref, n);
          const auto it = rg.find(g);
          if (it != rg.end()) clip = std::max(clip, it->second);
        }
        num += std::min(k, clip);
        den += k;
      }
    }
    if (den == 0.0) continue;
    if (num == 0.0) return 0.0;
    log_p += std::log(num / den);
    ++used;
  }
  for (size_t i = 0; i < hypotheses.size(); ++i) {
    const double len = static_cast<double>(hypotheses[i].size());
    c += len;
    double best = -1.0;
    for (const auto& ref : references[i]) {
      const double rl = static_cast<double>(ref.size());
      if (best < 0.0 || std::abs(rl - len) < std::abs(best - len) ||
          (std::abs(rl - len) == std::abs(best - len) && rl < best)) {
        best = rl;
      }
    }
    r += std::max(best, 0.0);
  }
  if (used == 0 || c == 0.0) return 0.0;
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_p / used);
}

namespace {

size_t LcsMemo(const std::vector<std::string>& a, const std::vector<std::string>& b, size_t i,
               size_t j, std::vector<std::vector<int>>& memo) {
  if (i == a.size() || j == b.size()) return 0;
  int& slot = memo[i][j];
  if (slot >= 0) return static_cast<size_t>(slot);
  size_t v;
  if (a[i] == b[j]) {
    v = 1 + LcsMemo(a, b, i + 1, j + 1, memo);
  } else {
    v = std::max(LcsMemo(a, b, i + 1, j, memo), LcsMemo(a, b, i, j + 1, memo));
  }
  slot = static_cast<int>(v);
  return v;
}

}  // namespace

double RougeL(const std::vector<std::string>& hypothesis,
              const std::vector<std::vector<std::string>>& references) {
  double best = 0.0;
  for (const auto& ref : references) {
    if (hypothesis.empty() || ref.empty()) continue;
    std::vector<std::vector<int>> memo(hypothesis.size(), std::vector<int>(ref.size(), -1));
    const double l = static_cast<double>(LcsMemo(hypothesis, ref, 0, 0, memo));
    if (l == 0.0) continue;
    const double p = l / static_cast<double>(hypothesis.size());
    const double rc = l / static_cast<double>(ref.size());
    best = std::max(best, 2 * p * rc / (p + rc));
  }
  return best;
}

int FieldDiff(const tcmetric::LabeledTriple& a, const tcmetric::LabeledTriple& b) {
  return (a.context != b.context ? 1 : 0) + (a.response != b.response ? 1 : 0) +
         (a.target != b.target ? 1 : 0);
}

}  // namespace pathbridge::oracle
