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

#include "pathbridge/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <map>
#include <numeric>

#include "json.hpp"
#include "pathbridge/error.hpp"
#include "pathbridge/text.hpp"

namespace pathbridge {
namespace evalkit {

namespace {

constexpr int kMaxOrder = 4;

using NgramCounts = std::map<std::vector<std::string>, size_t>;

NgramCounts CountNgrams(const std::vector<std::string>& tokens, size_t n) {
  NgramCounts out;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    ++out[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                   tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return out;
}

size_t Lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<size_t> prev(b.size() + 1, 0);
  std::vector<size_t> cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

bool SameTokens(std::string_view a, std::string_view b) {
  return text::MetricTokens(a) == text::MetricTokens(b);
}

double ParseDouble(const std::string& s, bool& ok) {
  const std::string t(text::Trim(s));
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  ok = !t.empty() && end == t.c_str() + t.size() && std::isfinite(v);
  return v;
}

}  // namespace

std::vector<EvalInstance> ReadEvalInstances(std::istream& in) {
  std::vector<EvalInstance> out;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::Trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      EvalInstance e;
      if (j.contains("id")) e.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
      if (j.at("context").is_string()) {
        e.context = {j["context"].get<std::string>()};
      } else {
        e.context = j["context"].get<std::vector<std::string>>();
      }
      e.target = j.at("target").get<std::string>();
      e.hypothesis = j.value("hypothesis", "");
      e.references = j.at("references").get<std::vector<std::string>>();
      if (e.references.empty()) throw Error(ErrorKind::kFormat, "references must be non-empty");
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorKind::kFormat, "eval line " + std::to_string(line_no) + ": " + ex.what(),
                  line_no);
    }
  }
  return out;
}

double Bleu(const std::vector<BleuCase>& corpus) {
  if (corpus.empty()) throw Error(ErrorKind::kEmptyCorpus, "BLEU over empty corpus");
  std::vector<double> matched(kMaxOrder + 1, 0.0);
  std::vector<double> total(kMaxOrder + 1, 0.0);
  double hyp_len = 0.0;
  double ref_len = 0.0;
  for (const auto& c : corpus) {
    const auto hyp = text::MetricTokens(c.hypothesis);
    std::vector<std::vector<std::string>> refs;
    for (const auto& r : c.references) refs.push_back(text::MetricTokens(r));
    hyp_len += static_cast<double>(hyp.size());
    size_t best = 0;
    bool have = false;
    for (const auto& r : refs) {
      const auto diff = [&](size_t len) {
        return len > hyp.size() ? len - hyp.size() : hyp.size() - len;
      };
      if (!have || diff(r.size()) < diff(best) || (diff(r.size()) == diff(best) && r.size() < best)) {
        best = r.size();
        have = true;
      }
    }
    ref_len += static_cast<double>(best);
    for (size_t n = 1; n <= kMaxOrder; ++n) {
      const auto hyp_counts = CountNgrams(hyp, n);
      NgramCounts max_ref;
      for (const auto& r : refs) {
        for (const auto& [g, k] : CountNgrams(r, n)) max_ref[g] = std::max(max_ref[g], k);
      }
      for (const auto& [g, k] : hyp_counts) {
        total[n] += static_cast<double>(k);
        const auto it = max_ref.find(g);
        if (it != max_ref.end()) matched[n] += static_cast<double>(std::min(k, it->second));
      }
    }
  }
  double log_sum = 0.0;
  int orders = 0;
  for (size_t n = 1; n <= kMaxOrder; ++n) {
    if (total[n] == 0.0) continue;
    if (matched[n] == 0.0) return 0.0;
    log_sum += std::log(matched[n] / total[n]);
    ++orders;
  }
  if (orders == 0 || hyp_len == 0.0) return 0.0;
  const double bp = hyp_len > ref_len ? 1.0 : std::exp(1.0 - ref_len / hyp_len);
  return bp * std::exp(log_sum / orders);
}

double RougeL(std::string_view hypothesis, const std::vector<std::string>& references) {
  const auto hyp = text::MetricTokens(hypothesis);
  double best = 0.0;
  for (const auto& ref : references) {
    const auto r = text::MetricTokens(ref);
    if (hyp.empty() || r.empty()) continue;
    const double lcs = static_cast<double>(Lcs(hyp, r));
    if (lcs == 0.0) continue;
    const double p = lcs / static_cast<double>(hyp.size());
    const double rec = lcs / static_cast<double>(r.size());
    best = std::max(best, 2.0 * p * rec / (p + rec));
  }
  return best;
}

std::vector<double> FractionalRanks(const std::vector<double>& values) {
  std::vector<size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double Spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) {
    throw Error(ErrorKind::kLengthMismatch, std::to_string(xs.size()) + " vs " + std::to_string(ys.size()));
  }
  if (xs.size() < 3) throw Error(ErrorKind::kInvalidArgument, "need at least 3 points");
  const auto rx = FractionalRanks(xs);
  const auto ry = FractionalRanks(ys);
  const double n = static_cast<double>(rx.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorKind::kDegenerateInput, "constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double MeanRougeL(const std::vector<BleuCase>& corpus) {
  if (corpus.empty()) throw Error(ErrorKind::kEmptyCorpus, "ROUGE-L over empty corpus");
  double sum = 0.0;
  for (const auto& c : corpus) sum += RougeL(c.hypothesis, c.references);
  return sum / static_cast<double>(corpus.size());
}

CorpusMetric MetricByName(std::string_view name) {
  const std::string lower = text::ToLower(name);
  if (lower == "bleu") return Bleu;
  if (lower == "rouge_l" || lower == "rouge-l" || lower == "rougel") return MeanRougeL;
  throw Error(ErrorKind::kInvalidArgument, "unknown metric: " + std::string(name));
}

ProbeResult BiasProbe(const std::vector<EvalInstance>& dataset, const CorpusMetric& metric) {
  if (dataset.empty()) throw Error(ErrorKind::kEmptyCorpus, "empty probe dataset");
  std::vector<BleuCase> as_target;
  std::vector<BleuCase> as_context;
  std::vector<BleuCase> as_reference;
  ProbeResult result;
  for (size_t i = 0; i < dataset.size(); ++i) {
    const auto& e = dataset[i];
    if (e.references.size() < 2) {
      throw Error(ErrorKind::kInsufficientReferences,
                  "instance " + std::to_string(i) + " has fewer than 2 references",
                  static_cast<int64_t>(i));
    }
    const std::vector<std::string> rest(e.references.begin() + 1, e.references.end());
    const std::string context = e.context.empty() ? "" : e.context.back();
    as_target.push_back({e.target, rest});
    as_context.push_back({context, rest});
    as_reference.push_back({e.references.front(), rest});
    if (std::any_of(rest.begin(), rest.end(), [&](const auto& r) { return SameTokens(r, e.target); })) {
      ++result.target_in_references;
    }
    if (std::any_of(rest.begin(), rest.end(), [&](const auto& r) { return SameTokens(r, context); })) {
      ++result.context_in_references;
    }
  }
  result.rows = {{"TARGET_AS_RESPONSE", metric(as_target)},
                 {"CONTEXT_AS_RESPONSE", metric(as_context)},
                 {"REFERENCE_AS_RESPONSE", metric(as_reference)}};
  if (result.target_in_references) {
    result.flags.push_back(std::to_string(result.target_in_references) +
                           " instances have the target copied into a reference");
  }
  if (result.context_in_references) {
    result.flags.push_back(std::to_string(result.context_in_references) +
                           " instances have the context copied into a reference");
  }
  return result;
}

double CopyOverlap(std::string_view response, std::string_view target, OverlapBasis basis) {
  const auto r = text::ContentTokens(response);
  const auto t = text::ContentTokens(target);
  std::map<std::string, size_t> rc;
  for (const auto& w : r) ++rc[w];
  size_t shared = 0;
  for (const auto& w : t) {
    auto it = rc.find(w);
    if (it != rc.end() && it->second > 0) {
      --it->second;
      ++shared;
    }
  }
  size_t denom = t.size();
  if (basis == OverlapBasis::kResponse) denom = r.size();
  if (basis == OverlapBasis::kMax) denom = std::max(r.size(), t.size());
  return denom == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(denom);
}

CleanResult CleanTestSet(const std::vector<pipeline::TransitionInstance>& instances,
                         double threshold, OverlapBasis basis) {
  CleanResult out;
  for (size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    if (!inst.response) throw Error(ErrorKind::kInvalidArgument, "instance without response");
    if (CopyOverlap(*inst.response, inst.target, basis) > threshold) {
      out.removed.push_back(i);
    } else {
      out.kept.push_back(inst);
    }
  }
  return out;
}

std::vector<Rating> ReadRatings(std::istream& in) {
  std::vector<Rating> out;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::Trim(line).empty()) continue;
    const auto fields = text::Split(text::Trim(line), ',');
    if (fields.size() != 3) {
      throw Error(ErrorKind::kMalformedLine, "ratings line " + std::to_string(line_no), line_no);
    }
    bool ok_m = false;
    bool ok_h = false;
    const double m = ParseDouble(fields[1], ok_m);
    const double h = ParseDouble(fields[2], ok_h);
    if (!ok_m || !ok_h) {
      if (out.empty() && line_no == 1) continue;  // header
      throw Error(ErrorKind::kMalformedLine, "ratings line " + std::to_string(line_no), line_no);
    }
    out.push_back({std::string(text::Trim(fields[0])), m, h});
  }
  return out;
}

}  // namespace evalkit
}  // namespace pathbridge
