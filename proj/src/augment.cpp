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

#include "pathbridge/augment.hpp"

#include <algorithm>
#include <istream>

#include "json.hpp"
#include "pathbridge/error.hpp"
#include "pathbridge/text.hpp"

namespace pathbridge {
namespace augment {

namespace {

void CheckSpan(const Span& s, size_t limit) {
  if (s.start > s.end || s.end > limit) {
    throw Error(ErrorKind::kSpanOutOfRange,
                "span [" + std::to_string(s.start) + ", " + std::to_string(s.end) +
                    ") outside response of length " + std::to_string(limit));
  }
}

Span SpanFromJson(const nlohmann::json& j) {
  Span s;
  if (j.is_array()) {
    s.text = j.at(0).get<std::string>();
    s.start = j.at(1).get<size_t>();
    s.end = j.at(2).get<size_t>();
  } else {
    s.text = j.value("text", "");
    s.start = j.at("start").get<size_t>();
    s.end = j.at("end").get<size_t>();
  }
  return s;
}

bool IsTerminal(char c) { return c == '.' || c == '!' || c == '?'; }

}  // namespace

void AugmentConfig::Validate() const {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "threshold must be in [0, 1]");
  }
  if (max_history < 0) throw Error(ErrorKind::kInvalidArgument, "max_history must be >= 0");
}

std::optional<std::string> CreateTarget(std::string_view response,
                                        const std::vector<SrlFrame>& frames) {
  for (const auto& f : frames) {
    CheckSpan(f.predicate, response.size());
    if (f.predicate.start == f.predicate.end) {
      throw Error(ErrorKind::kSpanOutOfRange, "empty predicate span");
    }
    for (const auto& a : f.arguments) CheckSpan(a, response.size());
  }
  if (frames.empty()) return std::nullopt;

  const SrlFrame* best = &frames.front();
  for (const auto& f : frames) {
    if (f.predicate.start > best->predicate.start) best = &f;
  }
  std::vector<std::pair<size_t, size_t>> spans{{best->predicate.start, best->predicate.end}};
  for (const auto& a : best->arguments) {
    if (a.start < a.end) spans.emplace_back(a.start, a.end);
  }
  std::sort(spans.begin(), spans.end());

  std::vector<std::string> pieces;
  size_t covered = 0;
  for (const auto& [b, e] : spans) {
    const size_t from = std::max(b, covered);
    if (from >= e) continue;
    pieces.emplace_back(response.substr(from, e - from));
    covered = e;
  }
  std::string clause = text::CollapseWhitespace(text::Join(pieces, " "));
  if (covered < response.size() && IsTerminal(response[covered]) &&
      (clause.empty() || !IsTerminal(clause.back()))) {
    clause.push_back(response[covered]);
  }
  return clause;
}

std::vector<std::string> TruncateHistory(const std::vector<std::string>& dialogue,
                                         int max_history) {
  const size_t keep = std::min(dialogue.size(), static_cast<size_t>(std::max(0, max_history)));
  return {dialogue.end() - static_cast<std::ptrdiff_t>(keep), dialogue.end()};
}

std::vector<DialogueRecord> ReadDialogueRecords(std::istream& in) {
  std::vector<DialogueRecord> out;
  std::string line;
  int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::Trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      DialogueRecord r;
      if (j.contains("id")) r.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
      r.dialogue = j.at("dialogue").get<std::vector<std::string>>();
      r.response = j.at("response").get<std::string>();
      if (j.contains("frames")) {
        for (const auto& f : j["frames"]) {
          SrlFrame frame;
          frame.predicate = SpanFromJson(f.at("predicate"));
          if (f.contains("arguments")) {
            for (const auto& a : f["arguments"]) frame.arguments.push_back(SpanFromJson(a));
          }
          r.frames.push_back(std::move(frame));
        }
      }
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kFormat, "dialogue line " + std::to_string(line_no) + ": " + e.what(),
                  line_no);
    }
  }
  return out;
}

BuildResult BuildInstances(const std::vector<DialogueRecord>& records,
                           const AugmentConfig& config) {
  config.Validate();
  BuildResult out;
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const std::string name = r.id.empty() ? std::to_string(i) : r.id;
    pipeline::TransitionInstance inst;
    inst.id = r.id;
    inst.context = TruncateHistory(r.dialogue, config.max_history);
    if (inst.context.empty()) {
      out.skipped.push_back(name + ": empty context");
      continue;
    }
    std::optional<std::string> target;
    try {
      target = CreateTarget(r.response, r.frames);
    } catch (const Error& e) {
      out.skipped.push_back(name + ": " + e.what());
      continue;
    }
    if (!target || target->empty()) {
      out.skipped.push_back(name + ": no frames");
      continue;
    }
    if (*target == text::CollapseWhitespace(r.response)) {
      out.skipped.push_back(name + ": target equals response");
      continue;
    }
    inst.target = *target;
    inst.response = r.response;
    out.instances.push_back(std::move(inst));
  }
  return out;
}

ScoreRequest RequestFor(const pipeline::TransitionInstance& instance) {
  return {text::Join(instance.context, " "), instance.response.value_or(""), instance.target};
}

FilterResult FilterAugmented(const std::vector<pipeline::TransitionInstance>& instances,
                             Scorer& scorer, const AugmentConfig& config) {
  config.Validate();
  std::vector<ScoreRequest> requests;
  requests.reserve(instances.size());
  for (const auto& inst : instances) requests.push_back(RequestFor(inst));
  std::vector<std::optional<double>> scores;
  try {
    scores = scorer.ScoreBatch(requests);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kScorerFailure) throw;
    scores.assign(instances.size(), std::nullopt);
  }
  if (scores.size() != instances.size()) scores.resize(instances.size(), std::nullopt);

  FilterResult out;
  for (size_t i = 0; i < instances.size(); ++i) {
    out.scored.push_back({instances[i], scores[i]});
    if (!scores[i]) {
      out.failures.push_back(i);
      continue;
    }
    if (*scores[i] >= config.threshold) out.kept.push_back({instances[i], scores[i]});
  }
  return out;
}

}  // namespace augment
}  // namespace pathbridge
