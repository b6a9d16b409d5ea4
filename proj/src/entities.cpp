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

#include "pathbridge/entities.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <set>

#include "pathbridge/error.hpp"
#include "pathbridge/subprocess.hpp"
#include "pathbridge/text.hpp"

namespace pathbridge {
namespace entities {

namespace {

std::string ToUpper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool IsVowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

bool EndsWith(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

const std::unordered_map<std::string_view, std::string_view>& IrregularVerbs() {
  static const std::unordered_map<std::string_view, std::string_view> kForms = {
      {"is", "be"},         {"am", "be"},         {"are", "be"},       {"was", "be"},
      {"were", "be"},       {"been", "be"},       {"being", "be"},     {"'s", "be"},
      {"'re", "be"},        {"'m", "be"},         {"has", "have"},     {"had", "have"},
      {"having", "have"},   {"'ve", "have"},      {"does", "do"},      {"did", "do"},
      {"done", "do"},       {"went", "go"},       {"gone", "go"},      {"goes", "go"},
      {"ran", "run"},       {"made", "make"},     {"saw", "see"},      {"seen", "see"},
      {"took", "take"},     {"taken", "take"},    {"got", "get"},      {"gotten", "get"},
      {"came", "come"},     {"ate", "eat"},       {"eaten", "eat"},    {"bought", "buy"},
      {"thought", "think"}, {"told", "tell"},     {"found", "find"},   {"gave", "give"},
      {"given", "give"},    {"knew", "know"},     {"known", "know"},   {"left", "leave"},
      {"felt", "feel"},     {"kept", "keep"},     {"began", "begin"},  {"begun", "begin"},
      {"wrote", "write"},   {"written", "write"}, {"sat", "sit"},      {"stood", "stand"},
      {"heard", "hear"},    {"met", "meet"},      {"paid", "pay"},     {"said", "say"},
      {"taught", "teach"},  {"brought", "bring"}, {"built", "build"},  {"sent", "send"},
      {"spent", "spend"},   {"won", "win"},       {"lost", "lose"},    {"drove", "drive"},
      {"driven", "drive"},  {"flew", "fly"},      {"flown", "fly"},    {"swam", "swim"},
      {"sang", "sing"},     {"sung", "sing"},     {"slept", "sleep"},  {"led", "lead"},
      {"fell", "fall"},     {"fallen", "fall"},   {"held", "hold"},    {"caught", "catch"},
      {"chose", "choose"},  {"chosen", "choose"}, {"spoke", "speak"},  {"broke", "break"},
      {"broken", "break"},  {"drew", "draw"},     {"drawn", "draw"},   {"grew", "grow"},
      {"grown", "grow"},    {"threw", "throw"},   {"wore", "wear"},    {"hid", "hide"},
      {"rode", "ride"},     {"fed", "feed"},      {"fought", "fight"}, {"sold", "sell"},
      {"understood", "understand"},
  };
  return kForms;
}

// Restores a silent final 'e' dropped before -ing/-ed.
std::string RestoreE(std::string stem) {
  const size_t n = stem.size();
  if (n < 2) return stem;
  const char last = stem[n - 1];
  if (last == 'v' || last == 'c' || last == 'z' || last == 'u') return stem + "e";
  if (n == 3 && !IsVowel(stem[0]) && IsVowel(stem[1]) && !IsVowel(last) && last != 'w' &&
      last != 'x' && last != 'y') {
    return stem + "e";
  }
  if (n >= 4 && last == 't' && stem[n - 2] == 'a' && !IsVowel(stem[n - 3])) return stem + "e";
  return stem;
}

std::string UndoubleOrRestore(std::string stem) {
  const size_t n = stem.size();
  if (n >= 3 && stem[n - 1] == stem[n - 2] && !IsVowel(stem[n - 1]) && stem[n - 1] != 'l' &&
      stem[n - 1] != 's' && stem[n - 1] != 'z' && stem[n - 1] != 'f') {
    stem.pop_back();
    return stem;
  }
  return RestoreE(std::move(stem));
}

const std::unordered_set<std::string_view>& BaseVerbs() {
  static const std::unordered_set<std::string_view> kVerbs = {
      "like",  "love",   "want",  "need",  "go",    "run",   "walk",  "eat",   "play",
      "watch", "see",    "try",   "enjoy", "visit", "cook",  "make",  "take",  "get",
      "come",  "buy",    "think", "know",  "feel",  "swim",  "read",  "write", "sing",
      "dance", "drive",  "fly",   "work",  "live",  "grow",  "plant", "bake",  "drink",
      "sleep", "travel", "bark",  "call",  "learn", "teach", "help",  "hate",  "prefer",
      "wish",  "hope",   "paint", "draw",  "hike",  "relax", "study", "shop",  "look",
      "taste", "smell",  "train", "serve", "sit",   "stand", "open",  "climb", "jump",
      "keep",  "find",   "give",  "meet",  "say",   "tell",  "use",   "own",   "adopt",
  };
  return kVerbs;
}

const std::unordered_map<std::string_view, std::string_view>& ClosedClass() {
  static const std::unordered_map<std::string_view, std::string_view> kTags = {
      {"the", "DT"},     {"a", "DT"},        {"an", "DT"},      {"this", "DT"},
      {"that", "DT"},    {"these", "DT"},    {"those", "DT"},   {"every", "DT"},
      {"each", "DT"},    {"some", "DT"},     {"any", "DT"},     {"no", "DT"},
      {"all", "DT"},     {"i", "PRP"},       {"you", "PRP"},    {"he", "PRP"},
      {"she", "PRP"},    {"it", "PRP"},      {"we", "PRP"},     {"they", "PRP"},
      {"me", "PRP"},     {"him", "PRP"},     {"us", "PRP"},     {"them", "PRP"},
      {"my", "PRP$"},    {"your", "PRP$"},   {"his", "PRP$"},   {"her", "PRP$"},
      {"its", "PRP$"},   {"our", "PRP$"},    {"their", "PRP$"}, {"in", "IN"},
      {"on", "IN"},      {"at", "IN"},       {"of", "IN"},      {"for", "IN"},
      {"with", "IN"},    {"from", "IN"},     {"by", "IN"},      {"about", "IN"},
      {"into", "IN"},    {"over", "IN"},     {"under", "IN"},   {"along", "IN"},
      {"near", "IN"},    {"after", "IN"},    {"before", "IN"},  {"since", "IN"},
      {"during", "IN"},  {"if", "IN"},       {"because", "IN"}, {"than", "IN"},
      {"to", "TO"},      {"and", "CC"},      {"or", "CC"},      {"but", "CC"},
      {"can", "MD"},     {"could", "MD"},    {"will", "MD"},    {"would", "MD"},
      {"should", "MD"},  {"may", "MD"},      {"might", "MD"},   {"must", "MD"},
      {"shall", "MD"},   {"is", "VBZ"},      {"are", "VBP"},    {"am", "VBP"},
      {"was", "VBD"},    {"were", "VBD"},    {"be", "VB"},      {"been", "VBN"},
      {"being", "VBG"},  {"has", "VBZ"},     {"have", "VBP"},   {"had", "VBD"},
      {"does", "VBZ"},   {"do", "VBP"},      {"did", "VBD"},    {"not", "RB"},
      {"n't", "RB"},     {"very", "RB"},     {"really", "RB"},  {"always", "RB"},
      {"never", "RB"},   {"too", "RB"},      {"also", "RB"},    {"just", "RB"},
      {"so", "RB"},      {"often", "RB"},    {"here", "RB"},    {"there", "EX"},
      {"now", "RB"},     {"what", "WP"},     {"who", "WP"},     {"how", "WRB"},
      {"when", "WRB"},   {"where", "WRB"},   {"why", "WRB"},    {"hi", "UH"},
      {"hello", "UH"},   {"yes", "UH"},      {"oh", "UH"},      {"today", "NN"},
      {"enough", "JJ"},  {"big", "JJ"},      {"small", "JJ"},   {"red", "JJ"},
      {"good", "JJ"},    {"great", "JJ"},    {"nice", "JJ"},    {"amazing", "JJ"},
      {"beautiful", "JJ"}, {"happy", "JJ"},  {"sad", "JJ"},     {"new", "JJ"},
      {"old", "JJ"},     {"authentic", "JJ"}, {"european", "JJ"}, {"best", "JJS"},
      {"favorite", "JJ"}, {"delicious", "JJ"}, {"cold", "JJ"},  {"hot", "JJ"},
      {"warm", "JJ"},    {"fun", "JJ"},      {"fresh", "JJ"},   {"little", "JJ"},
      {"called", "VBN"}, {"named", "VBN"},   {"'s", "POS"},     {"ever", "RB"},
  };
  return kTags;
}

bool IsSubjectPronoun(std::string_view w) {
  return w == "i" || w == "you" || w == "we" || w == "they" || w == "he" || w == "she" ||
         w == "it";
}

std::string GuessTag(const std::string& w, const TaggedToken* prev) {
  const auto& closed = ClosedClass();
  if (const auto it = closed.find(w); it != closed.end()) return std::string(it->second);
  if (std::all_of(w.begin(), w.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    return "CD";
  }
  const std::string prev_tag = prev ? prev->tag : "";
  const std::string prev_word = prev ? text::ToLower(prev->surface) : "";
  const std::string lemma = LemmatizeVerb(w);
  const bool verb_like = BaseVerbs().contains(lemma);
  const bool third_person = prev_word == "he" || prev_word == "she" || prev_word == "it" ||
                            prev_tag == "NN" || prev_tag == "NNP";
  if (verb_like && lemma == w) {
    if (prev_tag == "TO" || prev_tag == "MD") return "VB";
    if (prev_tag == "PRP" && IsSubjectPronoun(prev_word)) return "VBP";
    if (prev_tag == "RB" || prev_tag == "NNS") return "VBP";
    return "NN";
  }
  if (EndsWith(w, "ing") && w.size() > 4) return "VBG";
  if (EndsWith(w, "ed") && w.size() > 3) {
    return prev_tag.rfind("VB", 0) == 0 ? "VBN" : "VBD";
  }
  if (verb_like && EndsWith(w, "s") && third_person) return "VBZ";
  if (EndsWith(w, "ly")) return "RB";
  for (std::string_view suffix : {"ous", "ful", "ive", "able", "ible", "al", "ic", "less", "ish"}) {
    if (EndsWith(w, suffix) && w.size() > suffix.size() + 2) return "JJ";
  }
  if (prev_tag == "PRP" && IsSubjectPronoun(prev_word)) return third_person ? "VBZ" : "VBP";
  if (EndsWith(w, "s") && !EndsWith(w, "ss") && w.size() > 3) return "NNS";
  return "NN";
}

bool IsDroppable(std::string_view tag) {
  return tag == "DT" || tag == "PDT" || tag == "PRP" || tag == "PRP$" || tag == "WP" ||
         tag == "WP$" || tag == "POS";
}

bool IsVerbTag(std::string_view tag) { return tag.rfind("VB", 0) == 0; }

bool IsAuxiliary(std::string_view lemma) {
  return lemma == "be" || lemma == "have" || lemma == "do";
}

struct Chunk {
  size_t begin = 0;
  size_t end = 0;
  bool verb = false;
  std::vector<std::string> words;  // concise form
  std::vector<std::string> surface;  // lowercased surface of kept tokens
};

Chunk Concise(const TaggedSentence& sentence, size_t begin, size_t end, bool verb) {
  Chunk c;
  c.begin = begin;
  c.end = end;
  c.verb = verb;
  size_t verbs = 0;
  for (size_t i = begin; i < end; ++i) verbs += IsVerbTag(sentence[i].tag) ? 1 : 0;
  for (size_t i = begin; i < end; ++i) {
    const auto& tok = sentence[i];
    if (IsDroppable(tok.tag)) continue;
    const std::string lower = text::ToLower(tok.surface);
    if (verb && tok.tag.rfind("RB", 0) == 0) continue;
    if (IsVerbTag(tok.tag)) {
      const std::string lemma = LemmatizeVerb(lower);
      if (verbs > 1 && IsAuxiliary(lemma)) continue;
      c.words.push_back(lemma);
    } else {
      c.words.push_back(lower);
    }
    c.surface.push_back(lower);
  }
  return c;
}

std::string ToConcept(const std::vector<std::string>& words) {
  return text::NormalizeConcept(text::Join(words, " "));
}

// Candidate forms with the last word swapped for its singular and plural.
std::vector<std::string> NumberVariants(std::vector<std::string> words) {
  std::vector<std::string> out{ToConcept(words)};
  if (words.empty()) return out;
  const std::string last = words.back();
  for (const std::string& alt : {Singular(last), Plural(last)}) {
    if (alt == last) continue;
    words.back() = alt;
    out.push_back(ToConcept(words));
  }
  return out;
}

std::string Prefer(const std::vector<std::string>& variants, const ExtractOptions& options) {
  if (options.in_vocab) {
    for (const auto& v : variants) {
      if (!v.empty() && options.in_vocab(v)) return v;
    }
  }
  return variants.front();
}

}  // namespace

TaggedSentence ParseTagged(std::string_view line) {
  TaggedSentence out;
  for (const auto& tok : text::SplitWhitespace(line)) {
    const size_t slash = tok.rfind('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 == tok.size()) {
      throw Error(ErrorKind::kFormat, "token is not surface/TAG: " + tok);
    }
    out.push_back({tok.substr(0, slash), ToUpper(tok.substr(slash + 1))});
  }
  return out;
}

std::string FormatTagged(const TaggedSentence& sentence) {
  std::string out;
  for (const auto& tok : sentence) {
    if (!out.empty()) out.push_back(' ');
    out += tok.surface + "/" + tok.tag;
  }
  return out;
}

TaggedSentence LexiconTagger::TagOne(std::string_view sentence) const {
  std::vector<std::string> words;
  for (const auto& raw : text::SplitWhitespace(text::ToLower(sentence))) {
    size_t b = 0;
    size_t e = raw.size();
    std::vector<std::string> trailing;
    while (b < e && std::ispunct(static_cast<unsigned char>(raw[b])) && raw[b] != '\'') {
      words.emplace_back(1, raw[b]);
      ++b;
    }
    while (e > b && std::ispunct(static_cast<unsigned char>(raw[e - 1]))) {
      trailing.emplace_back(1, raw[e - 1]);
      --e;
    }
    if (e > b) {
      std::string word = raw.substr(b, e - b);
      const size_t apos = word.find('\'');
      if (apos != std::string::npos && apos > 0) {
        words.push_back(word.substr(0, apos));
        words.push_back(word.substr(apos));
      } else {
        words.push_back(std::move(word));
      }
    }
    words.insert(words.end(), trailing.rbegin(), trailing.rend());
  }
  TaggedSentence out;
  for (const auto& w : words) {
    std::string tag;
    if (w.size() == 1 && std::ispunct(static_cast<unsigned char>(w[0]))) {
      tag = (w == "." || w == "!" || w == "?") ? "." : (w == "," ? "," : ":");
    } else {
      tag = GuessTag(w, out.empty() ? nullptr : &out.back());
    }
    out.push_back({w, tag});
  }
  return out;
}

std::vector<TaggedSentence> LexiconTagger::Tag(const std::vector<std::string>& sentences) {
  std::vector<TaggedSentence> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(TagOne(s));
  return out;
}

std::vector<TaggedSentence> CommandTagger::Tag(const std::vector<std::string>& sentences) {
  std::vector<std::string> lines;
  lines.reserve(sentences.size());
  for (const auto& s : sentences) lines.push_back(text::SanitizeField(s));
  const auto tagged = RunLineProtocol(command_, lines);
  if (tagged.size() != sentences.size()) {
    throw Error(ErrorKind::kFormat, "tagger returned " + std::to_string(tagged.size()) +
                                        " lines for " + std::to_string(sentences.size()));
  }
  std::vector<TaggedSentence> out;
  for (const auto& line : tagged) out.push_back(ParseTagged(line));
  return out;
}

TagPattern TagPattern::Parse(std::string_view pattern) {
  TagPattern p;
  size_t i = 0;
  while (i < pattern.size()) {
    if (std::isspace(static_cast<unsigned char>(pattern[i]))) {
      ++i;
      continue;
    }
    if (pattern[i] != '<') throw Error(ErrorKind::kInvalidArgument, "expected '<' in tag pattern");
    const size_t close = pattern.find('>', i);
    if (close == std::string_view::npos || close == i + 1) {
      throw Error(ErrorKind::kInvalidArgument, "unterminated tag in pattern");
    }
    Element e;
    try {
      e.tag = std::regex("(?:" + std::string(pattern.substr(i + 1, close - i - 1)) + ")");
    } catch (const std::regex_error&) {
      throw Error(ErrorKind::kInvalidArgument, "bad tag regex in pattern");
    }
    i = close + 1;
    if (i < pattern.size() && (pattern[i] == '*' || pattern[i] == '+' || pattern[i] == '?')) {
      e.min = pattern[i] == '+' ? 1 : 0;
      e.max = pattern[i] == '?' ? 1 : std::numeric_limits<size_t>::max();
      ++i;
    }
    p.elements_.push_back(std::move(e));
  }
  if (p.elements_.empty()) throw Error(ErrorKind::kInvalidArgument, "empty tag pattern");
  return p;
}

bool TagPattern::MatchFrom(std::span<const std::string> tags, size_t elem, size_t pos,
                           size_t& end) const {
  if (elem == elements_.size()) {
    end = pos;
    return true;
  }
  const Element& e = elements_[elem];
  size_t available = 0;
  while (available < e.max && pos + available < tags.size() &&
         std::regex_match(tags[pos + available], e.tag)) {
    ++available;
  }
  for (size_t take = available + 1; take-- > e.min;) {
    if (MatchFrom(tags, elem + 1, pos + take, end)) return true;
  }
  return false;
}

size_t TagPattern::MatchAt(std::span<const std::string> tags, size_t start) const {
  size_t end = start;
  if (!MatchFrom(tags, 0, start, end)) return 0;
  return end - start;
}

std::vector<std::pair<size_t, size_t>> TagPattern::FindAll(std::span<const std::string> tags,
                                                           const std::vector<bool>& taken) const {
  std::vector<std::pair<size_t, size_t>> out;
  size_t i = 0;
  while (i < tags.size()) {
    if (taken[i]) {
      ++i;
      continue;
    }
    size_t limit = i;
    while (limit < tags.size() && !taken[limit]) ++limit;
    const size_t len = MatchAt(tags.subspan(0, limit), i);
    if (len > 0) {
      out.emplace_back(i, i + len);
      i += len;
    } else {
      ++i;
    }
  }
  return out;
}

const std::unordered_set<std::string>& DefaultStopEntities() {
  static const std::unordered_set<std::string> kStop = {"today", "enough", "be", "have", "do"};
  return kStop;
}

std::unordered_set<std::string> ReadStopEntities(std::istream& in) {
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = text::Trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.insert(text::NormalizeConcept(t));
  }
  return out;
}

std::string LemmatizeVerb(std::string_view word) {
  const std::string w = text::ToLower(word);
  if (const auto it = IrregularVerbs().find(w); it != IrregularVerbs().end()) {
    return std::string(it->second);
  }
  if (BaseVerbs().contains(w)) return w;
  if (EndsWith(w, "ing") && w.size() > 4) return UndoubleOrRestore(w.substr(0, w.size() - 3));
  if (EndsWith(w, "ied") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
  if (EndsWith(w, "ed") && w.size() > 3) {
    const std::string stem = w.substr(0, w.size() - 2);
    if (EndsWith(stem, "e")) return stem;
    return UndoubleOrRestore(stem);
  }
  if (EndsWith(w, "ies") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
  for (std::string_view suffix : {"ches", "shes", "sses", "xes", "zzes", "oes"}) {
    if (EndsWith(w, suffix)) return w.substr(0, w.size() - 2);
  }
  if (EndsWith(w, "s") && !EndsWith(w, "ss") && w.size() > 2) return w.substr(0, w.size() - 1);
  return w;
}

namespace {

constexpr std::pair<std::string_view, std::string_view> kIrregularNouns[] = {
    {"foot", "feet"},   {"tooth", "teeth"}, {"man", "men"},         {"woman", "women"},
    {"child", "children"}, {"mouse", "mice"}, {"person", "people"}, {"goose", "geese"},
};

}  // namespace

std::string Singular(std::string_view noun) {
  const std::string w(noun);
  for (const auto& [one, many] : kIrregularNouns) {
    if (w == many) return std::string(one);
  }
  if (EndsWith(w, "ies") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
  for (std::string_view suffix : {"ches", "shes", "sses", "xes", "zzes"}) {
    if (EndsWith(w, suffix)) return w.substr(0, w.size() - 2);
  }
  if (EndsWith(w, "s") && !EndsWith(w, "ss") && !EndsWith(w, "us") && w.size() > 2) {
    return w.substr(0, w.size() - 1);
  }
  return w;
}

std::string Plural(std::string_view noun) {
  const std::string w(noun);
  if (w.empty()) return w;
  for (const auto& [one, many] : kIrregularNouns) {
    if (w == one) return std::string(many);
  }
  if (EndsWith(w, "s") || EndsWith(w, "x") || EndsWith(w, "z") || EndsWith(w, "ch") ||
      EndsWith(w, "sh")) {
    return w + "es";
  }
  if (w.size() > 1 && w.back() == 'y' && !IsVowel(w[w.size() - 2])) {
    return w.substr(0, w.size() - 1) + "ies";
  }
  return w + "s";
}

std::string_view EntitySourceName(EntitySource source) {
  switch (source) {
    case EntitySource::kContext: return "context";
    case EntitySource::kTarget: return "target";
    case EntitySource::kResponse: return "response";
  }
  return "context";
}

EntitySet ExtractEntities(const TaggedSentence& sentence, EntitySource source,
                          const ExtractOptions& options) {
  static const TagPattern kNp = TagPattern::Parse(kNounPhrasePattern);
  static const TagPattern kVp = TagPattern::Parse(kVerbPhrasePattern);

  std::vector<std::string> tags;
  tags.reserve(sentence.size());
  for (const auto& t : sentence) tags.push_back(t.tag);
  std::vector<bool> taken(sentence.size(), false);

  std::vector<Chunk> chunks;
  for (const auto& [b, e] : kNp.FindAll(tags, taken)) {
    chunks.push_back(Concise(sentence, b, e, false));
    std::fill(taken.begin() + static_cast<std::ptrdiff_t>(b),
              taken.begin() + static_cast<std::ptrdiff_t>(e), true);
  }
  for (const auto& [b, e] : kVp.FindAll(tags, taken)) {
    chunks.push_back(Concise(sentence, b, e, true));
  }
  std::sort(chunks.begin(), chunks.end(),
            [](const Chunk& a, const Chunk& b) { return a.begin < b.begin; });

  const auto& stop = options.stop_entities ? *options.stop_entities : DefaultStopEntities();
  EntitySet out;
  out.source = source;
  std::unordered_set<std::string> seen;
  auto emit = [&](const std::string& entity) {
    if (entity.empty() || stop.contains(entity)) return;
    if (seen.insert(entity).second) out.entities.push_back(entity);
  };

  for (size_t i = 0; i < chunks.size(); ++i) {
    const Chunk& c = chunks[i];
    if (c.words.empty()) continue;
    if (c.verb && options.in_vocab && i + 1 < chunks.size() && !chunks[i + 1].verb) {
      const Chunk& next = chunks[i + 1];
      bool adjacent = true;
      for (size_t k = c.end; k < next.begin; ++k) {
        const auto& tag = sentence[k].tag;
        if (tag != "DT" && tag != "PRP$" && tag != "PDT") adjacent = false;
      }
      if (adjacent && !next.words.empty()) {
        std::vector<std::string> merged = c.words;
        merged.insert(merged.end(), next.words.begin(), next.words.end());
        bool hit = false;
        for (const auto& v : NumberVariants(merged)) {
          if (options.in_vocab(v)) {
            emit(v);
            hit = true;
            break;
          }
        }
        if (hit) {
          ++i;
          continue;
        }
      }
    }
    if (c.verb) {
      emit(Prefer({ToConcept(c.words), ToConcept(c.surface)}, options));
    } else {
      // Longest in-vocabulary suffix ("amazing garden" -> "garden").
      std::vector<std::string> variants;
      for (size_t k = 0; k < c.words.size(); ++k) {
        const auto v = NumberVariants({c.words.begin() + static_cast<std::ptrdiff_t>(k), c.words.end()});
        variants.insert(variants.end(), v.begin(), v.end());
      }
      emit(Prefer(variants, options));
    }
  }
  return out;
}

EntitySet ExtractEntities(const std::vector<TaggedSentence>& sentences, EntitySource source,
                          const ExtractOptions& options) {
  EntitySet out;
  out.source = source;
  std::unordered_set<std::string> seen;
  for (const auto& s : sentences) {
    for (auto& e : ExtractEntities(s, source, options).entities) {
      if (seen.insert(e).second) out.entities.push_back(std::move(e));
    }
  }
  return out;
}

IdfTable IdfTable::Load(std::istream& in) {
  IdfTable table;
  std::string line;
  int64_t line_no = 0;
  auto parse_value = [&](std::string_view s) {
    const std::string str(text::Trim(s));
    char* end = nullptr;
    const double v = std::strtod(str.c_str(), &end);
    if (str.empty() || end != str.c_str() + str.size() || !std::isfinite(v) || v < 0.0) {
      throw Error(ErrorKind::kFormat, "bad idf value on line " + std::to_string(line_no), line_no);
    }
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::Trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      constexpr std::string_view kDefault = "# default=";
      if (t.rfind(kDefault, 0) == 0) table.default_ = parse_value(t.substr(kDefault.size()));
      continue;
    }
    const auto fields = text::Split(t, '\t');
    if (fields.size() != 2) {
      throw Error(ErrorKind::kMalformedLine, "idf line " + std::to_string(line_no), line_no);
    }
    table.values_[text::ToLower(text::Trim(fields[0]))] = parse_value(fields[1]);
  }
  return table;
}

IdfTable IdfTable::LoadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  return Load(in);
}

void IdfTable::Save(std::ostream& out) const {
  std::map<std::string, double> sorted(values_.begin(), values_.end());
  out << std::setprecision(17) << "# default=" << default_ << '\n';
  for (const auto& [tok, v] : sorted) out << tok << '\t' << v << '\n';
  if (!out) throw Error(ErrorKind::kIo, "failed writing idf table");
}

IdfTable IdfTable::Build(std::istream& documents) {
  std::unordered_map<std::string, uint64_t> df;
  uint64_t docs = 0;
  std::string line;
  while (std::getline(documents, line)) {
    const auto words = text::WordTokens(line);
    if (words.empty()) continue;
    ++docs;
    for (const auto& w : std::set<std::string>(words.begin(), words.end())) ++df[w];
  }
  if (docs == 0) throw Error(ErrorKind::kInvalidArgument, "no documents for idf");
  const double n = static_cast<double>(docs);
  IdfTable table(std::log(n));
  for (const auto& [tok, count] : df) {
    table.values_[tok] = std::max(0.0, std::log(n / (1.0 + static_cast<double>(count))));
  }
  return table;
}

void IdfTable::Set(std::string token, double value) {
  if (!std::isfinite(value) || value < 0.0) throw Error(ErrorKind::kInvalidArgument, "idf must be finite and >= 0");
  values_[std::move(token)] = value;
}

double IdfTable::Lookup(std::string_view token) const {
  const auto it = values_.find(std::string(token));
  return it == values_.end() ? default_ : it->second;
}

double IdfTable::MaxTokenIdf(std::string_view concept_name) const {
  double best = -1.0;
  for (const auto& tok : text::Split(concept_name, '_')) {
    if (!tok.empty()) best = std::max(best, Lookup(tok));
  }
  return best < 0.0 ? default_ : best;
}

std::vector<ScoredPair> ScorePairs(const EntitySet& heads, const EntitySet& tails,
                                   const IdfTable& idf) {
  if (heads.entities.empty()) throw Error(ErrorKind::kEmptyEntitySet, "head entities empty", 0);
  if (tails.entities.empty()) throw Error(ErrorKind::kEmptyEntitySet, "tail entities empty", 1);
  std::vector<ScoredPair> out;
  out.reserve(heads.entities.size() * tails.entities.size());
  for (const auto& h : heads.entities) {
    const double hs = idf.MaxTokenIdf(h);
    for (const auto& t : tails.entities) out.push_back({h, t, hs + idf.MaxTokenIdf(t)});
  }
  std::sort(out.begin(), out.end(), [](const ScoredPair& a, const ScoredPair& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.head != b.head) return a.head < b.head;
    return a.tail < b.tail;
  });
  return out;
}

std::vector<ScoredPair> SelectPairs(const std::vector<ScoredPair>& ranked, Phase phase, int d) {
  if (ranked.empty()) throw Error(ErrorKind::kNoPairs, "no entity pairs");
  if (phase == Phase::kInfer) return {ranked.front()};
  if (d < 1) throw Error(ErrorKind::kInvalidArgument, "pair budget must be >= 1");
  const size_t keep = std::min(ranked.size(), static_cast<size_t>(d));
  return {ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep)};
}

}  // namespace entities
}  // namespace pathbridge
