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

#include "pathbridge/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pathbridge/augment.hpp"
#include "pathbridge/entities.hpp"
#include "pathbridge/error.hpp"
#include "pathbridge/evalkit.hpp"
#include "pathbridge/kg.hpp"
#include "pathbridge/path_model.hpp"
#include "pathbridge/pipeline.hpp"
#include "pathbridge/sampler.hpp"
#include "pathbridge/sequence.hpp"
#include "pathbridge/tcmetric.hpp"
#include "pathbridge/text.hpp"

namespace pathbridge {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string NowUtc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ifstream OpenInput(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  return in;
}

std::string FileDigest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "";
  uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream ss;
  ss << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

// Writes through a sibling temporary file and renames into place.
template <typename Fn>
void WriteAtomically(const std::string& path, Fn&& fill) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + tmp);
    fill(out);
    out.flush();
    if (!out) throw Error(ErrorKind::kIo, "failed writing " + tmp);
  }
  fs::rename(tmp, target);
}

void WriteLines(const std::string& path, const std::vector<std::string>& lines) {
  WriteAtomically(path, [&](std::ostream& o) {
    for (const auto& l : lines) o << l << '\n';
  });
}

struct Manifest {
  std::string subcommand;
  std::vector<std::string> args;
  std::string config;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::optional<uint64_t> seed;
  std::string started;

  void Write() const {
    if (outputs.empty()) return;
    Json j;
    j["tool"] = "pathbridge";
    j["version"] = kVersion;
    j["subcommand"] = subcommand;
    j["argv"] = args;
    j["cwd"] = fs::current_path().string();
    j["config"] = config;
    if (seed) {
      j["seed"] = *seed;
    } else {
      j["seed"] = nullptr;
    }
    Json in = Json::array();
    for (const auto& p : inputs) in.push_back({{"path", p}, {"digest", FileDigest(p)}});
    j["inputs"] = in;
    Json out = Json::array();
    for (const auto& p : outputs) out.push_back({{"path", p}, {"digest", FileDigest(p)}});
    j["outputs"] = out;
    j["started"] = started;
    j["finished"] = NowUtc();
    const std::string body = j.dump(2) + "\n";
    WriteAtomically(outputs.front() + ".manifest.json", [&](std::ostream& o) { o << body; });
  }
};

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  for (const auto& part : text::Split(s, ',')) {
    const auto t = text::Trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

pathlm::RelationTemplateTable Templates(const std::string& path) {
  auto table = pathlm::RelationTemplateTable::Defaults();
  if (!path.empty()) {
    auto in = OpenInput(path);
    for (const auto& [k, v] : pathlm::RelationTemplateTable::Load(in).entries()) table.Set(k, v);
  }
  return table;
}

kg::GraphConfig GraphConfigFrom(const std::string& exclude_file, bool no_inverses) {
  kg::GraphConfig config;
  if (!exclude_file.empty()) {
    auto in = OpenInput(exclude_file);
    config.excluded_relations = kg::ReadRelationList(in);
  }
  config.synthesize_inverses = !no_inverses;
  return config;
}

struct DecodeFlags {
  double temperature = 0.7;
  double top_p = 0.9;
  int beam_width = 8;
  int max_len = 13;
  int max_hops = 6;
  std::string strategy = "sample";

  void Register(CLI::App* app) {
    app->add_option("--temperature", temperature, "Sampling temperature")->capture_default_str();
    app->add_option("--top-p", top_p, "Nucleus mass")->capture_default_str();
    app->add_option("--beam-width", beam_width, "Beam width")->capture_default_str();
    app->add_option("--max-len", max_len, "Path body token cap")->capture_default_str();
    app->add_option("--max-hops", max_hops, "Hop cap")->capture_default_str();
    app->add_option("--strategy", strategy, "sample or beam")
        ->check(CLI::IsMember({"sample", "beam"}))
        ->capture_default_str();
  }

  pathlm::DecodeConfig Build(uint64_t seed, int num_samples) const {
    pathlm::DecodeConfig c;
    c.temperature = temperature;
    c.top_p = top_p;
    c.beam_width = beam_width;
    c.max_len = max_len;
    c.max_hops = max_hops;
    c.seed = seed;
    c.num_samples = num_samples;
    c.strategy = strategy == "beam" ? pathlm::DecodeStrategy::kBeam : pathlm::DecodeStrategy::kSample;
    return c;
  }
};

// Reference model or external command, plus optional scorer model.
struct GeneratorFlags {
  std::string model;
  std::string external_cmd;

  void Register(CLI::App* app) {
    app->add_option("--model", model, "Reference path model (JSON)");
    app->add_option("--external-cmd", external_cmd, "External generator command");
  }

  struct Loaded {
    std::unique_ptr<pathlm::PathModel> model;
    std::unique_ptr<pathlm::PathGenerator> generator;
  };

  Loaded Load(Manifest& manifest) const {
    Loaded out;
    if (model.empty() && external_cmd.empty()) {
      throw Error(ErrorKind::kInvalidArgument, "one of --model or --external-cmd is required");
    }
    if (!model.empty()) {
      out.model = std::make_unique<pathlm::PathModel>(pathlm::PathModel::LoadFile(model));
      manifest.inputs.push_back(model);
    }
    if (!external_cmd.empty()) {
      out.generator = std::make_unique<pathlm::ExternalPathGenerator>(external_cmd, out.model.get());
    } else {
      out.generator = std::make_unique<pathlm::NgramPathGenerator>(*out.model);
    }
    return out;
  }
};

struct Options {
  // shared
  std::string out_path;
  uint64_t seed = 0;
  int workers = 1;
  // ingest / sample-paths
  std::string assertions;
  std::string graph;
  std::string exclude_file;
  bool no_inverses = false;
  uint64_t count = 1000;
  int max_hops = 6;
  bool allow_backtrack = false;
  bool degree_start = false;
  // build-idf
  std::string corpus;
  // train-pathlm
  std::string paths;
  int order = 3;
  double smoothing = 0.01;
  bool one_entity = false;
  // gen-path
  std::string head;
  std::string tail;
  std::string require;
  int num_samples = 1;
  std::string format = "seq";
  bool serve = false;
  std::string templates;
  // prep-crg
  std::string instances;
  std::string phase = "train";
  std::string idf;
  std::string tagger_cmd;
  int q = 5;
  int d = 2;
  double perplexity_factor = 2.0;
  std::string mean_basis = "all";
  std::string gold_match = "exact";
  bool keep_unknown_entities = false;
  std::string skip_log;
  // augment
  std::string dialogues;
  double threshold = 0.7;
  int max_history = 2;
  std::string scorer_cmd;
  // synth-tc
  int max_per_mechanism = 2;
  std::string mechanisms = "1,2,3";
  std::string generator_cmd;
  bool no_balance = false;
  // eval / probe / clean
  std::string input;
  std::string metrics = "bleu,rouge_l";
  std::string ratings;
  double clean_threshold = 0.75;
  std::string basis = "target";
  // steer
  std::string context;
  std::string target;
  // replay
  std::string manifest;
  bool check = false;

  DecodeFlags decode;
  GeneratorFlags gen;
};

std::string PathLine(const KnowledgePath& p, const std::string& format,
                     const pathlm::PathQuery& q, const pathlm::RelationTemplateTable* templates) {
  if (format == "path") return p.ToLine();
  if (format == "text") return pathlm::RenderText(p, *templates);
  pathlm::FormatOptions fo;
  fo.wc_entities = q.required;
  fo.allow_off_path = true;
  return pathlm::FormatSequence(p, q.required.empty() ? pathlm::SequenceMode::kHeadTail : q.mode, fo);
}

int RunIngest(const Options& o, Manifest& m, std::ostream& out) {
  m.inputs.push_back(o.assertions);
  if (!o.exclude_file.empty()) m.inputs.push_back(o.exclude_file);
  const auto graph = kg::LoadGraphFile(o.assertions, GraphConfigFrom(o.exclude_file, o.no_inverses));
  WriteAtomically(o.out_path, [&](std::ostream& f) { graph.Save(f); });
  m.outputs.push_back(o.out_path);
  out << "concepts\t" << graph.ConceptCount() << "\nedges\t" << graph.EdgeCount()
      << "\nrelations\t" << graph.RelationCount() << '\n';
  return kExitOk;
}

int RunSamplePaths(const Options& o, Manifest& m, std::ostream& out) {
  m.inputs.push_back(o.graph);
  const auto graph = kg::OpenGraph(o.graph, GraphConfigFrom(o.exclude_file, o.no_inverses));
  sampler::SamplerConfig config;
  config.max_hops = o.max_hops;
  config.seed = o.seed;
  config.count = o.count;
  config.allow_immediate_backtrack = o.allow_backtrack;
  config.degree_proportional_start = o.degree_start;
  config.Validate();
  uint64_t written = 0;
  const auto start = std::chrono::steady_clock::now();
  WriteAtomically(o.out_path, [&](std::ostream& f) {
    written = sampler::WriteCorpus(graph, config, static_cast<unsigned>(std::max(1, o.workers)), f);
  });
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  m.outputs.push_back(o.out_path);
  out << "paths\t" << written << "\nseconds\t" << secs << '\n';
  return kExitOk;
}

int RunBuildIdf(const Options& o, Manifest& m, std::ostream& out) {
  m.inputs.push_back(o.corpus);
  auto in = OpenInput(o.corpus);
  const auto table = entities::IdfTable::Build(in);
  WriteAtomically(o.out_path, [&](std::ostream& f) { table.Save(f); });
  m.outputs.push_back(o.out_path);
  out << "tokens\t" << table.size() << "\ndefault\t" << table.default_value() << '\n';
  return kExitOk;
}

int RunTrainPathlm(const Options& o, Manifest& m, std::ostream& out) {
  m.inputs.push_back(o.paths);
  auto in = OpenInput(o.paths);
  const auto corpus = sampler::ReadCorpus(in);
  pathlm::TrainOptions options;
  options.order = o.order;
  options.smoothing = o.smoothing;
  options.seed = o.seed;
  options.include_one_entity = o.one_entity;
  const auto model = pathlm::PathModel::Train(corpus, options);
  WriteAtomically(o.out_path, [&](std::ostream& f) { model.Save(f); });
  m.outputs.push_back(o.out_path);
  out << "paths\t" << corpus.size() << "\nvocabulary\t" << model.vocabulary().size() << '\n';
  return kExitOk;
}

int RunGenPath(const Options& o, Manifest& m, std::istream& in, std::ostream& out) {
  const auto decode = o.decode.Build(o.seed, o.num_samples);
  if (o.serve) {
    if (o.gen.model.empty()) throw Error(ErrorKind::kInvalidArgument, "--serve needs --model");
    const auto model = pathlm::PathModel::LoadFile(o.gen.model);
    pathlm::ServeQueries(model, decode, in, out);
    return kExitOk;
  }
  if (o.head.empty() || o.tail.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "--head and --tail are required");
  }
  auto loaded = o.gen.Load(m);
  pathlm::PathQuery q;
  q.head = text::NormalizeConcept(o.head);
  q.tail = text::NormalizeConcept(o.tail);
  for (const auto& e : SplitList(o.require)) q.required.push_back(text::NormalizeConcept(e));
  q.mode = q.required.empty() ? pathlm::SequenceMode::kHeadTail
                              : (q.required.size() == 1 ? pathlm::SequenceMode::kOneEntity
                                                        : pathlm::SequenceMode::kWillContain);
  const auto templates = Templates(o.templates);
  std::vector<std::string> lines;
  for (const auto& p : loaded.generator->Generate(q, decode)) {
    lines.push_back(PathLine(p, o.format, q, &templates));
  }
  if (o.out_path.empty()) {
    for (const auto& l : lines) out << l << '\n';
  } else {
    WriteLines(o.out_path, lines);
    m.outputs.push_back(o.out_path);
  }
  return kExitOk;
}

struct EntityStack {
  std::unique_ptr<entities::Tagger> tagger;
  entities::IdfTable idf{1.0};
  std::unique_ptr<kg::KnowledgeGraph> graph;
  pipeline::EntityResources resources;
};

void BuildEntityStack(const Options& o, Manifest& m, const pathlm::PathGenerator& generator,
                      EntityStack& s) {
  if (o.tagger_cmd.empty()) {
    s.tagger = std::make_unique<entities::LexiconTagger>();
  } else {
    s.tagger = std::make_unique<entities::CommandTagger>(o.tagger_cmd);
  }
  if (!o.idf.empty()) {
    s.idf = entities::IdfTable::LoadFile(o.idf);
    m.inputs.push_back(o.idf);
  }
  s.resources.tagger = s.tagger.get();
  s.resources.idf = &s.idf;
  if (!o.graph.empty()) {
    s.graph = std::make_unique<kg::KnowledgeGraph>(kg::OpenGraph(o.graph));
    m.inputs.push_back(o.graph);
    const kg::KnowledgeGraph* g = s.graph.get();
    s.resources.extract.in_vocab = [g](std::string_view c) { return g->Contains(c); };
  } else {
    const pathlm::PathGenerator* g = &generator;
    s.resources.extract.in_vocab = [g](std::string_view c) { return g->Knows(c); };
  }
}

pipeline::PipelineConfig PipelineConfigFrom(const Options& o) {
  pipeline::PipelineConfig c;
  c.q = o.q;
  c.d = o.d;
  c.perplexity_factor = o.perplexity_factor;
  c.mean_basis = o.mean_basis == "after-repetition" ? pipeline::MeanBasis::kAfterRepetition
                                                    : pipeline::MeanBasis::kAllCandidates;
  c.gold_match = o.gold_match == "lemma" ? pipeline::GoldMatch::kLemma : pipeline::GoldMatch::kExact;
  c.restrict_to_generator_vocab = !o.keep_unknown_entities;
  c.decode = o.decode.Build(o.seed, o.q);
  c.seed = o.seed;
  return c;
}

int RunPrepCrg(const Options& o, Manifest& m, std::ostream& out) {
  auto loaded = o.gen.Load(m);
  EntityStack stack;
  BuildEntityStack(o, m, *loaded.generator, stack);
  m.inputs.push_back(o.instances);
  auto in = OpenInput(o.instances);
  const auto instances = pipeline::ReadInstances(in);
  const auto templates = Templates(o.templates);
  if (!o.templates.empty()) m.inputs.push_back(o.templates);
  const auto phase = o.phase == "infer" ? entities::Phase::kInfer : entities::Phase::kTrain;
  const auto batch = pipeline::PrepareBatch(instances, phase, *loaded.generator,
                                            PipelineConfigFrom(o), stack.resources, templates,
                                            o.workers);
  WriteLines(o.out_path, batch.records);
  m.outputs.push_back(o.out_path);
  const std::string skip_path = o.skip_log.empty() ? o.out_path + ".skipped.jsonl" : o.skip_log;
  WriteLines(skip_path, batch.skipped);
  m.outputs.push_back(skip_path);
  out << "instances\t" << instances.size() << "\nrecords\t" << batch.records.size()
      << "\nskipped\t" << batch.skipped.size() << '\n';
  return kExitOk;
}

int RunAugment(const Options& o, Manifest& m, std::ostream& out) {
  m.inputs.push_back(o.dialogues);
  auto in = OpenInput(o.dialogues);
  const auto records = augment::ReadDialogueRecords(in);
  augment::AugmentConfig config;
  config.threshold = o.threshold;
  config.max_history = o.max_history;
  const auto built = augment::BuildInstances(records, config);
  std::unique_ptr<Scorer> scorer;
  if (o.scorer_cmd.empty()) {
    scorer = std::make_unique<tcmetric::ReferenceScorer>();
  } else {
    scorer = std::make_unique<CommandScorer>(o.scorer_cmd);
  }
  const auto result = augment::FilterAugmented(built.instances, *scorer, config);
  std::vector<std::string> lines;
  for (const auto& c : result.kept) {
    Json j;
    if (!c.instance.id.empty()) j["id"] = c.instance.id;
    j["context"] = c.instance.context;
    j["target"] = c.instance.target;
    j["response"] = *c.instance.response;
    j["score"] = *c.score;
    lines.push_back(j.dump());
  }
  WriteLines(o.out_path, lines);
  m.outputs.push_back(o.out_path);
  std::vector<std::string> log;
  for (const auto& s : built.skipped) log.push_back(Json{{"skipped", s}}.dump());
  for (size_t i = 0; i < result.scored.size(); ++i) {
    Json j;
    j["index"] = i;
    if (!result.scored[i].instance.id.empty()) j["id"] = result.scored[i].instance.id;
    if (result.scored[i].score) {
      j["score"] = *result.scored[i].score;
    } else {
      j["error"] = "ScorerFailure";
    }
    log.push_back(j.dump());
  }
  const std::string log_path = o.out_path + ".scores.jsonl";
  WriteLines(log_path, log);
  m.outputs.push_back(log_path);
  out << "records\t" << records.size() << "\ncandidates\t" << built.instances.size()
      << "\nkept\t" << result.kept.size() << "\nscorer_failures\t" << result.failures.size()
      << '\n';
  return kExitOk;
}

int RunSynthTc(const Options& o, Manifest& m, std::ostream& out, std::ostream& err) {
  m.inputs.push_back(o.instances);
  auto in = OpenInput(o.instances);
  const auto dataset = pipeline::ReadInstances(in);
  tcmetric::SynthConfig config;
  config.seed = o.seed;
  config.max_per_mechanism = o.max_per_mechanism;
  const auto mechs = SplitList(o.mechanisms);
  const auto has = [&](const char* k) { return std::find(mechs.begin(), mechs.end(), k) != mechs.end(); };
  config.random_swap = has("1");
  config.generated_response = has("2");
  config.same_target = has("3");
  std::unique_ptr<tcmetric::ResponseGenerator> generator;
  if (!o.generator_cmd.empty()) {
    generator = std::make_unique<tcmetric::CommandResponseGenerator>(o.generator_cmd);
  }
  auto result = tcmetric::SynthesizeNegatives(dataset, generator.get(), config);
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  auto triples = o.no_balance ? std::move(result.triples)
                              : tcmetric::Balance(result.triples, MixSeed(o.seed, 0xba1a));
  std::vector<std::string> lines;
  size_t pos = 0;
  for (const auto& t : triples) {
    lines.push_back(tcmetric::TripleToJson(t));
    pos += t.label == tcmetric::Label::kPositive ? 1 : 0;
  }
  WriteLines(o.out_path, lines);
  m.outputs.push_back(o.out_path);
  out << "positives\t" << pos << "\nnegatives\t" << triples.size() - pos << '\n';
  return kExitOk;
}

std::vector<evalkit::BleuCase> HypothesisCases(const std::vector<evalkit::EvalInstance>& data) {
  std::vector<evalkit::BleuCase> cases;
  for (const auto& e : data) cases.push_back({e.hypothesis, e.references});
  return cases;
}

void Emit(const Options& o, Manifest& m, std::ostream& out, const std::vector<std::string>& lines) {
  if (o.out_path.empty()) {
    for (const auto& l : lines) out << l << '\n';
  } else {
    WriteLines(o.out_path, lines);
    m.outputs.push_back(o.out_path);
  }
}

std::string Fixed(double v) {
  std::ostringstream ss;
  ss << std::setprecision(6) << std::fixed << v;
  return ss.str();
}

int RunEval(const Options& o, Manifest& m, std::ostream& out) {
  std::vector<std::string> lines{"metric\tvalue"};
  if (!o.input.empty()) {
    m.inputs.push_back(o.input);
    auto in = OpenInput(o.input);
    const auto cases = HypothesisCases(evalkit::ReadEvalInstances(in));
    for (const auto& name : SplitList(o.metrics)) {
      lines.push_back(name + "\t" + Fixed(evalkit::MetricByName(name)(cases)));
    }
  }
  if (!o.ratings.empty()) {
    m.inputs.push_back(o.ratings);
    auto in = OpenInput(o.ratings);
    const auto ratings = evalkit::ReadRatings(in);
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& r : ratings) {
      xs.push_back(r.metric);
      ys.push_back(r.human);
    }
    lines.push_back("spearman\t" + Fixed(evalkit::Spearman(xs, ys)));
  }
  if (o.input.empty() && o.ratings.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "--input or --ratings is required");
  }
  Emit(o, m, out, lines);
  return kExitOk;
}

int RunProbe(const Options& o, Manifest& m, std::ostream& out, std::ostream& err) {
  m.inputs.push_back(o.input);
  auto in = OpenInput(o.input);
  const auto data = evalkit::ReadEvalInstances(in);
  std::vector<std::string> lines{"metric\trow\tvalue"};
  for (const auto& name : SplitList(o.metrics)) {
    const auto result = evalkit::BiasProbe(data, evalkit::MetricByName(name));
    for (const auto& row : result.rows) lines.push_back(name + "\t" + row.name + "\t" + Fixed(row.score));
    for (const auto& f : result.flags) err << "flag: " << f << '\n';
  }
  Emit(o, m, out, lines);
  return kExitOk;
}

int RunClean(const Options& o, Manifest& m, std::ostream& out) {
  m.inputs.push_back(o.instances);
  auto in = OpenInput(o.instances);
  const auto data = pipeline::ReadInstances(in);
  const auto basis = o.basis == "response" ? evalkit::OverlapBasis::kResponse
                     : o.basis == "max"    ? evalkit::OverlapBasis::kMax
                                           : evalkit::OverlapBasis::kTarget;
  const auto result = evalkit::CleanTestSet(data, o.clean_threshold, basis);
  std::vector<std::string> lines;
  for (const auto& inst : result.kept) {
    Json j;
    if (!inst.id.empty()) j["id"] = inst.id;
    j["context"] = inst.context;
    j["target"] = inst.target;
    j["response"] = *inst.response;
    lines.push_back(j.dump());
  }
  WriteLines(o.out_path, lines);
  m.outputs.push_back(o.out_path);
  out << "kept\t" << result.kept.size() << "\nremoved\t" << result.removed.size() << '\n';
  return kExitOk;
}

int RunSteer(const Options& o, Manifest& m, std::istream& in, std::ostream& out) {
  auto loaded = o.gen.Load(m);
  EntityStack stack;
  BuildEntityStack(o, m, *loaded.generator, stack);
  const auto templates = Templates(o.templates);

  pipeline::TransitionInstance inst;
  inst.context = {o.context};
  inst.target = o.target;
  auto ents = pipeline::ExtractInstanceEntities(inst, stack.resources);
  std::erase_if(ents.context.entities, [&](const auto& e) { return !loaded.generator->Knows(e); });
  std::erase_if(ents.target.entities, [&](const auto& e) { return !loaded.generator->Knows(e); });
  if (ents.context.entities.empty()) throw Error(ErrorKind::kNoEntities, "no usable context entity", 0);
  if (ents.target.entities.empty()) throw Error(ErrorKind::kNoEntities, "no usable target entity", 1);
  const auto pair = entities::SelectPairs(entities::ScorePairs(ents.context, ents.target, stack.idf),
                                          entities::Phase::kInfer, 1)
                        .front();

  out << "context: " << o.context << "\ntarget: " << o.target << "\nhead: "
      << text::ConceptToText(pair.head) << "\ntail: " << text::ConceptToText(pair.tail) << '\n';
  std::vector<std::string> emitted;
  std::string line;
  uint64_t round = 0;
  while (true) {
    out << "keyword> " << std::flush;
    if (!std::getline(in, line)) break;
    const std::string keyword = text::NormalizeConcept(line);
    if (keyword.empty()) break;
    if (!loaded.generator->Knows(keyword)) {
      out << "unknown keyword: " << text::ConceptToText(keyword) << '\n';
      continue;
    }
    pathlm::PathQuery q;
    q.mode = pathlm::SequenceMode::kOneEntity;
    q.head = pair.head;
    q.tail = pair.tail;
    if (keyword != pair.head && keyword != pair.tail) q.required = {keyword};
    if (q.required.empty()) q.mode = pathlm::SequenceMode::kHeadTail;
    std::vector<KnowledgePath> paths;
    try {
      paths = loaded.generator->Generate(q, o.decode.Build(MixSeed(o.seed, round++), o.num_samples));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kNoPathFound) throw;
      out << "no path through " << text::ConceptToText(keyword) << '\n';
      continue;
    }
    std::vector<std::string> rendered;
    for (size_t i = 0; i < paths.size(); ++i) {
      rendered.push_back(pathlm::RenderText(paths[i], templates));
      out << "  [" << i + 1 << "] " << rendered.back() << "\n      " << paths[i].ToLine() << '\n';
    }
    size_t pick = 1;
    if (paths.size() > 1) {
      out << "pick> " << std::flush;
      if (!std::getline(in, line)) break;
      try {
        pick = std::stoul(std::string(text::Trim(line)));
      } catch (const std::exception&) {
        pick = 0;
      }
      if (pick < 1 || pick > paths.size()) {
        out << "no such candidate\n";
        continue;
      }
    }
    const std::string seq =
        pipeline::AssembleCrgSequence(rendered[pick - 1], o.target, inst.context, std::nullopt);
    out << seq << '\n';
    emitted.push_back(seq);
  }
  if (!o.out_path.empty()) {
    WriteLines(o.out_path, emitted);
    m.outputs.push_back(o.out_path);
  }
  return kExitOk;
}

int RunReplay(const Options& o, std::istream& in, std::ostream& out, std::ostream& err) {
  const auto j = nlohmann::json::parse(ReadFile(o.manifest));
  const auto args = j.at("argv").get<std::vector<std::string>>();
  if (!args.empty() && args.front() == "replay") {
    throw Error(ErrorKind::kInvalidArgument, "manifest records a replay");
  }
  const fs::path previous = fs::current_path();
  fs::current_path(j.at("cwd").get<std::string>());
  int code = kExitOk;
  try {
    code = Dispatch(args, in, out, err);
    if (code == kExitOk && o.check) {
      for (const auto& output : j.at("outputs")) {
        const std::string path = output.at("path").get<std::string>();
        const std::string want = output.at("digest").get<std::string>();
        const std::string got = FileDigest(path);
        if (got != want) {
          err << "mismatch: " << path << " " << got << " != " << want << '\n';
          code = kExitData;
        } else {
          out << "match\t" << path << '\n';
        }
      }
    }
  } catch (...) {
    fs::current_path(previous);
    throw;
  }
  fs::current_path(previous);
  return code;
}

}  // namespace

int Dispatch(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"pathbridge: knowledge-path tooling for target-guided dialogue data", "pathbridge"};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "TOML configuration file (flags take precedence)");
  app.require_subcommand(1);
  Options o;

  auto add_out = [&](CLI::App* s, bool required) {
    auto* opt = s->add_option("--out", o.out_path, "Output file");
    if (required) opt->required();
  };
  auto add_seed = [&](CLI::App* s) {
    s->add_option("--seed", o.seed, "Random seed (mandatory)")->required();
  };
  auto add_workers = [&](CLI::App* s) {
    s->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  };

  auto* ingest = app.add_subcommand("ingest", "Load an assertions TSV and write a graph cache");
  ingest->add_option("--assertions", o.assertions, "relation<TAB>head<TAB>tail file")->required();
  ingest->add_option("--exclude-file", o.exclude_file, "Relation names to drop, one per line");
  ingest->add_flag("--no-inverses", o.no_inverses, "Do not synthesize inverse edges");
  add_out(ingest, true);

  auto* sample = app.add_subcommand("sample-paths", "Sample a random-walk path corpus");
  sample->add_option("--graph", o.graph, "Assertions TSV or graph cache")->required();
  sample->add_option("--count", o.count, "Number of paths")->capture_default_str();
  sample->add_option("--max-hops", o.max_hops, "Walk length cap")->capture_default_str();
  sample->add_flag("--allow-backtrack", o.allow_backtrack, "Allow undoing the previous edge");
  sample->add_flag("--degree-start", o.degree_start, "Degree-proportional start nodes");
  sample->add_option("--exclude-file", o.exclude_file, "Relation names to drop (TSV input only)");
  add_seed(sample);
  add_workers(sample);
  add_out(sample, true);

  auto* idf = app.add_subcommand("build-idf", "Build an IDF table, one document per line");
  idf->add_option("--corpus", o.corpus, "Text corpus")->required();
  add_out(idf, true);

  auto* train = app.add_subcommand("train-pathlm", "Train the reference path model");
  train->add_option("--paths", o.paths, "Path corpus")->required();
  train->add_option("--order", o.order, "n-gram order")->capture_default_str();
  train->add_option("--smoothing", o.smoothing, "Additive smoothing constant")->capture_default_str();
  train->add_flag("--one-entity", o.one_entity, "Also train single-keyword sequences");
  add_seed(train);
  add_out(train, true);

  auto* gen = app.add_subcommand("gen-path", "Generate bridging paths");
  o.gen.Register(gen);
  o.decode.Register(gen);
  gen->add_option("--head", o.head, "Head concept");
  gen->add_option("--tail", o.tail, "Tail concept");
  gen->add_option("--require", o.require, "Required entities, comma separated");
  gen->add_option("--num-samples", o.num_samples, "Paths to return")->capture_default_str();
  gen->add_option("--format", o.format, "seq, path or text")
      ->check(CLI::IsMember({"seq", "path", "text"}))
      ->capture_default_str();
  gen->add_option("--templates", o.templates, "Relation template TSV");
  gen->add_flag("--serve", o.serve, "Answer query lines from stdin (external generator mode)");
  add_seed(gen);
  add_out(gen, false);

  auto* prep = app.add_subcommand("prep-crg", "Build response-generator conditioning data");
  o.gen.Register(prep);
  o.decode.Register(prep);
  prep->add_option("--instances", o.instances, "Instance JSONL")->required();
  prep->add_option("--phase", o.phase, "train or infer")
      ->check(CLI::IsMember({"train", "infer"}))
      ->capture_default_str();
  prep->add_option("--idf", o.idf, "IDF table TSV");
  prep->add_option("--graph", o.graph, "Graph used for entity surface preference");
  prep->add_option("--tagger-cmd", o.tagger_cmd, "External POS tagger command");
  prep->add_option("--q", o.q, "Paths sampled per pair")->capture_default_str();
  prep->add_option("--d", o.d, "Training pair budget")->capture_default_str();
  prep->add_option("--perplexity-factor", o.perplexity_factor, "Cutoff multiple of the mean")
      ->capture_default_str();
  prep->add_option("--mean-basis", o.mean_basis, "all or after-repetition")
      ->check(CLI::IsMember({"all", "after-repetition"}))
      ->capture_default_str();
  prep->add_option("--gold-match", o.gold_match, "exact or lemma")
      ->check(CLI::IsMember({"exact", "lemma"}))
      ->capture_default_str();
  prep->add_flag("--keep-unknown-entities", o.keep_unknown_entities,
                 "Keep entities the generator does not know");
  prep->add_option("--templates", o.templates, "Relation template TSV");
  prep->add_option("--skip-log", o.skip_log, "Skip-log JSONL (default <out>.skipped.jsonl)");
  add_seed(prep);
  add_workers(prep);
  add_out(prep, true);

  auto* aug = app.add_subcommand("augment", "Turn dialogues with role frames into instances");
  aug->add_option("--dialogues", o.dialogues, "Dialogue JSONL")->required();
  aug->add_option("--threshold", o.threshold, "Minimum coherence score")->capture_default_str();
  aug->add_option("--max-history", o.max_history, "Context turns kept")->capture_default_str();
  aug->add_option("--scorer-cmd", o.scorer_cmd, "External scorer (reference scorer otherwise)");
  add_out(aug, true);

  auto* synth = app.add_subcommand("synth-tc", "Synthesize coherence-metric training data");
  synth->add_option("--instances", o.instances, "Gold instance JSONL")->required();
  synth->add_option("--max-per-mechanism", o.max_per_mechanism, "Negatives per mechanism")
      ->capture_default_str();
  synth->add_option("--mechanisms", o.mechanisms, "Enabled mechanisms among 1,2,3")->capture_default_str();
  synth->add_option("--generator-cmd", o.generator_cmd, "Response generator command");
  synth->add_flag("--no-balance", o.no_balance, "Skip positive repetition and shuffling");
  add_seed(synth);
  add_out(synth, true);

  auto* eval = app.add_subcommand("eval", "Reference-based metrics and rank correlation");
  eval->add_option("--input", o.input, "Eval JSONL with hypotheses");
  eval->add_option("--metrics", o.metrics, "bleu,rouge_l")->capture_default_str();
  eval->add_option("--ratings", o.ratings, "CSV instance_id,metric_score,human_rating");
  add_out(eval, false);

  auto* probe = app.add_subcommand("probe", "Metric bias probe");
  probe->add_option("--input", o.input, "Eval JSONL")->required();
  probe->add_option("--metrics", o.metrics, "bleu,rouge_l")->capture_default_str();
  add_out(probe, false);

  auto* clean = app.add_subcommand("clean", "Remove test instances whose response copies the target");
  clean->add_option("--instances", o.instances, "Instance JSONL")->required();
  clean->add_option("--threshold", o.clean_threshold, "Maximum overlap kept")->capture_default_str();
  clean->add_option("--basis", o.basis, "target, response or max")
      ->check(CLI::IsMember({"target", "response", "max"}))
      ->capture_default_str();
  add_out(clean, true);

  auto* steer = app.add_subcommand("steer", "Interactive keyword-steered path selection");
  o.gen.Register(steer);
  o.decode.Register(steer);
  steer->add_option("--context", o.context, "Context utterance")->required();
  steer->add_option("--target", o.target, "Target sentence")->required();
  steer->add_option("--idf", o.idf, "IDF table TSV");
  steer->add_option("--graph", o.graph, "Graph used for entity surface preference");
  steer->add_option("--tagger-cmd", o.tagger_cmd, "External POS tagger command");
  steer->add_option("--templates", o.templates, "Relation template TSV");
  steer->add_option("--num-samples", o.num_samples, "Candidates per keyword")->capture_default_str();
  add_seed(steer);
  add_out(steer, false);

  auto* replay = app.add_subcommand("replay", "Re-run a command from its manifest");
  replay->add_option("--manifest", o.manifest, "Manifest JSON")->required();
  replay->add_flag("--check", o.check, "Compare output digests with the manifest");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  Manifest m;
  m.subcommand = sub->get_name();
  m.args = args;
  m.config = sub->config_to_str(true, false);
  m.started = NowUtc();
  if (const auto* opt = sub->get_option_no_throw("--seed"); opt != nullptr && opt->count() > 0) {
    m.seed = o.seed;
  }

  try {
    int code = kExitOk;
    const std::string& name = m.subcommand;
    if (name == "ingest") code = RunIngest(o, m, out);
    else if (name == "sample-paths") code = RunSamplePaths(o, m, out);
    else if (name == "build-idf") code = RunBuildIdf(o, m, out);
    else if (name == "train-pathlm") code = RunTrainPathlm(o, m, out);
    else if (name == "gen-path") code = RunGenPath(o, m, in, out);
    else if (name == "prep-crg") code = RunPrepCrg(o, m, out);
    else if (name == "augment") code = RunAugment(o, m, out);
    else if (name == "synth-tc") code = RunSynthTc(o, m, out, err);
    else if (name == "eval") code = RunEval(o, m, out);
    else if (name == "probe") code = RunProbe(o, m, out, err);
    else if (name == "clean") code = RunClean(o, m, out);
    else if (name == "steer") code = RunSteer(o, m, in, out);
    else if (name == "replay") return RunReplay(o, in, out, err);
    if (code == kExitOk) m.Write();
    return code;
  } catch (const Error& e) {
    err << "error: " << ErrorKindName(e.kind()) << ": " << e.what() << '\n';
    return e.kind() == ErrorKind::kInvalidArgument ? kExitUsage : kExitData;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace pathbridge
