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

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "pathbridge/kg.hpp"
#include "pathbridge/path_model.hpp"
#include "pathbridge/sampler.hpp"

namespace pathbridge::testing {

inline std::string DataPath(const std::string& name) {
  return std::string(PATHBRIDGE_TEST_DATA) + "/" + name;
}

inline std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void Spit(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << body;
}

// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  ScratchDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("pathbridge-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  std::string File(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline kg::KnowledgeGraph LoadGraphText(const std::string& tsv, const kg::GraphConfig& config = {}) {
  std::istringstream in(tsv);
  return kg::LoadGraph(in, config);
}

inline const kg::KnowledgeGraph& FixtureGraph() {
  static const kg::KnowledgeGraph graph = kg::LoadGraphFile(DataPath("graph50.tsv"), {});
  return graph;
}

// Reference model trained on a seeded walk corpus over the fixture graph.
inline const pathlm::PathModel& FixtureModel() {
  static const pathlm::PathModel model = [] {
    sampler::SamplerConfig config;
    config.seed = 3;
    config.count = 20000;
    const auto corpus = sampler::SampleCorpus(FixtureGraph(), config, 1);
    pathlm::TrainOptions options;
    options.seed = 1;
    return pathlm::PathModel::Train(corpus, options);
  }();
  return model;
}

}  // namespace pathbridge::testing
