// Copyright 2026 The Nester Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NESTER_TOOLS_CLI_HPP_
#define NESTER_TOOLS_CLI_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "nester/causal.hpp"
#include "nester/data.hpp"
#include "nester/synth.hpp"

namespace nester::cli {

enum class Command { kSynthesize, kBaseline, kDepthSweep, kDiagnose, kGenData };

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitValidation = 2,
  kExitSearch = 3,
};

// Flat key=value configuration with dotted section prefixes, e.g.
// `synth.max_depth=5`. Unknown keys are rejected.
class RunConfig {
 public:
  RunConfig();

  static RunConfig from_text(const std::string& text);
  static RunConfig from_file(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  bool explicitly_set(const std::string& key) const { return explicit_.count(key) > 0; }

  // Every key with its resolved value, sorted by key.
  const std::map<std::string, std::string>& values() const { return values_; }

  Command command() const;
  std::uint64_t seed() const;
  std::filesystem::path out_dir() const;
  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  TrainConfig train_config(const std::string& section) const;
  SynthConfig synth_config() const;
  SplitSpec split_spec() const;
  CsvSchema csv_schema() const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> explicit_;
};

// Loads or generates the dataset named by the config.
ObservationalDataset load_dataset(const RunConfig& cfg);

Grammar grammar_for(const RunConfig& cfg, int input_dim);

struct ModelMetrics {
  std::string name;
  MetricReport in_sample;
  MetricReport out_sample;
};

// Writes report.txt, report.json and (when `frontier` is non-empty)
// frontier.tsv under `out`.
void report(const std::filesystem::path& out, const RunConfig& cfg, const SynthResult* result,
            const std::vector<ModelMetrics>& metrics, const std::vector<ModelMetrics>& baselines);

// Executes the configured command; returns an ExitCode. Errors are printed
// as one line on stderr.
int run(const RunConfig& cfg);

// Entry point used by the nester binary.
int main(int argc, char** argv);

}  // namespace nester::cli

#endif  // NESTER_TOOLS_CLI_HPP_
