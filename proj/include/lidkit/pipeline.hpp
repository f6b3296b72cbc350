// lidkit/pipeline.hpp

// Copyright 2026  lidkit authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LIDKIT_PIPELINE_HPP_
#define LIDKIT_PIPELINE_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lidkit/config.hpp"
#include "lidkit/metrics.hpp"
#include "lidkit/model_io.hpp"
#include "lidkit/scores.hpp"

namespace lidkit {

struct RunOptions {
  bool force = false;
  int jobs = 0;  // 0 = config/default
  bool verbose = true;
};

struct BackendEval {
  std::string name;
  double accuracy = 0.0;
  double cavg = 0.0;
  double cllr = 0.0;
};

struct RunResult {
  EvalReport fused;
  std::vector<BackendEval> backends;
  std::vector<double> fusion_fold_ce;
  std::string report_path;
  std::string scores_path;
  std::vector<std::string> skipped;
};

// Executes features -> UBM -> stats -> TV -> i-vectors -> normalizer ->
// back-ends -> fusion -> eval, skipping stages whose outputs carry the
// current config hash unless forced.
RunResult run_experiment(const ExperimentConfig &cfg, const RunOptions &opts);

// Individual stages, for the matching CLI subcommands. Each returns the
// primary artifact path.
std::string stage_synth(const ExperimentConfig &cfg, const RunOptions &opts);
std::string stage_features(const ExperimentConfig &cfg, const RunOptions &opts);
std::string stage_train_ubm(const ExperimentConfig &cfg, const RunOptions &opts);
std::string stage_stats(const ExperimentConfig &cfg, const RunOptions &opts);
std::string stage_train_tv(const ExperimentConfig &cfg, const RunOptions &opts);
std::string stage_ivectors(const ExperimentConfig &cfg, const RunOptions &opts);
std::string stage_train_backend(const ExperimentConfig &cfg, const RunOptions &opts,
                                const std::string &backend);
std::string stage_fuse(const ExperimentConfig &cfg, const RunOptions &opts);

// Applies a frozen pipeline (models under cfg.output_dir) to another
// manifest; writes per-cluster LLR scores and a skipped-utterance table.
struct ScoreCommandResult {
  std::string scores_path;
  std::vector<std::string> skipped;
};
ScoreCommandResult score_manifest(const ExperimentConfig &cfg, const RunOptions &opts,
                                  const std::string &manifest_path,
                                  const std::string &out_path);

// EvalReport from a score TSV (treated as per-cluster LLRs) plus manifest
// labels; columns are matched by header names.
EvalReport eval_scores(const std::string &scores_path, const std::string &manifest_path);

}  // namespace lidkit

#endif  // LIDKIT_PIPELINE_HPP_
