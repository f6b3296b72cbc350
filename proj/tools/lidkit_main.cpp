// tools/lidkit_main.cpp

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

#include <CLI11.hpp>

#include <cstdio>
#include <string>

#include "lidkit/config.hpp"
#include "lidkit/metrics.hpp"
#include "lidkit/pipeline.hpp"
#include "lidkit/util.hpp"

namespace {

struct CliState {
  std::string config_path;
  bool force = false;
  int jobs = 0;
  int seed_override = -1;

  lidkit::ExperimentConfig load() const {
    lidkit::ExperimentConfig cfg = lidkit::ExperimentConfig::from_file(config_path);
    if (seed_override >= 0) {
      cfg.seed = static_cast<std::uint64_t>(seed_override);
      cfg.synth.seed = cfg.seed;
    }
    return cfg;
  }

  lidkit::RunOptions run_options() const {
    lidkit::RunOptions opts;
    opts.force = force;
    opts.jobs = jobs;
    return opts;
  }
};

void add_common(CLI::App *cmd, CliState &state) {
  cmd->add_option("--config", state.config_path, "Experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_flag("--force", state.force, "Recompute stages even when cached");
  cmd->add_option("--jobs", state.jobs, "Worker threads (default: logical cores)");
  cmd->add_option("--seed", state.seed_override, "Override the config seed");
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"lidkit - spoken language identification toolkit"};
  app.require_subcommand(1);
  CliState state;

  auto *synth = app.add_subcommand("synth", "Generate the synthetic corpus");
  add_common(synth, state);
  auto *features = app.add_subcommand("features", "Extract front-end features");
  add_common(features, state);
  auto *train_ubm = app.add_subcommand("train-ubm", "Train the universal background model");
  add_common(train_ubm, state);
  auto *stats = app.add_subcommand("stats", "Accumulate Baum-Welch statistics");
  add_common(stats, state);
  auto *train_tv = app.add_subcommand("train-tv", "Train the total-variability matrix");
  add_common(train_tv, state);
  auto *ivectors = app.add_subcommand("ivectors", "Extract i-vectors");
  add_common(ivectors, state);

  auto *train_backend = app.add_subcommand("train-backend", "Train one back-end");
  add_common(train_backend, state);
  std::string backend_name;
  train_backend->add_option("--backend", backend_name, "gb_mclr|plda|svm|pairnet|tandem_svm")
      ->required();

  auto *score = app.add_subcommand("score", "Score a manifest with the frozen pipeline");
  add_common(score, state);
  std::string score_manifest_path, score_out;
  score->add_option("--manifest", score_manifest_path, "Manifest to score")
      ->required()
      ->check(CLI::ExistingFile);
  score->add_option("--out", score_out, "Output score TSV")->required();

  auto *fuse = app.add_subcommand("fuse", "Train the fusion model");
  add_common(fuse, state);

  auto *eval = app.add_subcommand("eval", "Evaluate a score TSV against a manifest");
  std::string eval_scores_path, eval_manifest_path;
  eval->add_option("--scores", eval_scores_path, "Score TSV (per-cluster LLRs)")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--manifest", eval_manifest_path, "Manifest with reference labels")
      ->required()
      ->check(CLI::ExistingFile);

  auto *run = app.add_subcommand("run", "Run the full pipeline and report metrics");
  add_common(run, state);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      std::printf("%s\n", lidkit::stage_synth(state.load(), state.run_options()).c_str());
    } else if (features->parsed()) {
      std::printf("%s\n", lidkit::stage_features(state.load(), state.run_options()).c_str());
    } else if (train_ubm->parsed()) {
      std::printf("%s\n", lidkit::stage_train_ubm(state.load(), state.run_options()).c_str());
    } else if (stats->parsed()) {
      std::printf("%s\n", lidkit::stage_stats(state.load(), state.run_options()).c_str());
    } else if (train_tv->parsed()) {
      std::printf("%s\n", lidkit::stage_train_tv(state.load(), state.run_options()).c_str());
    } else if (ivectors->parsed()) {
      std::printf("%s\n", lidkit::stage_ivectors(state.load(), state.run_options()).c_str());
    } else if (train_backend->parsed()) {
      std::printf(
          "%s\n",
          lidkit::stage_train_backend(state.load(), state.run_options(), backend_name)
              .c_str());
    } else if (score->parsed()) {
      lidkit::ScoreCommandResult r = lidkit::score_manifest(
          state.load(), state.run_options(), score_manifest_path, score_out);
      std::printf("%s\n", r.scores_path.c_str());
      if (!r.skipped.empty()) {
        std::fprintf(stderr, "skipped %zu utterance(s); see %s.skipped.tsv\n",
                     r.skipped.size(), r.scores_path.c_str());
      }
    } else if (fuse->parsed()) {
      std::printf("%s\n", lidkit::stage_fuse(state.load(), state.run_options()).c_str());
    } else if (eval->parsed()) {
      lidkit::EvalReport report = lidkit::eval_scores(eval_scores_path, eval_manifest_path);
      std::fputs(lidkit::report_text(report).c_str(), stdout);
    } else if (run->parsed()) {
      lidkit::RunResult r = lidkit::run_experiment(state.load(), state.run_options());
      std::fputs(lidkit::report_text(r.fused).c_str(), stdout);
      for (const auto &b : r.backends) {
        std::printf("backend.%s.accuracy: %s\n", b.name.c_str(),
                    lidkit::format_double(b.accuracy).c_str());
        std::printf("backend.%s.cavg: %s\n", b.name.c_str(),
                    lidkit::format_double(b.cavg).c_str());
      }
      std::printf("report: %s\n", r.report_path.c_str());
    }
  } catch (const lidkit::ConfigError &e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const lidkit::NumericError &e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 4;
  } catch (const lidkit::DataError &e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const lidkit::Error &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
  return 0;
}
