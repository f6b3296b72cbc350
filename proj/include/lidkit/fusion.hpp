// lidkit/fusion.hpp

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

#ifndef LIDKIT_FUSION_HPP_
#define LIDKIT_FUSION_HPP_

#include <map>
#include <string>
#include <vector>

#include "lidkit/scores.hpp"
#include "lidkit/types.hpp"

namespace lidkit {

// Multiclass logistic regression fusion: one weight per subsystem plus
// per-language offsets.
struct FusionModel {
  Vector weights;  // S
  Vector beta;     // L

  void validate() const;
};

struct FusionTrainResult {
  FusionModel model;
  std::vector<double> fold_heldout_ce;  // cross-entropy on each held-out fold
  double final_ce = 0.0;                // training CE of the full refit
};

// Cross-validated estimate (deterministic folds by utt_id hash), final
// model refit on all data, no regularization.
FusionTrainResult fusion_train(const std::vector<ScoreMatrix> &subsystem_scores,
                               const std::vector<int> &labels, int folds = 2);

int fusion_fold_of(const std::string &utt_id, int folds);

ScoreMatrix fusion_apply(const FusionModel &model,
                         const std::vector<ScoreMatrix> &subsystem_scores);

// Within each cluster: llr_l = s_l - log(mean_{k in C, k != l} exp(s_k)).
// Singleton clusters pass through with a warning.
ScoreMatrix to_llr_per_cluster(const ScoreMatrix &scores,
                               const std::map<std::string, std::string> &lang_to_cluster);

}  // namespace lidkit

#endif  // LIDKIT_FUSION_HPP_
