// lidkit/mclr.hpp

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

#ifndef LIDKIT_MCLR_HPP_
#define LIDKIT_MCLR_HPP_

#include <vector>

#include "lidkit/scores.hpp"
#include "lidkit/types.hpp"

namespace lidkit {

// Affine score calibration: a shared positive scale plus per-language
// offsets, trained by flat-prior multiclass cross-entropy.
struct MclrModel {
  double alpha = 1.0;
  Vector beta;

  void validate() const;
};

// Flat-prior multiclass cross-entropy of softmax(sum_s w_s scores_s + beta):
// every class contributes equally regardless of its trial count. Shared by
// MCLR calibration (S = 1, w clamped positive) and fusion training.
// Returns the objective; fills the gradients when non-null.
double flat_prior_ce(const std::vector<Matrix> &system_scores,
                     const std::vector<int> &labels, const Vector &weights,
                     const Vector &beta, double l2, Vector *grad_weights,
                     Vector *grad_beta);

struct CeOptimOptions {
  int max_iters = 500;
  double grad_tol = 1e-7;
  bool clamp_weights_positive = false;
  double l2 = 0.0;
};

struct CeOptimResult {
  Vector weights;
  Vector beta;
  double initial_ce = 0.0;
  double final_ce = 0.0;
  int iterations = 0;
};

// Gradient descent with Armijo backtracking from the given start point;
// deterministic. Convexity of the objective makes the result
// initialization-independent up to the softmax gauge.
CeOptimResult minimize_flat_prior_ce(const std::vector<Matrix> &system_scores,
                                     const std::vector<int> &labels,
                                     Vector init_weights, Vector init_beta,
                                     const CeOptimOptions &opts);

MclrModel mclr_train(const ScoreMatrix &scores, const std::vector<int> &labels,
                     double l2 = 0.0);

// s' = alpha s + beta, then llr_l = s'_l - log(mean_{k != l} exp(s'_k)).
ScoreMatrix mclr_apply(const MclrModel &model, const ScoreMatrix &scores);

}  // namespace lidkit

#endif  // LIDKIT_MCLR_HPP_
