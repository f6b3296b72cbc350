// lidkit/plda.hpp

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

#ifndef LIDKIT_PLDA_HPP_
#define LIDKIT_PLDA_HPP_

#include <cstdint>
#include <vector>

#include "lidkit/types.hpp"

namespace lidkit {

// Simplified PLDA: x = mu + F h + e with class latent h ~ N(0, I_r) and
// residual e ~ N(0, sigma_w).
struct PldaModel {
  Vector mu;
  Matrix subspace;  // R x r between-class factor loadings
  Matrix sigma_w;   // R x R within-class covariance

  int dim() const { return static_cast<int>(mu.size()); }
  int rank() const { return static_cast<int>(subspace.cols()); }
  void validate() const;
};

struct PldaTrainResult {
  PldaModel model;
  std::vector<double> objective;  // marginal log-likelihood per iteration
};

// EM on class-grouped samples. rank is clipped to (number of classes - 1)
// with a warning when too large.
PldaTrainResult plda_train(const Matrix &ivectors, const std::vector<int> &labels,
                           int rank, int iters, std::uint64_t seed);

// log p(test | enroll_l) - log p(test), latent h marginalized exactly.
// One score per entry in enroll (ordered like the language list it came
// from); every language needs at least one enrollment vector.
Vector plda_score(const PldaModel &model, const std::vector<Matrix> &enroll,
                  const Vector &test);

// Marginal log-likelihood of the labeled set under the model (the EM
// objective; ignores nothing, so it is comparable across iterations).
double plda_marginal_loglik(const PldaModel &model, const Matrix &ivectors,
                            const std::vector<int> &labels);

}  // namespace lidkit

#endif  // LIDKIT_PLDA_HPP_
