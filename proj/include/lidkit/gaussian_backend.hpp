// lidkit/gaussian_backend.hpp

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

#ifndef LIDKIT_GAUSSIAN_BACKEND_HPP_
#define LIDKIT_GAUSSIAN_BACKEND_HPP_

#include <string>
#include <vector>

#include "lidkit/scores.hpp"
#include "lidkit/types.hpp"

namespace lidkit {

// Per-language Gaussian classifier over i-vectors. A pooled within-class
// covariance is smoothed towards per-language empirical covariances with
// factor gamma; gamma = 0 is the shared-covariance linear back-end.
struct GaussianBackend {
  std::vector<std::string> language_order;  // sorted, unique
  Matrix means;                             // L x R
  Matrix sigma_global;                      // R x R
  std::vector<Matrix> sigma_smoothed;       // L of R x R
  double gamma = 0.1;

  void validate() const;
};

// labels[i] indexes language_order. Languages with fewer than 2 samples
// fall back to the global covariance with a warning.
GaussianBackend gb_train(const Matrix &ivectors, const std::vector<int> &labels,
                         const std::vector<std::string> &language_order,
                         double gamma = 0.1);

// Exact log N(w; mean_l, sigma_l) per language, normalizing constants included.
Vector gb_score(const GaussianBackend &model, const Vector &w);

ScoreMatrix gb_score_matrix(const GaussianBackend &model, const Matrix &ivectors,
                            const std::vector<std::string> &utt_ids);

}  // namespace lidkit

#endif  // LIDKIT_GAUSSIAN_BACKEND_HPP_
