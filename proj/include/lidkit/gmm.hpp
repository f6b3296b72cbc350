// lidkit/gmm.hpp

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

#ifndef LIDKIT_GMM_HPP_
#define LIDKIT_GMM_HPP_

#include <cstdint>
#include <vector>

#include "lidkit/types.hpp"

namespace lidkit {

enum class CovKind { diagonal, full };

struct GmmModel {
  Vector weights;                 // K, simplex
  Matrix means;                   // K x F
  Matrix diag_vars;               // K x F (diagonal kind)
  std::vector<Matrix> full_covs;  // K of F x F (full kind)
  CovKind covariance_kind = CovKind::diagonal;

  int num_components() const { return static_cast<int>(weights.size()); }
  int dim() const { return static_cast<int>(means.cols()); }

  // Weight simplex, variance positivity, SPD (Cholesky) for full kind.
  void validate() const;

  // Identity hash over all parameters; binds TvModels to their UBM.
  std::uint64_t param_hash() const;
};

// Zero- and first-order sufficient statistics under UBM posteriors.
// First-order sums are stored uncentered; centering happens where the
// total-variability model consumes them.
struct BwStats {
  Vector n;  // K
  Matrix f;  // K x F
  std::int64_t frames_total = 0;

  BwStats &operator+=(const BwStats &other);
  void validate() const;
};

// Per-EM-phase log-likelihood trace; phase boundaries are mixture splits.
struct TrainTrace {
  std::vector<std::vector<double>> phases;
};

// log(w_k N(x_t | mean_k, cov_k)) for every frame/component: T x K.
Matrix log_component_likelihoods(const GmmModel &model, const Matrix &frames);

// Posterior responsibilities (rows sum to 1) and the total log-likelihood.
Matrix posteriors(const GmmModel &model, const Matrix &frames,
                  double *total_ll = nullptr);

double total_log_likelihood(const GmmModel &model, const Matrix &frames);

// Diagonal-covariance EM with binary-split initialization from the global
// Gaussian. `iters` EM iterations run after each split and at the final
// size. Variances are floored at var_floor_frac times the global per-dim
// variance.
GmmModel train_diag_gmm(const Matrix &frames, int K, int iters,
                        double var_floor_frac, std::uint64_t seed,
                        TrainTrace *trace = nullptr, int jobs = 1);

// Continues EM with full covariances seeded from the diagonal model.
GmmModel refine_full_gmm(const GmmModel &diag, const Matrix &frames, int iters,
                         TrainTrace *trace = nullptr, int jobs = 1);

BwStats accumulate_stats(const GmmModel &ubm, const FeatureMatrix &feat);
BwStats accumulate_stats_rows(const GmmModel &ubm, const Matrix &rows);

// Relevance-MAP adaptation of the means, stacked component-major. With
// kl_normalize, block k is scaled by sqrt(w_k) Sigma_k^{-1/2} (the KL
// kernel map used for supervector SVMs).
Vector map_supervector(const GmmModel &ubm, const FeatureMatrix &feat,
                       double relevance, bool kl_normalize = false);
Vector map_supervector_from_stats(const GmmModel &ubm, const BwStats &stats,
                                  double relevance, bool kl_normalize = false);

// Every ceil(T/max_frames)-th row when T exceeds max_frames.
Matrix subsample_rows(const Matrix &rows, int max_frames);

}  // namespace lidkit

#endif  // LIDKIT_GMM_HPP_
