// lidkit/tv.hpp

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

#ifndef LIDKIT_TV_HPP_
#define LIDKIT_TV_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "lidkit/frontend.hpp"
#include "lidkit/gmm.hpp"
#include "lidkit/types.hpp"

namespace lidkit {

// Total-variability model m = m0 + bias + T w, w ~ N(0, I). The bias
// accumulates the posterior means absorbed by minimum-divergence updates
// (the UBM means themselves stay untouched).
struct TvModel {
  Matrix T;     // (K*F) x R, rows component-major
  Vector bias;  // K*F
  int rank = 0;
  std::uint64_t ubm_hash = 0;

  void validate() const;
};

struct TvTrainResult {
  TvModel model;
  Matrix train_ivectors;          // one row per training utterance
  Vector posterior_mean;          // aggregate posterior mean after the last step
  Matrix posterior_covariance;    // aggregate posterior covariance (about the mean)
  std::vector<double> objective;  // marginal log-likelihood before each iteration
};

struct TvTrainOptions {
  int iters = 10;
  std::uint64_t seed = 0;
  bool min_divergence = true;
  double ridge = 1e-6;
  int jobs = 1;
};

TvTrainResult train_tv(const std::vector<BwStats> &stats, const GmmModel &ubm,
                       int rank, const TvTrainOptions &opts);

// Caches the Sigma^{-1/2}-whitened factor loadings for repeated extraction.
class TvExtractor {
 public:
  TvExtractor(const TvModel &tv, const GmmModel &ubm);

  // Posterior mean w = (I + T' Sigma^-1 N T)^-1 T' Sigma^-1 f~, optionally
  // with the posterior covariance.
  Vector extract(const BwStats &stats, Matrix *posterior_cov = nullptr) const;

  // Posterior precision (prior included) and linear term for one utterance.
  void build_system(const BwStats &stats, Matrix *precision, Vector *linear) const;

  // Parameter-dependent part of log p(f | w = 0): the cross and quadratic
  // center terms that change when the bias moves. Needed so objectives are
  // comparable across minimum-divergence reparameterizations.
  double data_term(const BwStats &stats) const;

  int rank() const { return rank_; }
  Matrix::ConstRowXpr center(int k) const { return center_.row(k); }

 private:
  Vector whiten_centered(int k, const BwStats &stats) const;

  int K_, F_, rank_;
  std::vector<Matrix> t_white_;   // K of F x R
  std::vector<Matrix> gram_;      // K of R x R
  Matrix center_;                 // K x F, UBM means + bias blocks
  Matrix center_white_;           // K x F, Sigma^{-1/2} centers
  Matrix white_diag_;             // K x F (diagonal UBM)
  std::vector<Matrix> white_full_;  // K of F x F (full UBM)
};

Vector extract_ivector(const TvModel &tv, const GmmModel &ubm, const BwStats &stats);

// Marginal log-likelihood of the stats under the factor model, up to terms
// independent of T and the prior. A non-standard prior N(prior_mean,
// prior_cov) can be supplied to check reparameterization invariance of the
// minimum-divergence step.
double tv_marginal_loglik(const TvModel &tv, const GmmModel &ubm,
                          const std::vector<BwStats> &stats,
                          const Vector *prior_mean = nullptr,
                          const Matrix *prior_cov = nullptr);

enum class NormKind { whiten, efr };

struct Normalizer {
  Vector mean;
  Matrix transform;
  NormKind kind = NormKind::whiten;
  int iterations = 1;
  bool length_norm = false;

  void validate() const;
};

// whiten: eigendecomposition whitening of the sample covariance.
// efr: per iteration, center + whiten + project to unit norm; the affine
// part is composed across iterations and the norm step is applied when the
// normalizer is applied.
Normalizer fit_normalizer(const Matrix &ivectors, NormKind kind, int iterations = 1,
                          bool length_norm = false);

Vector apply_normalizer(const Normalizer &norm, const Vector &w);
Matrix apply_normalizer_rows(const Normalizer &norm, const Matrix &ivectors);

// Extractor recipes from the submission this toolkit reproduces, at both
// published and desk scale.
struct ExtractorPreset {
  std::string name;
  int ubm_size = 0;
  CovKind ubm_kind = CovKind::diagonal;
  bool refine_full = false;  // diagonal UBM used as the full-cov starting point
  int tv_rank = 0;
  NormKind norm_kind = NormKind::whiten;
  int norm_iterations = 1;
  bool length_norm = false;
  CmvnScope cmvn_scope = CmvnScope::per_utterance;
  double cmvn_window_s = 0.0;
  bool train_split_two_thirds = false;
};

// tag: one of i2r, lium, ntu, uef; desk_scale shrinks K and R while keeping
// the recipe structure.
ExtractorPreset extractor_preset(const std::string &tag, bool desk_scale);

}  // namespace lidkit

#endif  // LIDKIT_TV_HPP_
