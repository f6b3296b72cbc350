// src/mclr.cpp

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

#include "lidkit/mclr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lidkit/util.hpp"

namespace lidkit {

void MclrModel::validate() const {
  if (!(alpha > 0.0)) throw NumericError("MclrModel: alpha must be positive");
  if (!beta.allFinite()) throw NumericError("MclrModel: non-finite beta");
}

namespace {

// Per-trial weights making every present class contribute equally.
Vector trial_weights(const std::vector<int> &labels, int n_langs) {
  std::vector<int> counts(n_langs, 0);
  for (int lab : labels) {
    if (lab < 0 || lab >= n_langs) throw DataError("mclr: label out of range");
    ++counts[lab];
  }
  int present = 0;
  for (int c : counts) present += c > 0 ? 1 : 0;
  if (present < 2) throw DataError("mclr: need at least 2 classes present");
  Vector w(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    w(i) = 1.0 / (static_cast<double>(present) * counts[labels[i]]);
  }
  return w;
}

constexpr double kWeightFloor = 1e-8;

}  // namespace

double flat_prior_ce(const std::vector<Matrix> &system_scores,
                     const std::vector<int> &labels, const Vector &weights,
                     const Vector &beta, double l2, Vector *grad_weights,
                     Vector *grad_beta) {
  int S = static_cast<int>(system_scores.size());
  if (S < 1) throw DataError("flat_prior_ce: no systems");
  int n = static_cast<int>(system_scores[0].rows());
  int L = static_cast<int>(system_scores[0].cols());
  for (const auto &m : system_scores) {
    if (m.rows() != n || m.cols() != L) throw DataError("flat_prior_ce: shape mismatch");
  }
  if (static_cast<int>(labels.size()) != n) throw DataError("flat_prior_ce: label count");
  if (weights.size() != S || beta.size() != L) throw DataError("flat_prior_ce: param shape");

  Vector u = trial_weights(labels, L);

  Matrix z = Matrix::Zero(n, L);
  for (int s = 0; s < S; ++s) z += weights(s) * system_scores[s];
  z.rowwise() += beta.transpose();

  Vector row_max = z.rowwise().maxCoeff();
  Matrix shifted = z.colwise() - row_max;
  Matrix expz = shifted.array().exp();
  Vector denom = expz.rowwise().sum();

  double ce = 0.0;
  for (int i = 0; i < n; ++i) {
    ce += u(i) * (std::log(denom(i)) + row_max(i) - z(i, labels[i]));
  }
  ce += 0.5 * l2 * (weights.squaredNorm() + beta.squaredNorm());

  if (grad_weights != nullptr || grad_beta != nullptr) {
    Matrix dz = expz.array().colwise() / denom.array();  // softmax
    for (int i = 0; i < n; ++i) {
      dz.row(i) *= u(i);
      dz(i, labels[i]) -= u(i);
    }
    if (grad_beta != nullptr) {
      *grad_beta = dz.colwise().sum().transpose() + l2 * beta;
    }
    if (grad_weights != nullptr) {
      grad_weights->resize(S);
      for (int s = 0; s < S; ++s) {
        (*grad_weights)(s) = dz.cwiseProduct(system_scores[s]).sum() + l2 * weights(s);
      }
    }
  }
  return ce;
}

CeOptimResult minimize_flat_prior_ce(const std::vector<Matrix> &system_scores,
                                     const std::vector<int> &labels,
                                     Vector init_weights, Vector init_beta,
                                     const CeOptimOptions &opts) {
  CeOptimResult result;
  Vector w = std::move(init_weights);
  Vector beta = std::move(init_beta);
  int S = static_cast<int>(w.size());

  Vector gw, gb;
  double f = flat_prior_ce(system_scores, labels, w, beta, opts.l2, &gw, &gb);
  result.initial_ce = f;

  double step = 1.0;
  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    // Projected-gradient infinity norm as the stopping measure.
    double gnorm = gb.size() > 0 ? gb.cwiseAbs().maxCoeff() : 0.0;
    for (int s = 0; s < S; ++s) {
      double g = gw(s);
      if (opts.clamp_weights_positive && w(s) <= kWeightFloor && g > 0.0) g = 0.0;
      gnorm = std::max(gnorm, std::abs(g));
    }
    if (gnorm < opts.grad_tol) break;

    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      Vector w_new = w - step * gw;
      Vector beta_new = beta - step * gb;
      if (opts.clamp_weights_positive) w_new = w_new.cwiseMax(kWeightFloor);
      double f_new =
          flat_prior_ce(system_scores, labels, w_new, beta_new, opts.l2, nullptr, nullptr);
      if (f_new <= f - 1e-4 * ((w - w_new).squaredNorm() + (beta - beta_new).squaredNorm()) /
                           std::max(step, 1e-300)) {
        w = std::move(w_new);
        beta = std::move(beta_new);
        f = f_new;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    f = flat_prior_ce(system_scores, labels, w, beta, opts.l2, &gw, &gb);
    step = std::min(step * 2.0, 1e6);
  }

  result.weights = std::move(w);
  result.beta = std::move(beta);
  result.final_ce = f;
  result.iterations = iter;
  return result;
}

MclrModel mclr_train(const ScoreMatrix &scores, const std::vector<int> &labels,
                     double l2) {
  scores.validate();
  CeOptimOptions opts;
  opts.clamp_weights_positive = true;
  opts.l2 = l2;
  CeOptimResult res = minimize_flat_prior_ce(
      {scores.scores}, labels, Vector::Ones(1), Vector::Zero(scores.num_languages()),
      opts);
  MclrModel model;
  model.alpha = res.weights(0);
  model.beta = res.beta;
  if (model.alpha <= kWeightFloor * 2) {
    log_warn("mclr_train: alpha converged to the positivity floor");
  }
  model.validate();
  return model;
}

ScoreMatrix mclr_apply(const MclrModel &model, const ScoreMatrix &scores) {
  scores.validate();
  model.validate();
  int L = scores.num_languages();
  if (model.beta.size() != L) throw DataError("mclr_apply: language count mismatch");
  if (L < 2) throw DataError("mclr_apply: need at least 2 languages for LLRs");

  Matrix calibrated = model.alpha * scores.scores;
  calibrated.rowwise() += model.beta.transpose();

  ScoreMatrix out;
  out.utt_ids = scores.utt_ids;
  out.language_order = scores.language_order;
  out.kind = ScoreKind::llr;
  out.scores = Matrix(scores.num_utterances(), L);
  double log_rest = std::log(static_cast<double>(L - 1));
  for (int i = 0; i < scores.num_utterances(); ++i) {
    for (int l = 0; l < L; ++l) {
      double mx = -std::numeric_limits<double>::infinity();
      for (int k = 0; k < L; ++k) {
        if (k != l) mx = std::max(mx, calibrated(i, k));
      }
      double sum = 0.0;
      for (int k = 0; k < L; ++k) {
        if (k != l) sum += std::exp(calibrated(i, k) - mx);
      }
      out.scores(i, l) = calibrated(i, l) - (mx + std::log(sum) - log_rest);
    }
  }
  out.validate();
  return out;
}

}  // namespace lidkit
