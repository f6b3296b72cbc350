// src/gaussian_backend.cpp

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

#include "lidkit/gaussian_backend.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

#include "lidkit/util.hpp"

namespace lidkit {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;

Matrix ridge_to_spd(Matrix cov) {
  double ridge = std::max(1e-12, 1e-10 * cov.diagonal().mean());
  for (int attempt = 0; attempt < 30; ++attempt) {
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() == Eigen::Success) return cov;
    cov.diagonal().array() += ridge;
    ridge *= 10.0;
  }
  throw NumericError("gb_train: covariance could not be floored to SPD");
}

void check_language_order(const std::vector<std::string> &order) {
  if (order.empty()) throw DataError("gaussian backend: empty language order");
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (!(order[i - 1] < order[i])) {
      throw DataError("gaussian backend: language_order must be sorted and unique");
    }
  }
}
}  // namespace

void GaussianBackend::validate() const {
  check_language_order(language_order);
  int L = static_cast<int>(language_order.size());
  if (means.rows() != L || static_cast<int>(sigma_smoothed.size()) != L) {
    throw DataError("gaussian backend: shape mismatch");
  }
  for (const auto &cov : sigma_smoothed) {
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw NumericError("gaussian backend: smoothed covariance not SPD");
    }
  }
}

GaussianBackend gb_train(const Matrix &ivectors, const std::vector<int> &labels,
                         const std::vector<std::string> &language_order,
                         double gamma) {
  check_language_order(language_order);
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gb_train: gamma must be in [0,1]");
  int n = static_cast<int>(ivectors.rows());
  int r = static_cast<int>(ivectors.cols());
  int L = static_cast<int>(language_order.size());
  if (static_cast<int>(labels.size()) != n) throw DataError("gb_train: label count mismatch");

  std::vector<int> counts(L, 0);
  for (int lab : labels) {
    if (lab < 0 || lab >= L) throw DataError("gb_train: label out of range");
    ++counts[lab];
  }
  for (int l = 0; l < L; ++l) {
    if (counts[l] == 0) {
      throw DataError("gb_train: language " + language_order[l] + " has no samples");
    }
  }

  GaussianBackend model;
  model.language_order = language_order;
  model.gamma = gamma;
  model.means = Matrix::Zero(L, r);
  for (int i = 0; i < n; ++i) model.means.row(labels[i]) += ivectors.row(i);
  for (int l = 0; l < L; ++l) model.means.row(l) /= counts[l];

  // Pooled within-class covariance plus per-language empirical ones.
  Matrix pooled = Matrix::Zero(r, r);
  std::vector<Matrix> per_lang(L, Matrix::Zero(r, r));
  for (int i = 0; i < n; ++i) {
    Vector d = ivectors.row(i).transpose() - model.means.row(labels[i]).transpose();
    Matrix outer = d * d.transpose();
    pooled += outer;
    per_lang[labels[i]] += outer;
  }
  pooled /= n;
  model.sigma_global = ridge_to_spd(std::move(pooled));

  model.sigma_smoothed.resize(L);
  for (int l = 0; l < L; ++l) {
    if (counts[l] < 2) {
      log_warn("gb_train: language " + language_order[l] +
               " has fewer than 2 samples; using the global covariance");
      model.sigma_smoothed[l] = model.sigma_global;
      continue;
    }
    Matrix empirical = per_lang[l] / counts[l];
    model.sigma_smoothed[l] =
        ridge_to_spd((1.0 - gamma) * model.sigma_global + gamma * empirical);
  }
  model.validate();
  return model;
}

Vector gb_score(const GaussianBackend &model, const Vector &w) {
  int L = static_cast<int>(model.language_order.size());
  int r = static_cast<int>(model.means.cols());
  if (w.size() != r) throw DataError("gb_score: dimension mismatch");
  Vector s(L);
  for (int l = 0; l < L; ++l) {
    Eigen::LLT<Matrix> llt(model.sigma_smoothed[l]);
    if (llt.info() != Eigen::Success) throw NumericError("gb_score: covariance not SPD");
    double logdet = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
    Vector d = w - model.means.row(l).transpose();
    double maha = llt.matrixL().solve(d).squaredNorm();
    s(l) = -0.5 * (r * kLog2Pi + logdet + maha);
  }
  return s;
}

ScoreMatrix gb_score_matrix(const GaussianBackend &model, const Matrix &ivectors,
                            const std::vector<std::string> &utt_ids) {
  int L = static_cast<int>(model.language_order.size());
  int r = static_cast<int>(model.means.cols());
  if (ivectors.cols() != r) throw DataError("gb_score_matrix: dimension mismatch");
  int n = static_cast<int>(ivectors.rows());
  if (static_cast<int>(utt_ids.size()) != n) {
    throw DataError("gb_score_matrix: utt_id count mismatch");
  }

  ScoreMatrix sm;
  sm.utt_ids = utt_ids;
  sm.language_order = model.language_order;
  sm.kind = ScoreKind::loglik;
  sm.scores = Matrix(n, L);
  for (int l = 0; l < L; ++l) {
    Eigen::LLT<Matrix> llt(model.sigma_smoothed[l]);
    if (llt.info() != Eigen::Success) throw NumericError("gb_score: covariance not SPD");
    double logdet = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
    double c = -0.5 * (r * kLog2Pi + logdet);
    Matrix centered = ivectors.rowwise() - model.means.row(l);  // n x r
    Matrix y = llt.matrixL().solve(centered.transpose());       // r x n
    sm.scores.col(l) = (-0.5 * y.colwise().squaredNorm().array() + c).transpose();
  }
  sm.validate();
  return sm;
}

}  // namespace lidkit
