// src/plda.cpp

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

#include "lidkit/plda.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

#include "lidkit/util.hpp"

namespace lidkit {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;

Matrix ridge_to_spd(Matrix cov) {
  double ridge = std::max(1e-12, 1e-9 * cov.diagonal().mean());
  for (int attempt = 0; attempt < 30; ++attempt) {
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() == Eigen::Success) return cov;
    cov.diagonal().array() += ridge;
    ridge *= 10.0;
  }
  throw NumericError("plda: covariance could not be floored to SPD");
}

double logdet_llt(const Eigen::LLT<Matrix> &llt) {
  return 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
}

struct ClassStats {
  double count = 0.0;
  Vector sum;      // sum of centered samples
  Matrix scatter;  // sum of centered outer products
};

std::vector<ClassStats> gather_classes(const Matrix &centered,
                                       const std::vector<int> &labels, int n_classes) {
  int r = static_cast<int>(centered.cols());
  std::vector<ClassStats> cls(n_classes);
  for (auto &c : cls) {
    c.sum = Vector::Zero(r);
    c.scatter = Matrix::Zero(r, r);
  }
  for (int i = 0; i < centered.rows(); ++i) {
    int lab = labels[i];
    cls[lab].count += 1.0;
    cls[lab].sum += centered.row(i).transpose();
    cls[lab].scatter.noalias() +=
        centered.row(i).transpose() * centered.row(i);
  }
  return cls;
}

// Marginal log-likelihood of one class's samples with h integrated out.
double class_loglik(const ClassStats &c, const Matrix &subspace,
                    const Eigen::LLT<Matrix> &sw_llt, double sw_logdet, int dim) {
  int rank = static_cast<int>(subspace.cols());
  Matrix ft_swinv = sw_llt.solve(subspace).transpose();  // r x R
  Matrix precision =
      Matrix::Identity(rank, rank) + c.count * ft_swinv * subspace;
  Eigen::LLT<Matrix> p_llt(precision);
  if (p_llt.info() != Eigen::Success) throw NumericError("plda: E-step not SPD");
  Vector b = ft_swinv * c.sum;
  double quad_full = sw_llt.solve(c.scatter).trace();
  return -0.5 * c.count * (dim * kLog2Pi + sw_logdet) - 0.5 * quad_full -
         0.5 * logdet_llt(p_llt) + 0.5 * b.dot(p_llt.solve(b));
}

}  // namespace

void PldaModel::validate() const {
  if (rank() > dim()) throw DataError("PldaModel: rank exceeds dimension");
  if (!mu.allFinite() || !subspace.allFinite() || !sigma_w.allFinite()) {
    throw NumericError("PldaModel: non-finite parameters");
  }
  Eigen::LLT<Matrix> llt(sigma_w);
  if (llt.info() != Eigen::Success) throw NumericError("PldaModel: sigma_w not SPD");
}

PldaTrainResult plda_train(const Matrix &ivectors, const std::vector<int> &labels,
                           int rank, int iters, std::uint64_t seed) {
  int n = static_cast<int>(ivectors.rows());
  int r = static_cast<int>(ivectors.cols());
  if (static_cast<int>(labels.size()) != n) throw DataError("plda_train: label count");
  if (rank < 1) throw ConfigError("plda_train: rank must be >= 1");
  if (rank > r) throw ConfigError("plda_train: rank exceeds i-vector dimension");

  int n_classes = 0;
  for (int lab : labels) {
    if (lab < 0) throw DataError("plda_train: negative label");
    n_classes = std::max(n_classes, lab + 1);
  }
  int present = 0;
  {
    std::vector<int> counts(n_classes, 0);
    for (int lab : labels) ++counts[lab];
    for (int c : counts) present += c > 0 ? 1 : 0;
  }
  if (present < 2) throw DataError("plda_train: need at least 2 classes");
  if (rank > present - 1) {
    log_warn("plda_train: rank " + std::to_string(rank) + " clipped to " +
             std::to_string(present - 1) + " (classes - 1)");
    rank = present - 1;
  }

  PldaModel model;
  model.mu = ivectors.colwise().mean();
  Matrix centered = ivectors.rowwise() - model.mu.transpose();
  auto cls = gather_classes(centered, labels, n_classes);

  // Within-class covariance for the residual init.
  Matrix within = Matrix::Zero(r, r);
  Matrix between = Matrix::Zero(r, r);
  for (const auto &c : cls) {
    if (c.count < 1.0) continue;
    within += c.scatter - c.sum * c.sum.transpose() / c.count;
    between += c.sum * c.sum.transpose() / c.count;
  }
  model.sigma_w = ridge_to_spd(within / n);
  between /= n;

  // Between-class PCA start; random inits overshoot badly in the first
  // M-step and EM then takes hundreds of iterations to recover the scale.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(between);
  if (eig.info() != Eigen::Success) throw NumericError("plda_train: eigensolver failed");
  model.subspace = Matrix(r, rank);
  Rng rng = Rng(seed).fork("plda_init");
  double jitter = 1e-3 * std::sqrt(std::max(eig.eigenvalues().maxCoeff(), 1e-12));
  for (int j = 0; j < rank; ++j) {
    int col = r - 1 - j;  // eigenvalues ascend
    double scale = std::sqrt(std::max(eig.eigenvalues()(col), 1e-12));
    model.subspace.col(j) = scale * eig.eigenvectors().col(col);
    for (int i = 0; i < r; ++i) model.subspace(i, j) += jitter * rng.normal();
  }

  PldaTrainResult result;
  for (int iter = 0; iter < iters; ++iter) {
    Eigen::LLT<Matrix> sw_llt(model.sigma_w);
    if (sw_llt.info() != Eigen::Success) throw NumericError("plda_train: sigma_w not SPD");
    double sw_logdet = logdet_llt(sw_llt);
    Matrix ft_swinv = sw_llt.solve(model.subspace).transpose();  // rank x R

    double obj = 0.0;
    Matrix acc_a = Matrix::Zero(rank, rank);
    Matrix acc_c = Matrix::Zero(r, rank);
    std::vector<Vector> h_mean(n_classes);
    std::vector<Matrix> h_second(n_classes);
    for (int lab = 0; lab < n_classes; ++lab) {
      const auto &c = cls[lab];
      if (c.count < 1.0) continue;
      Matrix precision =
          Matrix::Identity(rank, rank) + c.count * ft_swinv * model.subspace;
      Eigen::LLT<Matrix> p_llt(precision);
      if (p_llt.info() != Eigen::Success) throw NumericError("plda_train: E-step not SPD");
      Vector b = ft_swinv * c.sum;
      Vector h = p_llt.solve(b);
      Matrix cov = p_llt.solve(Matrix::Identity(rank, rank));
      h_mean[lab] = h;
      h_second[lab] = cov + h * h.transpose();
      acc_a += c.count * h_second[lab];
      acc_c += c.sum * h.transpose();
      obj += -0.5 * c.count * (r * kLog2Pi + sw_logdet) -
             0.5 * sw_llt.solve(c.scatter).trace() - 0.5 * logdet_llt(p_llt) +
             0.5 * b.dot(h);
    }
    result.objective.push_back(obj);

    Eigen::LLT<Matrix> a_llt(acc_a);
    if (a_llt.info() != Eigen::Success) {
      acc_a.diagonal().array() += 1e-9 * std::max(1.0, acc_a.diagonal().mean());
      a_llt.compute(acc_a);
      if (a_llt.info() != Eigen::Success) {
        throw NumericError("plda_train: M-step normal equations not solvable");
      }
    }
    Matrix f_new = a_llt.solve(acc_c.transpose()).transpose();  // R x rank

    Matrix resid = Matrix::Zero(r, r);
    for (int lab = 0; lab < n_classes; ++lab) {
      const auto &c = cls[lab];
      if (c.count < 1.0) continue;
      Matrix cross = f_new * h_mean[lab] * c.sum.transpose();
      resid += c.scatter - cross - cross.transpose() +
               c.count * f_new * h_second[lab] * f_new.transpose();
    }
    model.subspace = std::move(f_new);
    model.sigma_w = ridge_to_spd(0.5 * (resid + resid.transpose()) / n);
  }

  model.validate();
  result.model = std::move(model);
  return result;
}

double plda_marginal_loglik(const PldaModel &model, const Matrix &ivectors,
                            const std::vector<int> &labels) {
  int n_classes = 0;
  for (int lab : labels) n_classes = std::max(n_classes, lab + 1);
  Matrix centered = ivectors.rowwise() - model.mu.transpose();
  auto cls = gather_classes(centered, labels, n_classes);
  Eigen::LLT<Matrix> sw_llt(model.sigma_w);
  if (sw_llt.info() != Eigen::Success) throw NumericError("plda: sigma_w not SPD");
  double sw_logdet = logdet_llt(sw_llt);
  double total = 0.0;
  for (const auto &c : cls) {
    if (c.count < 1.0) continue;
    total += class_loglik(c, model.subspace, sw_llt, sw_logdet, model.dim());
  }
  return total;
}

Vector plda_score(const PldaModel &model, const std::vector<Matrix> &enroll,
                  const Vector &test) {
  model.validate();
  int r = model.dim();
  int rank = model.rank();
  if (test.size() != r) throw DataError("plda_score: test dimension mismatch");

  Eigen::LLT<Matrix> sw_llt(model.sigma_w);
  if (sw_llt.info() != Eigen::Success) throw NumericError("plda_score: sigma_w not SPD");
  Matrix ft_swinv = sw_llt.solve(model.subspace).transpose();  // rank x R

  Vector test_centered = test - model.mu;

  auto gaussian_logpdf = [&](const Vector &x, const Vector &mean, const Matrix &cov) {
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) throw NumericError("plda_score: covariance not SPD");
    Vector d = x - mean;
    return -0.5 * (r * kLog2Pi + logdet_llt(llt) +
                   llt.matrixL().solve(d).squaredNorm());
  };

  double log_p_test = gaussian_logpdf(
      test_centered, Vector::Zero(r),
      model.sigma_w + model.subspace * model.subspace.transpose());

  Vector scores(enroll.size());
  for (std::size_t l = 0; l < enroll.size(); ++l) {
    const Matrix &e = enroll[l];
    if (e.rows() < 1) {
      throw DataError("plda_score: language " + std::to_string(l) +
                      " has no enrollment vectors");
    }
    if (e.cols() != r) throw DataError("plda_score: enrollment dimension mismatch");
    double n = static_cast<double>(e.rows());
    Vector sum = (e.rowwise() - model.mu.transpose()).colwise().sum().transpose();
    Matrix precision =
        Matrix::Identity(rank, rank) + n * ft_swinv * model.subspace;
    Eigen::LLT<Matrix> p_llt(precision);
    if (p_llt.info() != Eigen::Success) throw NumericError("plda_score: posterior not SPD");
    Vector h = p_llt.solve(ft_swinv * sum);
    Matrix h_cov = p_llt.solve(Matrix::Identity(rank, rank));
    // p(test | enroll) = N(mu + F h, sigma_w + F Cov F')
    double log_p_cond = gaussian_logpdf(
        test_centered, model.subspace * h,
        model.sigma_w + model.subspace * h_cov * model.subspace.transpose());
    scores(l) = log_p_cond - log_p_test;
  }
  return scores;
}

}  // namespace lidkit
