// src/tv.cpp

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

#include "lidkit/tv.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>

#include "lidkit/util.hpp"

namespace lidkit {

void TvModel::validate() const {
  if (rank < 1) throw DataError("TvModel: rank must be >= 1");
  if (T.cols() != rank) throw DataError("TvModel: T column count != rank");
  if (!T.allFinite() || !bias.allFinite()) throw NumericError("TvModel: non-finite entries");
}

namespace {

Matrix chol_lower(const Matrix &m, double ridge) {
  Matrix a = m;
  for (int attempt = 0; attempt < 20; ++attempt) {
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    a.diagonal().array() += ridge;
    ridge *= 10.0;
  }
  throw NumericError("tv: matrix could not be factored");
}

}  // namespace

TvExtractor::TvExtractor(const TvModel &tv, const GmmModel &ubm) {
  tv.validate();
  if (tv.ubm_hash != 0 && tv.ubm_hash != ubm.param_hash()) {
    throw DataError("tv: UBM does not match the one the TvModel was trained with");
  }
  K_ = ubm.num_components();
  F_ = ubm.dim();
  rank_ = tv.rank;
  if (tv.T.rows() != static_cast<Eigen::Index>(K_) * F_) {
    throw DataError("tv: T row count does not match UBM K*F");
  }

  // Sigma_k^{-1/2}: reciprocal square roots for diagonal UBMs, explicit
  // L_k^{-1} for full ones.
  if (ubm.covariance_kind == CovKind::diagonal) {
    white_diag_ = ubm.diag_vars.cwiseSqrt().cwiseInverse();
  } else {
    white_full_.resize(K_);
    for (int k = 0; k < K_; ++k) {
      Eigen::LLT<Matrix> llt(ubm.full_covs[k]);
      if (llt.info() != Eigen::Success) {
        throw NumericError("tv: UBM covariance Cholesky failed");
      }
      white_full_[k] = llt.matrixL().solve(Matrix::Identity(F_, F_));
    }
  }

  t_white_.resize(K_);
  gram_.resize(K_);
  center_ = Matrix(K_, F_);
  center_white_ = Matrix(K_, F_);
  for (int k = 0; k < K_; ++k) {
    Matrix tk = tv.T.middleRows(static_cast<Eigen::Index>(k) * F_, F_);
    t_white_[k] = white_full_.empty()
                      ? Matrix(white_diag_.row(k).transpose().asDiagonal() * tk)
                      : Matrix(white_full_[k] * tk);
    gram_[k].noalias() = t_white_[k].transpose() * t_white_[k];
    center_.row(k) =
        ubm.means.row(k) + tv.bias.segment(static_cast<Eigen::Index>(k) * F_, F_).transpose();
    Vector c = center_.row(k).transpose();
    center_white_.row(k) =
        (white_full_.empty() ? Vector(c.cwiseProduct(white_diag_.row(k).transpose()))
                             : Vector(white_full_[k] * c))
            .transpose();
  }
}

double TvExtractor::data_term(const BwStats &stats) const {
  // sum_k [ f_k' S^-1 c_k - n_k c_k' S^-1 c_k / 2 ]
  //   = sum_k [ f~_k' S^-1 c_k + n_k |S^-1/2 c_k|^2 / 2 ]
  double total = 0.0;
  for (int k = 0; k < K_; ++k) {
    Vector centered = whiten_centered(k, stats);
    total += centered.dot(center_white_.row(k).transpose()) +
             0.5 * stats.n(k) * center_white_.row(k).squaredNorm();
  }
  return total;
}

Vector TvExtractor::whiten_centered(int k, const BwStats &stats) const {
  Vector centered = stats.f.row(k).transpose() - stats.n(k) * center_.row(k).transpose();
  if (white_full_.empty()) {
    return centered.cwiseProduct(white_diag_.row(k).transpose());
  }
  return white_full_[k] * centered;
}

void TvExtractor::build_system(const BwStats &stats, Matrix *precision,
                               Vector *linear) const {
  if (stats.n.size() != K_ || stats.f.rows() != K_ || stats.f.cols() != F_) {
    throw DataError("tv: stats shape does not match the UBM");
  }
  *precision = Matrix::Identity(rank_, rank_);
  *linear = Vector::Zero(rank_);
  for (int k = 0; k < K_; ++k) {
    if (stats.n(k) > 0.0) precision->noalias() += stats.n(k) * gram_[k];
    linear->noalias() += t_white_[k].transpose() * whiten_centered(k, stats);
  }
}

Vector TvExtractor::extract(const BwStats &stats, Matrix *posterior_cov) const {
  Matrix precision;
  Vector linear;
  build_system(stats, &precision, &linear);
  Eigen::LLT<Matrix> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw NumericError("tv: posterior precision not SPD");
  }
  Vector w = llt.solve(linear);
  if (posterior_cov != nullptr) {
    *posterior_cov = llt.solve(Matrix::Identity(rank_, rank_));
  }
  return w;
}

Vector extract_ivector(const TvModel &tv, const GmmModel &ubm, const BwStats &stats) {
  return TvExtractor(tv, ubm).extract(stats);
}

double tv_marginal_loglik(const TvModel &tv, const GmmModel &ubm,
                          const std::vector<BwStats> &stats, const Vector *prior_mean,
                          const Matrix *prior_cov) {
  TvExtractor ex(tv, ubm);
  int rank = ex.rank();
  Vector mu = prior_mean != nullptr ? *prior_mean : Vector::Zero(rank);
  Matrix s = prior_cov != nullptr ? *prior_cov : Matrix::Identity(rank, rank);
  Eigen::LLT<Matrix> s_llt(s);
  if (s_llt.info() != Eigen::Success) throw NumericError("tv: prior covariance not SPD");
  Matrix s_inv = s_llt.solve(Matrix::Identity(rank, rank));
  Vector s_inv_mu = s_llt.solve(mu);
  double mu_term = mu.dot(s_inv_mu);
  double logdet_s = 2.0 * Matrix(s_llt.matrixL()).diagonal().array().log().sum();

  // Per utterance, with M = T' Sigma^-1 N T and b = T' Sigma^-1 f~:
  //   log int exp(b'w - w'Mw/2) N(w; mu, S) dw
  //     = -(log|S| + log|M + S^-1|)/2 + c'(M + S^-1)^-1 c/2 - mu'S^-1 mu/2
  // with c = b + S^-1 mu, plus the center-dependent data term; only pieces
  // independent of T, the bias and the prior are dropped.
  double total = 0.0;
  for (const auto &st : stats) {
    Matrix m;
    Vector b;
    ex.build_system(st, &m, &b);
    m -= Matrix::Identity(rank, rank);  // build_system includes the unit prior
    Matrix a = m + s_inv;
    Eigen::LLT<Matrix> a_llt(a);
    if (a_llt.info() != Eigen::Success) throw NumericError("tv: objective system not SPD");
    double logdet_a = 2.0 * Matrix(a_llt.matrixL()).diagonal().array().log().sum();
    Vector c = b + s_inv_mu;
    total += ex.data_term(st) - 0.5 * (logdet_s + logdet_a) + 0.5 * c.dot(a_llt.solve(c)) -
             0.5 * mu_term;
  }
  return total;
}

TvTrainResult train_tv(const std::vector<BwStats> &stats, const GmmModel &ubm,
                       int rank, const TvTrainOptions &opts) {
  int K = ubm.num_components(), F = ubm.dim();
  int n_utts = static_cast<int>(stats.size());
  if (rank < 1) throw ConfigError("train_tv: rank must be >= 1");
  if (n_utts < rank) {
    throw DataError("train_tv: need at least rank (" + std::to_string(rank) +
                    ") utterances, got " + std::to_string(n_utts));
  }
  for (const auto &st : stats) {
    if (st.n.size() != K || st.f.rows() != K || st.f.cols() != F) {
      throw DataError("train_tv: stats shape does not match the UBM");
    }
  }

  TvModel tv;
  tv.rank = rank;
  tv.ubm_hash = ubm.param_hash();
  tv.bias = Vector::Zero(static_cast<Eigen::Index>(K) * F);
  tv.T = Matrix(static_cast<Eigen::Index>(K) * F, rank);
  Rng rng = Rng(opts.seed).fork("tv_init");
  for (Eigen::Index i = 0; i < tv.T.rows(); ++i) {
    for (int j = 0; j < rank; ++j) tv.T(i, j) = 0.001 * rng.normal();
  }

  TvTrainResult result;
  Matrix ivectors(n_utts, rank);

  for (int iter = 0; iter < opts.iters; ++iter) {
    TvExtractor ex(tv, ubm);

    int jobs = std::max(1, opts.jobs);
    int chunks = jobs <= 1 ? 1 : std::min(jobs * 2, n_utts);
    struct Part {
      std::vector<Matrix> a;  // K of R x R
      Matrix c;               // K*F x R
      Vector sum_w;
      Matrix sum_ww;
      double obj = 0.0;
      bool used = false;
    };
    std::vector<Part> parts(chunks);
    int chunk_size = (n_utts + chunks - 1) / chunks;
    parallel_for(chunks, jobs, [&](int ci) {
      int lo = ci * chunk_size, hi = std::min(n_utts, lo + chunk_size);
      if (lo >= hi) return;
      Part &p = parts[ci];
      p.used = true;
      p.a.assign(K, Matrix::Zero(rank, rank));
      p.c = Matrix::Zero(static_cast<Eigen::Index>(K) * F, rank);
      p.sum_w = Vector::Zero(rank);
      p.sum_ww = Matrix::Zero(rank, rank);
      for (int i = lo; i < hi; ++i) {
        Matrix precision;
        Vector linear;
        ex.build_system(stats[i], &precision, &linear);
        Eigen::LLT<Matrix> llt(precision);
        if (llt.info() != Eigen::Success) throw NumericError("train_tv: E-step not SPD");
        Vector w = llt.solve(linear);
        Matrix cov = llt.solve(Matrix::Identity(rank, rank));
        ivectors.row(i) = w.transpose();
        Matrix second = cov + w * w.transpose();
        p.obj += ex.data_term(stats[i]) -
                 Matrix(llt.matrixL()).diagonal().array().log().sum() +
                 0.5 * linear.dot(w);
        for (int k = 0; k < K; ++k) {
          double nk = stats[i].n(k);
          if (nk > 0.0) p.a[k].noalias() += nk * second;
          Vector centered =
              stats[i].f.row(k).transpose() - nk * ex.center(k).transpose();
          p.c.middleRows(static_cast<Eigen::Index>(k) * F, F).noalias() +=
              centered * w.transpose();
        }
        p.sum_w += w;
        p.sum_ww += second;
      }
    });

    std::vector<Matrix> acc_a(K, Matrix::Zero(rank, rank));
    Matrix acc_c = Matrix::Zero(static_cast<Eigen::Index>(K) * F, rank);
    Vector sum_w = Vector::Zero(rank);
    Matrix sum_ww = Matrix::Zero(rank, rank);
    double obj = 0.0;
    for (const auto &p : parts) {
      if (!p.used) continue;
      for (int k = 0; k < K; ++k) acc_a[k] += p.a[k];
      acc_c += p.c;
      sum_w += p.sum_w;
      sum_ww += p.sum_ww;
      obj += p.obj;
    }
    result.objective.push_back(obj);

    // M-step: the whitening of Sigma cancels from both sides, so each
    // component row block solves T_k A_k = C_k directly.
    for (int k = 0; k < K; ++k) {
      Eigen::LLT<Matrix> llt(acc_a[k]);
      if (llt.info() != Eigen::Success) {
        log_warn("train_tv: singular normal equations for component " +
                 std::to_string(k) + ", adding ridge");
        acc_a[k].diagonal().array() += opts.ridge;
        llt.compute(acc_a[k]);
        if (llt.info() != Eigen::Success) {
          throw NumericError("train_tv: normal equations not solvable");
        }
      }
      tv.T.middleRows(static_cast<Eigen::Index>(k) * F, F) =
          llt.solve(acc_c.middleRows(static_cast<Eigen::Index>(k) * F, F).transpose())
              .transpose();
    }

    // Minimum-divergence step: absorb the aggregate posterior mean into the
    // bias and rotate T so the aggregate posterior becomes standard normal.
    if (opts.min_divergence) {
      Vector mean_w = sum_w / n_utts;
      Matrix cov_w = sum_ww / n_utts - mean_w * mean_w.transpose();
      cov_w = 0.5 * (cov_w + cov_w.transpose());
      Matrix l = chol_lower(cov_w, opts.ridge);
      tv.bias += tv.T * mean_w;
      tv.T = tv.T * l;
      Matrix centered_w = ivectors.rowwise() - mean_w.transpose();
      ivectors =
          l.triangularView<Eigen::Lower>().solve(centered_w.transpose()).transpose();
      result.posterior_mean = Vector::Zero(rank);
      Matrix half = l.triangularView<Eigen::Lower>().solve(cov_w);
      result.posterior_covariance =
          l.triangularView<Eigen::Lower>().solve(half.transpose()).transpose();
    } else {
      result.posterior_mean = sum_w / n_utts;
      result.posterior_covariance =
          sum_ww / n_utts - result.posterior_mean * result.posterior_mean.transpose();
    }
  }

  tv.validate();
  result.model = std::move(tv);
  result.train_ivectors = std::move(ivectors);
  return result;
}

void Normalizer::validate() const {
  if (!mean.allFinite() || !transform.allFinite()) {
    throw NumericError("Normalizer: non-finite parameters");
  }
  Eigen::FullPivLU<Matrix> lu(transform);
  if (!lu.isInvertible()) throw NumericError("Normalizer: transform not invertible");
}

namespace {

// Center + whiten via eigendecomposition, flooring tiny eigenvalues.
void fit_whitener(const Matrix &x, Vector *mean, Matrix *w) {
  int n = static_cast<int>(x.rows());
  *mean = x.colwise().mean();
  Matrix centered = x.rowwise() - mean->transpose();
  Matrix cov = centered.transpose() * centered / n;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericError("fit_normalizer: eigensolver failed");
  Vector evals = eig.eigenvalues();
  if (evals.minCoeff() < 1e-10) {
    log_warn("fit_normalizer: rank-deficient covariance, flooring eigenvalues");
    evals = evals.cwiseMax(1e-10);
  }
  *w = evals.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

Normalizer fit_normalizer(const Matrix &ivectors, NormKind kind, int iterations,
                          bool length_norm) {
  int n = static_cast<int>(ivectors.rows());
  int r = static_cast<int>(ivectors.cols());
  if (n < 2) throw DataError("fit_normalizer: need at least 2 vectors");
  if (n <= r) {
    log_warn("fit_normalizer: fewer vectors (" + std::to_string(n) +
             ") than dimensions (" + std::to_string(r) + ")");
  }
  if (iterations < 1) throw ConfigError("fit_normalizer: iterations must be >= 1");

  Normalizer norm;
  norm.kind = kind;
  norm.iterations = kind == NormKind::efr ? iterations : 1;
  norm.length_norm = kind == NormKind::efr ? true : length_norm;
  norm.mean = Vector::Zero(r);
  norm.transform = Matrix::Identity(r, r);

  Matrix x = ivectors;
  int total_iters = kind == NormKind::efr ? iterations : 1;
  for (int it = 0; it < total_iters; ++it) {
    Vector mean;
    Matrix w;
    fit_whitener(x, &mean, &w);
    // Compose: current map is y = A(x - mu); the new stage maps y to
    // w(y - m), so A <- wA and mu <- mu + A^-1 m.
    norm.mean += norm.transform.fullPivLu().solve(mean);
    norm.transform = w * norm.transform;
    if (kind != NormKind::efr) break;
    x = (x.rowwise() - mean.transpose()) * w.transpose();
    for (int i = 0; i < n; ++i) {
      double len = x.row(i).norm();
      if (len > 0.0) x.row(i) /= len;
    }
  }
  norm.validate();
  return norm;
}

Vector apply_normalizer(const Normalizer &norm, const Vector &w) {
  if (w.size() != norm.mean.size()) {
    throw DataError("apply_normalizer: dimension mismatch");
  }
  Vector y = norm.transform * (w - norm.mean);
  if (norm.length_norm) {
    double len = y.norm();
    if (len == 0.0) {
      log_warn("apply_normalizer: zero vector under length normalization");
      return y;
    }
    y /= len;
  }
  return y;
}

Matrix apply_normalizer_rows(const Normalizer &norm, const Matrix &ivectors) {
  Matrix out(ivectors.rows(), ivectors.cols());
  for (Eigen::Index i = 0; i < ivectors.rows(); ++i) {
    out.row(i) = apply_normalizer(norm, Vector(ivectors.row(i).transpose())).transpose();
  }
  return out;
}

ExtractorPreset extractor_preset(const std::string &tag, bool desk_scale) {
  ExtractorPreset p;
  p.name = tag;
  if (tag == "i2r") {
    // Diagonal 1024 UBM refined to full covariance, then TV.
    p.ubm_size = 1024;
    p.ubm_kind = CovKind::full;
    p.refine_full = true;
    p.tv_rank = 600;
    p.norm_kind = NormKind::whiten;
    p.length_norm = false;
  } else if (tag == "lium") {
    // Diagonal UBM, minimum divergence at each iteration, EFR(1).
    p.ubm_size = 1024;
    p.ubm_kind = CovKind::diagonal;
    p.tv_rank = 500;
    p.norm_kind = NormKind::efr;
    p.norm_iterations = 1;
    p.length_norm = true;
  } else if (tag == "ntu") {
    p.ubm_size = 2048;
    p.ubm_kind = CovKind::full;
    p.refine_full = true;
    p.tv_rank = 400;
    p.norm_kind = NormKind::whiten;
    p.cmvn_scope = CmvnScope::sliding;
    p.cmvn_window_s = 3.0;
  } else if (tag == "uef") {
    p.ubm_size = 512;
    p.ubm_kind = CovKind::diagonal;
    p.tv_rank = 400;
    p.norm_kind = NormKind::whiten;
    p.length_norm = true;
    p.train_split_two_thirds = true;
  } else {
    throw ConfigError("unknown extractor preset: " + tag);
  }
  if (desk_scale) {
    p.ubm_size = 64;
    p.tv_rank = 50;
  }
  return p;
}

}  // namespace lidkit
