// src/gmm.cpp

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

#include "lidkit/gmm.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "lidkit/util.hpp"

namespace lidkit {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;

void hash_doubles(std::uint64_t &h, const double *p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, p + i, sizeof(bits));
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xff;
      h *= 1099511628211ULL;
    }
  }
}
}  // namespace

void GmmModel::validate() const {
  int K = num_components(), F = dim();
  if (K < 1 || F < 1) throw DataError("GmmModel: empty model");
  if (std::abs(weights.sum() - 1.0) > 1e-10) {
    throw NumericError("GmmModel: weights do not sum to 1");
  }
  if (weights.minCoeff() <= 0.0) throw NumericError("GmmModel: non-positive weight");
  if (covariance_kind == CovKind::diagonal) {
    if (diag_vars.rows() != K || diag_vars.cols() != F) {
      throw DataError("GmmModel: diagonal variance shape mismatch");
    }
    if (diag_vars.minCoeff() <= 0.0) throw NumericError("GmmModel: non-positive variance");
  } else {
    if (static_cast<int>(full_covs.size()) != K) {
      throw DataError("GmmModel: full covariance count mismatch");
    }
    for (const auto &cov : full_covs) {
      Eigen::LLT<Matrix> llt(cov);
      if (llt.info() != Eigen::Success) {
        throw NumericError("GmmModel: covariance not positive definite");
      }
    }
  }
}

std::uint64_t GmmModel::param_hash() const {
  std::uint64_t h = 14695981039346656037ULL;
  hash_doubles(h, weights.data(), weights.size());
  hash_doubles(h, means.data(), means.size());
  if (covariance_kind == CovKind::diagonal) {
    hash_doubles(h, diag_vars.data(), diag_vars.size());
  } else {
    for (const auto &cov : full_covs) hash_doubles(h, cov.data(), cov.size());
  }
  return h;
}

BwStats &BwStats::operator+=(const BwStats &other) {
  n += other.n;
  f += other.f;
  frames_total += other.frames_total;
  return *this;
}

void BwStats::validate() const {
  if (n.minCoeff() < 0.0) throw NumericError("BwStats: negative occupancy");
  if (n.sum() > static_cast<double>(frames_total) + 1e-6) {
    throw NumericError("BwStats: occupancies exceed frame count");
  }
}

Matrix log_component_likelihoods(const GmmModel &model, const Matrix &frames) {
  int K = model.num_components(), F = model.dim();
  int T = static_cast<int>(frames.rows());
  if (frames.cols() != F) {
    throw DataError("gmm: frame dim " + std::to_string(frames.cols()) +
                    " does not match model dim " + std::to_string(F));
  }
  Matrix ll(T, K);
  if (model.covariance_kind == CovKind::diagonal) {
    // log w_k N(x) = const_k - 0.5 sum((x - m)^2 / v)
    //             = const_k - 0.5 (x^2 . (1/v) - 2 x . (m/v) + sum(m^2/v))
    Matrix inv_var = model.diag_vars.cwiseInverse();          // K x F
    Matrix mean_over_var = model.means.cwiseProduct(inv_var); // K x F
    Vector const_k(K);
    for (int k = 0; k < K; ++k) {
      const_k(k) = std::log(model.weights(k)) -
                   0.5 * (F * kLog2Pi + model.diag_vars.row(k).array().log().sum()) -
                   0.5 * model.means.row(k).cwiseProduct(mean_over_var.row(k)).sum();
    }
    ll.noalias() = frames.cwiseProduct(frames) * (-0.5 * inv_var.transpose());
    ll.noalias() += frames * mean_over_var.transpose();
    ll.rowwise() += const_k.transpose();
  } else {
    for (int k = 0; k < K; ++k) {
      Eigen::LLT<Matrix> llt(model.full_covs[k]);
      if (llt.info() != Eigen::Success) {
        throw NumericError("gmm: covariance Cholesky failed in scoring");
      }
      double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
      double c = std::log(model.weights(k)) - 0.5 * (F * kLog2Pi + logdet);
      Matrix centered = frames.rowwise() - model.means.row(k);  // T x F
      Matrix y = llt.matrixL().solve(centered.transpose());     // F x T
      ll.col(k) = (-0.5 * y.colwise().squaredNorm().array() + c).transpose();
    }
  }
  return ll;
}

Matrix posteriors(const GmmModel &model, const Matrix &frames, double *total_ll) {
  Matrix ll = log_component_likelihoods(model, frames);
  Vector row_max = ll.rowwise().maxCoeff();
  Matrix gamma = (ll.colwise() - row_max).array().exp();
  Vector norm = gamma.rowwise().sum();
  gamma.array().colwise() /= norm.array();
  if (total_ll != nullptr) {
    *total_ll = (norm.array().log() + row_max.array()).sum();
  }
  return gamma;
}

double total_log_likelihood(const GmmModel &model, const Matrix &frames) {
  double ll = 0.0;
  posteriors(model, frames, &ll);
  return ll;
}

namespace {

struct Accumulators {
  double ll = 0.0;
  Vector n;
  Matrix fx;   // K x F, sum gamma x
  Matrix fxx;  // K x F, sum gamma x^2 (diagonal EM)
  std::vector<Matrix> scatter;  // K of F x F (full EM)
};

// E-step over chunked frames; chunk results merged in chunk order so the
// result is deterministic for a fixed job count.
Accumulators accumulate_em(const GmmModel &model, const Matrix &frames, bool full,
                           int jobs) {
  int K = model.num_components(), F = model.dim();
  int T = static_cast<int>(frames.rows());
  int chunk_count = jobs <= 1 ? 1 : std::min(jobs * 4, std::max(1, T / 1024));
  chunk_count = std::max(1, chunk_count);
  std::vector<Accumulators> parts(chunk_count);
  int chunk_size = (T + chunk_count - 1) / chunk_count;

  parallel_for(chunk_count, jobs, [&](int c) {
    int lo = c * chunk_size;
    int hi = std::min(T, lo + chunk_size);
    if (lo >= hi) {
      parts[c].n = Vector::Zero(K);
      parts[c].fx = Matrix::Zero(K, F);
      parts[c].fxx = Matrix::Zero(K, F);
      return;
    }
    const auto block = frames.middleRows(lo, hi - lo);
    double ll = 0.0;
    Matrix gamma = posteriors(model, block, &ll);
    Accumulators &a = parts[c];
    a.ll = ll;
    a.n = gamma.colwise().sum();
    a.fx.noalias() = gamma.transpose() * block;
    if (!full) {
      a.fxx.noalias() = gamma.transpose() * block.cwiseProduct(block);
    } else {
      a.scatter.assign(K, Matrix::Zero(F, F));
      for (int k = 0; k < K; ++k) {
        Matrix weighted = block.array().colwise() * gamma.col(k).array();
        a.scatter[k].noalias() = weighted.transpose() * block;
      }
    }
  });

  Accumulators total;
  total.n = Vector::Zero(K);
  total.fx = Matrix::Zero(K, F);
  total.fxx = Matrix::Zero(K, F);
  if (full) total.scatter.assign(K, Matrix::Zero(F, F));
  for (const auto &p : parts) {
    if (p.n.size() == 0) continue;
    total.ll += p.ll;
    total.n += p.n;
    total.fx += p.fx;
    if (!full) {
      total.fxx += p.fxx;
    } else {
      for (int k = 0; k < K; ++k) total.scatter[k] += p.scatter[k];
    }
  }
  return total;
}

void diag_m_step(GmmModel &model, const Accumulators &acc, const Vector &var_floor) {
  int K = model.num_components();
  double N = acc.n.sum();
  for (int k = 0; k < K; ++k) {
    double nk = acc.n(k);
    if (nk < 1e-10) {
      // Empty component: keep parameters, floor the weight.
      model.weights(k) = 1e-10;
      continue;
    }
    model.weights(k) = nk / N;
    model.means.row(k) = acc.fx.row(k) / nk;
    model.diag_vars.row(k) =
        (acc.fxx.row(k) / nk - model.means.row(k).cwiseProduct(model.means.row(k)))
            .cwiseMax(var_floor.transpose());
  }
  model.weights /= model.weights.sum();
}

Matrix regularize_spd(Matrix cov, double ridge0) {
  double ridge = ridge0;
  for (int attempt = 0; attempt < 20; ++attempt) {
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() == Eigen::Success) return cov;
    cov.diagonal().array() += ridge;
    ridge *= 10.0;
  }
  throw NumericError("gmm: covariance could not be regularized to SPD");
}

void full_m_step(GmmModel &model, const Accumulators &acc, double ridge) {
  int K = model.num_components(), F = model.dim();
  double N = acc.n.sum();
  for (int k = 0; k < K; ++k) {
    double nk = acc.n(k);
    if (nk < 1e-10) {
      model.weights(k) = 1e-10;
      continue;
    }
    model.weights(k) = nk / N;
    Vector mean = acc.fx.row(k).transpose() / nk;
    model.means.row(k) = mean.transpose();
    Matrix cov = acc.scatter[k] / nk - mean * mean.transpose();
    cov = 0.5 * (cov + cov.transpose());
    model.full_covs[k] = regularize_spd(std::move(cov), ridge);
  }
  model.weights /= model.weights.sum();
  (void)F;
}

void split_components(GmmModel &model, int target_k) {
  int K = model.num_components(), F = model.dim();
  int new_k = std::min(2 * K, 1 << 30);
  GmmModel next;
  next.covariance_kind = CovKind::diagonal;
  next.weights = Vector(new_k);
  next.means = Matrix(new_k, F);
  next.diag_vars = Matrix(new_k, F);
  for (int k = 0; k < K; ++k) {
    int dmax;
    model.diag_vars.row(k).maxCoeff(&dmax);
    double offset = 0.1 * std::sqrt(model.diag_vars(k, dmax));
    for (int s = 0; s < 2; ++s) {
      int j = 2 * k + s;
      next.weights(j) = model.weights(k) / 2.0;
      next.means.row(j) = model.means.row(k);
      next.means(j, dmax) += (s == 0 ? offset : -offset);
      next.diag_vars.row(j) = model.diag_vars.row(k);
    }
  }
  if (new_k > target_k) {
    // Round-up split overshoots: drop the lowest-weight components.
    std::vector<int> order(new_k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return next.weights(a) > next.weights(b);
    });
    order.resize(target_k);
    std::sort(order.begin(), order.end());
    GmmModel pruned;
    pruned.covariance_kind = CovKind::diagonal;
    pruned.weights = Vector(target_k);
    pruned.means = Matrix(target_k, F);
    pruned.diag_vars = Matrix(target_k, F);
    for (int i = 0; i < target_k; ++i) {
      pruned.weights(i) = next.weights(order[i]);
      pruned.means.row(i) = next.means.row(order[i]);
      pruned.diag_vars.row(i) = next.diag_vars.row(order[i]);
    }
    pruned.weights /= pruned.weights.sum();
    next = std::move(pruned);
  }
  model = std::move(next);
}

}  // namespace

GmmModel train_diag_gmm(const Matrix &frames, int K, int iters,
                        double var_floor_frac, std::uint64_t seed,
                        TrainTrace *trace, int jobs) {
  (void)seed;  // splitting is deterministic; kept for interface stability
  int T = static_cast<int>(frames.rows());
  if (K < 1) throw ConfigError("train_diag_gmm: K must be >= 1");
  if (T < 10 * K) {
    throw DataError("train_diag_gmm: need at least 10*K frames, got " +
                    std::to_string(T) + " for K = " + std::to_string(K));
  }

  Vector global_mean = frames.colwise().mean();
  Vector global_var =
      ((frames.rowwise() - global_mean.transpose()).array().square().colwise().mean())
          .matrix();
  Vector var_floor = (var_floor_frac * global_var.array()).max(1e-20).matrix();

  GmmModel model;
  model.covariance_kind = CovKind::diagonal;
  model.weights = Vector::Ones(1);
  model.means = global_mean.transpose();
  model.diag_vars = global_var.cwiseMax(var_floor).transpose();

  auto run_em = [&](int n_iters) {
    std::vector<double> lls;
    for (int it = 0; it < n_iters; ++it) {
      Accumulators acc = accumulate_em(model, frames, false, jobs);
      lls.push_back(acc.ll);
      diag_m_step(model, acc, var_floor);
    }
    if (trace != nullptr) trace->phases.push_back(std::move(lls));
  };

  run_em(std::max(1, std::min(iters, 2)));  // settle the single Gaussian
  while (model.num_components() < K) {
    split_components(model, K);
    run_em(iters);
  }
  model.validate();
  return model;
}

GmmModel refine_full_gmm(const GmmModel &diag, const Matrix &frames, int iters,
                         TrainTrace *trace, int jobs) {
  if (diag.covariance_kind != CovKind::diagonal) {
    throw ConfigError("refine_full_gmm: input model must be diagonal");
  }
  int K = diag.num_components(), F = diag.dim();
  GmmModel model;
  model.covariance_kind = CovKind::full;
  model.weights = diag.weights;
  model.means = diag.means;
  model.full_covs.resize(K);
  for (int k = 0; k < K; ++k) {
    model.full_covs[k] = diag.diag_vars.row(k).asDiagonal();
  }
  double ridge = 1e-3 * diag.diag_vars.mean();

  std::vector<double> lls;
  for (int it = 0; it < iters; ++it) {
    Accumulators acc = accumulate_em(model, frames, true, jobs);
    lls.push_back(acc.ll);
    full_m_step(model, acc, ridge);
  }
  if (trace != nullptr) trace->phases.push_back(std::move(lls));
  model.validate();
  (void)F;
  return model;
}

BwStats accumulate_stats_rows(const GmmModel &ubm, const Matrix &rows) {
  Matrix gamma = posteriors(ubm, rows, nullptr);
  BwStats stats;
  stats.n = gamma.colwise().sum();
  stats.f.noalias() = gamma.transpose() * rows;
  stats.frames_total = rows.rows();
  return stats;
}

BwStats accumulate_stats(const GmmModel &ubm, const FeatureMatrix &feat) {
  feat.validate();
  if (feat.dims() != ubm.dim()) {
    throw DataError("accumulate_stats: feature dim " + std::to_string(feat.dims()) +
                    " does not match UBM dim " + std::to_string(ubm.dim()));
  }
  Matrix rows = feat.speech_rows();
  if (rows.rows() == 0) {
    BwStats stats;
    stats.n = Vector::Zero(ubm.num_components());
    stats.f = Matrix::Zero(ubm.num_components(), ubm.dim());
    stats.frames_total = 0;
    return stats;
  }
  return accumulate_stats_rows(ubm, rows);
}

Vector map_supervector_from_stats(const GmmModel &ubm, const BwStats &stats,
                                  double relevance, bool kl_normalize) {
  if (relevance < 0.0) throw ConfigError("map_supervector: relevance must be >= 0");
  int K = ubm.num_components(), F = ubm.dim();
  Vector sv(K * F);
  for (int k = 0; k < K; ++k) {
    double nk = stats.n(k);
    Vector data_mean = nk > 0.0 ? Vector(stats.f.row(k).transpose() / nk)
                                : Vector(ubm.means.row(k).transpose());
    Vector adapted;
    if (nk + relevance <= 0.0) {
      adapted = data_mean;  // relevance 0 and no occupancy
    } else {
      adapted = (nk * data_mean + relevance * ubm.means.row(k).transpose()) /
                (nk + relevance);
    }
    if (kl_normalize) {
      double scale = std::sqrt(ubm.weights(k));
      if (ubm.covariance_kind == CovKind::diagonal) {
        adapted = scale *
                  adapted.cwiseQuotient(ubm.diag_vars.row(k).transpose().cwiseSqrt());
      } else {
        Eigen::LLT<Matrix> llt(ubm.full_covs[k]);
        adapted = scale * llt.matrixL().solve(adapted);
      }
    }
    sv.segment(k * F, F) = adapted;
  }
  return sv;
}

Vector map_supervector(const GmmModel &ubm, const FeatureMatrix &feat,
                       double relevance, bool kl_normalize) {
  return map_supervector_from_stats(ubm, accumulate_stats(ubm, feat), relevance,
                                    kl_normalize);
}

Matrix subsample_rows(const Matrix &rows, int max_frames) {
  int T = static_cast<int>(rows.rows());
  if (max_frames <= 0 || T <= max_frames) return rows;
  int stride = (T + max_frames - 1) / max_frames;
  int count = (T + stride - 1) / stride;
  Matrix out(count, rows.cols());
  for (int i = 0; i < count; ++i) out.row(i) = rows.row(i * stride);
  return out;
}

}  // namespace lidkit
