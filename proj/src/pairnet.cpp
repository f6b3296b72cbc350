// src/pairnet.cpp

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

#include "lidkit/pairnet.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace lidkit {

std::vector<PairExample> generate_pairs(const std::vector<int> &labels, int rounds,
                                        bool balance, std::uint64_t seed) {
  int n = static_cast<int>(labels.size());
  if (n < 2) throw DataError("generate_pairs: need at least 2 vectors");
  if (rounds < 1) throw ConfigError("generate_pairs: rounds must be >= 1");
  int n_langs = 0;
  for (int lab : labels) {
    if (lab < 0) throw DataError("generate_pairs: negative label");
    n_langs = std::max(n_langs, lab + 1);
  }
  std::vector<std::vector<int>> members(n_langs);
  for (int i = 0; i < n; ++i) members[labels[i]].push_back(i);

  Rng rng = Rng(seed).fork("pairs");
  std::vector<PairExample> pairs;
  pairs.reserve(static_cast<std::size_t>(2) * rounds * n);
  std::set<int> warned;
  std::vector<int> positive_count(n_langs, 0);

  auto sample_same = [&](int i) -> int {
    const auto &cls = members[labels[i]];
    int j = rng.uniform_int(static_cast<int>(cls.size()) - 1);
    return cls[j] == i ? cls.back() : cls[j];
  };
  auto sample_diff = [&](int i) -> int {
    for (;;) {
      int j = rng.uniform_int(n);
      if (labels[j] != labels[i]) return j;
    }
  };
  auto add_pair_for = [&](int i, bool with_positive) {
    if (with_positive) {
      pairs.push_back({i, sample_same(i), true});
      ++positive_count[labels[i]];
    }
    pairs.push_back({i, sample_diff(i), false});
  };

  for (int round = 0; round < rounds; ++round) {
    for (int i = 0; i < n; ++i) {
      bool can_positive = members[labels[i]].size() >= 2;
      if (!can_positive && warned.insert(labels[i]).second) {
        log_warn("generate_pairs: language " + std::to_string(labels[i]) +
                 " has a single vector; skipping positive pairs");
      }
      add_pair_for(i, can_positive);
    }
  }

  if (balance) {
    int max_count = *std::max_element(positive_count.begin(), positive_count.end());
    int target = (max_count + 1) / 2;
    for (int lang = 0; lang < n_langs; ++lang) {
      if (members[lang].size() < 2) continue;
      int cursor = 0;
      while (positive_count[lang] < target) {
        int i = members[lang][cursor % members[lang].size()];
        add_pair_for(i, true);
        ++cursor;
      }
    }
  }
  return pairs;
}

int PairNet::embedding_dim() const {
  if (has_final()) return static_cast<int>(final_w.rows());
  return hidden_w.empty() ? 0 : static_cast<int>(hidden_w.back().rows());
}

void PairNet::validate() const {
  if (hidden_w.empty()) throw DataError("PairNet: no hidden layers");
  if (hidden_w.size() != hidden_b.size()) throw DataError("PairNet: layer mismatch");
  for (std::size_t j = 0; j < hidden_w.size(); ++j) {
    if (hidden_w[j].rows() != hidden_b[j].size()) {
      throw ConfigError("PairNet: bias size does not match layer rows");
    }
    if (j > 0 && hidden_w[j].cols() != hidden_w[j - 1].rows()) {
      throw ConfigError("PairNet: layer dimensions do not chain");
    }
  }
  if (has_final() && final_w.cols() != hidden_w.back().rows()) {
    throw ConfigError("PairNet: embedding layer does not chain");
  }
}

namespace {

Matrix sigmoid(const Matrix &a) {
  return (1.0 / (1.0 + (-a.array()).exp())).matrix();
}

// Forward pass for all rows, keeping per-layer activations for backprop.
struct ForwardState {
  std::vector<Matrix> hidden;  // per layer, N x dim
  Matrix embedding;            // N x E
};

ForwardState forward_all(const PairNet &net, const Matrix &x) {
  ForwardState fs;
  Matrix cur = x;
  for (std::size_t j = 0; j < net.hidden_w.size(); ++j) {
    Matrix a = cur * net.hidden_w[j].transpose();
    a.rowwise() += net.hidden_b[j].transpose();
    cur = sigmoid(a);
    fs.hidden.push_back(cur);
  }
  if (net.has_final()) {
    fs.embedding = cur * net.final_w.transpose();
    fs.embedding.rowwise() += net.final_b.transpose();
  } else {
    fs.embedding = cur;
  }
  return fs;
}

}  // namespace

Vector PairNet::embed(const Vector &x) const {
  Matrix row = x.transpose();
  return forward_all(*this, row).embedding.row(0).transpose();
}

Matrix PairNet::embed_rows(const Matrix &x) const { return forward_all(*this, x).embedding; }

double pairnet_loss(const PairNet &net, const Matrix &ivectors,
                    const std::vector<PairExample> &pairs, PairNetGradients *grads) {
  net.validate();
  if (pairs.empty()) throw DataError("pairnet_loss: no pairs");
  int n = static_cast<int>(ivectors.rows());
  ForwardState fs = forward_all(net, ivectors);
  const Matrix &e = fs.embedding;
  Vector norms = e.rowwise().norm();

  double inv_count = 1.0 / pairs.size();
  double loss = 0.0;
  Matrix de = Matrix::Zero(e.rows(), e.cols());
  double d_scale = 0.0, d_offset = 0.0;

  for (const auto &pr : pairs) {
    if (pr.a < 0 || pr.a >= n || pr.b < 0 || pr.b >= n) {
      throw DataError("pairnet_loss: pair index out of range");
    }
    double na = norms(pr.a), nb = norms(pr.b);
    double denom = std::max(na * nb, 1e-300);
    double c = e.row(pr.a).dot(e.row(pr.b)) / denom;
    double z = net.logit_scale * c + net.logit_offset;
    double y = pr.same ? 1.0 : 0.0;
    // Numerically stable BCE on the logit.
    loss += inv_count * (std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::abs(z))));
    if (grads != nullptr) {
      double dz = inv_count * (1.0 / (1.0 + std::exp(-z)) - y);
      d_scale += dz * c;
      d_offset += dz;
      double dc = dz * net.logit_scale;
      de.row(pr.a) += dc * (e.row(pr.b) / denom - c * e.row(pr.a) / std::max(na * na, 1e-300));
      de.row(pr.b) += dc * (e.row(pr.a) / denom - c * e.row(pr.b) / std::max(nb * nb, 1e-300));
    }
  }

  if (grads != nullptr) {
    grads->hidden_w.assign(net.hidden_w.size(), Matrix());
    grads->hidden_b.assign(net.hidden_b.size(), Vector());
    grads->logit_scale = d_scale;
    grads->logit_offset = d_offset;

    Matrix dh;  // gradient w.r.t. the current hidden activation
    if (net.has_final()) {
      const Matrix &last = fs.hidden.back();
      grads->final_w = de.transpose() * last;
      grads->final_b = de.colwise().sum().transpose();
      dh = de * net.final_w;
    } else {
      grads->final_w = Matrix();
      grads->final_b = Vector();
      dh = de;
    }
    for (int j = static_cast<int>(net.hidden_w.size()) - 1; j >= 0; --j) {
      const Matrix &h = fs.hidden[j];
      Matrix da = dh.cwiseProduct(h.cwiseProduct((1.0 - h.array()).matrix()));
      const Matrix &input = j == 0 ? ivectors : fs.hidden[j - 1];
      grads->hidden_w[j] = da.transpose() * input;
      grads->hidden_b[j] = da.colwise().sum().transpose();
      if (j > 0) dh = da * net.hidden_w[j];
    }
  }
  return loss;
}

namespace {

Matrix random_layer(int rows, int cols, Rng &rng) {
  Matrix w(rows, cols);
  double scale = 1.0 / std::sqrt(static_cast<double>(cols));
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) w(i, j) = scale * rng.normal();
  }
  return w;
}

void gd_stage(PairNet &net, const Matrix &x, const std::vector<PairExample> &pairs,
              int epochs, double lr, double *final_loss) {
  PairNetGradients g;
  double loss = 0.0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    loss = pairnet_loss(net, x, pairs, &g);
    for (std::size_t j = 0; j < net.hidden_w.size(); ++j) {
      net.hidden_w[j] -= lr * g.hidden_w[j];
      net.hidden_b[j] -= lr * g.hidden_b[j];
    }
    if (net.has_final()) {
      net.final_w -= lr * g.final_w;
      net.final_b -= lr * g.final_b;
    }
    net.logit_scale -= lr * g.logit_scale;
    net.logit_offset -= lr * g.logit_offset;
  }
  *final_loss = pairnet_loss(net, x, pairs, nullptr);
  (void)loss;
}

}  // namespace

PairNetTrainResult pairnet_train(const Matrix &ivectors, const std::vector<int> &labels,
                                 const PairNetOptions &opts) {
  if (opts.hidden_dims.empty()) throw ConfigError("pairnet_train: no hidden layers");
  if (opts.embedding_dim < 1) throw ConfigError("pairnet_train: bad embedding dim");
  {
    std::set<int> langs(labels.begin(), labels.end());
    if (langs.size() < 2) throw DataError("pairnet_train: need at least 2 languages");
  }

  auto pairs = generate_pairs(labels, opts.rounds, opts.balance, opts.seed);
  Rng rng = Rng(opts.seed).fork("pairnet_init");

  PairNetTrainResult result;
  PairNet &net = result.net;
  int fan_in = static_cast<int>(ivectors.cols());

  // Layer-by-layer: each stage appends one layer and retrains everything.
  for (std::size_t j = 0; j < opts.hidden_dims.size(); ++j) {
    net.hidden_w.push_back(random_layer(opts.hidden_dims[j], fan_in, rng));
    net.hidden_b.push_back(Vector::Zero(opts.hidden_dims[j]));
    fan_in = opts.hidden_dims[j];
    double stage_loss = 0.0;
    gd_stage(net, ivectors, pairs, opts.epochs_per_stage, opts.learning_rate, &stage_loss);
    result.stage_final_loss.push_back(stage_loss);
  }
  net.final_w = random_layer(opts.embedding_dim, fan_in, rng);
  net.final_b = Vector::Zero(opts.embedding_dim);
  double stage_loss = 0.0;
  gd_stage(net, ivectors, pairs, opts.epochs_per_stage, opts.learning_rate, &stage_loss);
  result.stage_final_loss.push_back(stage_loss);

  net.validate();
  return result;
}

Matrix pairnet_centroids(const PairNet &net, const Matrix &ivectors,
                         const std::vector<int> &labels, int n_languages) {
  Matrix e = net.embed_rows(ivectors);
  Matrix centroids = Matrix::Zero(n_languages, e.cols());
  std::vector<int> counts(n_languages, 0);
  for (int i = 0; i < e.rows(); ++i) {
    if (labels[i] < 0 || labels[i] >= n_languages) {
      throw DataError("pairnet_centroids: label out of range");
    }
    centroids.row(labels[i]) += e.row(i);
    ++counts[labels[i]];
  }
  for (int l = 0; l < n_languages; ++l) {
    if (counts[l] == 0) {
      log_warn("pairnet_centroids: language " + std::to_string(l) + " has no vectors");
      continue;
    }
    centroids.row(l) /= counts[l];
    double norm = centroids.row(l).norm();
    if (norm > 0.0) {
      centroids.row(l) /= norm;
    } else {
      log_warn("pairnet_centroids: zero centroid for language " + std::to_string(l));
    }
  }
  return centroids;
}

Vector pairnet_score(const PairNet &net, const Matrix &centroids, const Vector &test) {
  Vector e = net.embed(test);
  double norm = e.norm();
  if (norm == 0.0) {
    log_warn("pairnet_score: zero embedding, returning zero scores");
    return Vector::Zero(centroids.rows());
  }
  Vector s(centroids.rows());
  for (int l = 0; l < centroids.rows(); ++l) {
    double cnorm = centroids.row(l).norm();
    s(l) = cnorm > 0.0 ? centroids.row(l).dot(e) / (norm * cnorm) : 0.0;
  }
  return s;
}

ScoreMatrix pairnet_score_matrix(const PairNet &net, const Matrix &centroids,
                                 const std::vector<std::string> &language_order,
                                 const Matrix &x,
                                 const std::vector<std::string> &utt_ids) {
  if (centroids.rows() != static_cast<Eigen::Index>(language_order.size())) {
    throw DataError("pairnet_score_matrix: centroid/language mismatch");
  }
  ScoreMatrix sm;
  sm.utt_ids = utt_ids;
  sm.language_order = language_order;
  sm.kind = ScoreKind::raw;
  sm.scores = Matrix(x.rows(), centroids.rows());
  for (int i = 0; i < x.rows(); ++i) {
    sm.scores.row(i) = pairnet_score(net, centroids, Vector(x.row(i).transpose())).transpose();
  }
  sm.validate();
  return sm;
}

}  // namespace lidkit
