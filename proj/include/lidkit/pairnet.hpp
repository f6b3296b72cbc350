// lidkit/pairnet.hpp

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

#ifndef LIDKIT_PAIRNET_HPP_
#define LIDKIT_PAIRNET_HPP_

#include <cstdint>
#include <vector>

#include "lidkit/scores.hpp"
#include "lidkit/types.hpp"
#include "lidkit/util.hpp"

namespace lidkit {

struct PairExample {
  int a = 0;
  int b = 0;
  bool same = false;
};

// Per round and per vector, one same-language and one different-language
// partner, sampled uniformly. With balance, minority languages get extra
// pairs until their positive count reaches half of the largest.
std::vector<PairExample> generate_pairs(const std::vector<int> &labels, int rounds,
                                        bool balance, std::uint64_t seed);

// Tied-parameter embedding net: sigmoid hidden layers, then a linear
// embedding. Both members of a pair go through the single stored copy of
// the parameters; pairs are compared by cosine, passed through a trainable
// affine logit into a logistic loss.
struct PairNet {
  std::vector<Matrix> hidden_w;  // layer rows x fan_in
  std::vector<Vector> hidden_b;
  Matrix final_w;  // embedding_dim x last hidden size (empty until stage 2)
  Vector final_b;
  double logit_scale = 5.0;
  double logit_offset = 0.0;

  bool has_final() const { return final_w.size() > 0; }
  int embedding_dim() const;
  void validate() const;

  Vector embed(const Vector &x) const;
  Matrix embed_rows(const Matrix &x) const;
};

struct PairNetOptions {
  std::vector<int> hidden_dims = {256};
  int embedding_dim = 64;
  int epochs_per_stage = 150;
  double learning_rate = 0.5;
  int rounds = 20;
  bool balance = true;
  std::uint64_t seed = 0;
};

struct PairNetTrainResult {
  PairNet net;
  std::vector<double> stage_final_loss;
};

// Layer-by-layer curriculum: each hidden layer is trained to convergence
// before the next (and finally the linear embedding) is appended; every
// stage trains all parameters added so far by full-batch gradient descent.
PairNetTrainResult pairnet_train(const Matrix &ivectors, const std::vector<int> &labels,
                                 const PairNetOptions &opts);

// Mean loss over the pairs plus gradients for every parameter, computed by
// backprop with the left/right contributions summed into the tied buffers.
struct PairNetGradients {
  std::vector<Matrix> hidden_w;
  std::vector<Vector> hidden_b;
  Matrix final_w;
  Vector final_b;
  double logit_scale = 0.0;
  double logit_offset = 0.0;
};

double pairnet_loss(const PairNet &net, const Matrix &ivectors,
                    const std::vector<PairExample> &pairs,
                    PairNetGradients *grads = nullptr);

// Unit-normalized mean embedding per language (L x E).
Matrix pairnet_centroids(const PairNet &net, const Matrix &ivectors,
                         const std::vector<int> &labels, int n_languages);

// Cosine against each centroid.
Vector pairnet_score(const PairNet &net, const Matrix &centroids, const Vector &test);

ScoreMatrix pairnet_score_matrix(const PairNet &net, const Matrix &centroids,
                                 const std::vector<std::string> &language_order,
                                 const Matrix &x,
                                 const std::vector<std::string> &utt_ids);

}  // namespace lidkit

#endif  // LIDKIT_PAIRNET_HPP_
