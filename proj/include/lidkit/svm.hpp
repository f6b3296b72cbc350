// lidkit/svm.hpp

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

#ifndef LIDKIT_SVM_HPP_
#define LIDKIT_SVM_HPP_

#include <string>
#include <vector>

#include "lidkit/scores.hpp"
#include "lidkit/types.hpp"

namespace lidkit {

// One-vs-one linear soft-margin SVMs over i-vectors or supervectors.
struct SvmSet {
  struct PairClassifier {
    int lang_a = 0;  // positive class
    int lang_b = 0;  // negative class
    Vector weight;
    double bias = 0.0;
  };

  std::vector<std::string> language_order;
  std::vector<PairClassifier> classifiers;  // one per unordered pair, a < b
  double regularization = 1.0;

  void validate() const;
};

struct SvmTrainOptions {
  double C = 1.0;
  int epochs = 200;
};

// Deterministic full-batch subgradient descent on the primal hinge
// objective, step 1/(lambda t) with lambda = 1/(C n).
SvmSet svm_train(const Matrix &x, const std::vector<int> &labels,
                 const std::vector<std::string> &language_order,
                 const SvmTrainOptions &opts);

// Mean signed margin over the pairs involving each language; with voting,
// the fraction of pairwise wins instead.
Vector svm_score(const SvmSet &model, const Vector &x, bool voting = false);

ScoreMatrix svm_score_matrix(const SvmSet &model, const Matrix &x,
                             const std::vector<std::string> &utt_ids,
                             bool voting = false);

// Primal objective of one pair classifier; exposed for the training tests.
double svm_pair_objective(const Vector &weight, double bias, const Matrix &x,
                          const std::vector<double> &y, double lambda);

}  // namespace lidkit

#endif  // LIDKIT_SVM_HPP_
