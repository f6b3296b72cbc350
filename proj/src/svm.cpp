// src/svm.cpp

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

#include "lidkit/svm.hpp"

#include <algorithm>
#include <cmath>

#include "lidkit/util.hpp"

namespace lidkit {

void SvmSet::validate() const {
  int L = static_cast<int>(language_order.size());
  if (L < 2) throw DataError("SvmSet: need at least 2 languages");
  std::size_t expected = static_cast<std::size_t>(L) * (L - 1) / 2;
  if (classifiers.size() != expected) {
    throw DataError("SvmSet: expected one classifier per unordered pair");
  }
  for (const auto &clf : classifiers) {
    if (clf.lang_a >= clf.lang_b || clf.lang_b >= L || clf.lang_a < 0) {
      throw DataError("SvmSet: malformed pair indices");
    }
    if (!clf.weight.allFinite() || !std::isfinite(clf.bias)) {
      throw NumericError("SvmSet: non-finite classifier");
    }
  }
}

double svm_pair_objective(const Vector &weight, double bias, const Matrix &x,
                          const std::vector<double> &y, double lambda) {
  double hinge = 0.0;
  for (int i = 0; i < x.rows(); ++i) {
    double margin = y[i] * (x.row(i).dot(weight) + bias);
    hinge += std::max(0.0, 1.0 - margin);
  }
  return 0.5 * lambda * weight.squaredNorm() + hinge / x.rows();
}

namespace {

// Full-batch Pegasos-style primal descent for one pair.
SvmSet::PairClassifier train_pair(const Matrix &x, const std::vector<double> &y,
                                  int lang_a, int lang_b, double C, int epochs) {
  int n = static_cast<int>(x.rows());
  int d = static_cast<int>(x.cols());
  double lambda = 1.0 / (C * n);

  SvmSet::PairClassifier clf;
  clf.lang_a = lang_a;
  clf.lang_b = lang_b;
  clf.weight = Vector::Zero(d);
  clf.bias = 0.0;

  double smoothed = svm_pair_objective(clf.weight, clf.bias, x, y, lambda);
  for (int t = 1; t <= epochs; ++t) {
    double eta = 1.0 / (lambda * t);
    Vector grad = lambda * clf.weight;
    double grad_b = 0.0;
    for (int i = 0; i < n; ++i) {
      double margin = y[i] * (x.row(i).dot(clf.weight) + clf.bias);
      if (margin < 1.0) {
        grad -= (y[i] / n) * x.row(i).transpose();
        grad_b -= y[i] / n;
      }
    }
    clf.weight -= eta * grad;
    clf.bias -= eta * grad_b;
    smoothed = 0.9 * smoothed + 0.1 * svm_pair_objective(clf.weight, clf.bias, x, y, lambda);
  }
  (void)smoothed;
  return clf;
}

}  // namespace

SvmSet svm_train(const Matrix &x, const std::vector<int> &labels,
                 const std::vector<std::string> &language_order,
                 const SvmTrainOptions &opts) {
  int n = static_cast<int>(x.rows());
  int L = static_cast<int>(language_order.size());
  if (L < 2) throw DataError("svm_train: need at least 2 languages");
  if (static_cast<int>(labels.size()) != n) throw DataError("svm_train: label count");
  if (!(opts.C > 0.0)) throw ConfigError("svm_train: C must be positive");

  std::vector<std::vector<int>> by_class(L);
  for (int i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= L) throw DataError("svm_train: label out of range");
    by_class[labels[i]].push_back(i);
  }
  for (int l = 0; l < L; ++l) {
    if (by_class[l].empty()) {
      throw DataError("svm_train: language " + language_order[l] + " has no samples");
    }
  }

  SvmSet model;
  model.language_order = language_order;
  model.regularization = opts.C;
  for (int a = 0; a < L; ++a) {
    for (int b = a + 1; b < L; ++b) {
      int na = static_cast<int>(by_class[a].size());
      int nb = static_cast<int>(by_class[b].size());
      Matrix px(na + nb, x.cols());
      std::vector<double> py(na + nb);
      for (int i = 0; i < na; ++i) {
        px.row(i) = x.row(by_class[a][i]);
        py[i] = 1.0;
      }
      for (int i = 0; i < nb; ++i) {
        px.row(na + i) = x.row(by_class[b][i]);
        py[na + i] = -1.0;
      }
      model.classifiers.push_back(train_pair(px, py, a, b, opts.C, opts.epochs));
    }
  }
  model.validate();
  return model;
}

Vector svm_score(const SvmSet &model, const Vector &x, bool voting) {
  int L = static_cast<int>(model.language_order.size());
  Vector s = Vector::Zero(L);
  for (const auto &clf : model.classifiers) {
    if (x.size() != clf.weight.size()) throw DataError("svm_score: dimension mismatch");
    double margin = clf.weight.dot(x) + clf.bias;
    if (voting) {
      // Exact zero margins break towards the earlier language.
      if (margin >= 0.0) {
        s(clf.lang_a) += 1.0;
      } else {
        s(clf.lang_b) += 1.0;
      }
    } else {
      s(clf.lang_a) += margin;
      s(clf.lang_b) -= margin;
    }
  }
  return s / (L - 1);
}

ScoreMatrix svm_score_matrix(const SvmSet &model, const Matrix &x,
                             const std::vector<std::string> &utt_ids,
                             bool voting) {
  int n = static_cast<int>(x.rows());
  if (static_cast<int>(utt_ids.size()) != n) {
    throw DataError("svm_score_matrix: utt_id count mismatch");
  }
  ScoreMatrix sm;
  sm.utt_ids = utt_ids;
  sm.language_order = model.language_order;
  sm.kind = ScoreKind::raw;
  sm.scores = Matrix(n, model.language_order.size());
  for (int i = 0; i < n; ++i) {
    sm.scores.row(i) = svm_score(model, Vector(x.row(i).transpose()), voting).transpose();
  }
  sm.validate();
  return sm;
}

}  // namespace lidkit
