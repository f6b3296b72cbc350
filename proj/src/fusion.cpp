// src/fusion.cpp

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

#include "lidkit/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "lidkit/mclr.hpp"
#include "lidkit/util.hpp"

namespace lidkit {

void FusionModel::validate() const {
  if (weights.size() < 1) throw DataError("FusionModel: need at least one subsystem");
  if (!weights.allFinite() || !beta.allFinite()) {
    throw NumericError("FusionModel: non-finite parameters");
  }
}

int fusion_fold_of(const std::string &utt_id, int folds) {
  return static_cast<int>(fnv1a64(utt_id) % static_cast<std::uint64_t>(folds));
}

namespace {

void check_alignment(const std::vector<ScoreMatrix> &systems) {
  if (systems.empty()) throw DataError("fusion: no subsystem scores");
  systems[0].validate();
  for (std::size_t s = 1; s < systems.size(); ++s) {
    systems[s].validate();
    check_aligned(systems[0], systems[s]);
  }
}

}  // namespace

FusionTrainResult fusion_train(const std::vector<ScoreMatrix> &subsystem_scores,
                               const std::vector<int> &labels, int folds) {
  check_alignment(subsystem_scores);
  if (folds < 2) throw ConfigError("fusion_train: folds must be >= 2");
  int n = subsystem_scores[0].num_utterances();
  int L = subsystem_scores[0].num_languages();
  int S = static_cast<int>(subsystem_scores.size());
  if (static_cast<int>(labels.size()) != n) throw DataError("fusion_train: label count");

  std::vector<int> fold(n);
  for (int i = 0; i < n; ++i) {
    fold[i] = fusion_fold_of(subsystem_scores[0].utt_ids[i], folds);
  }

  CeOptimOptions opts;  // flat priors, no regularization
  FusionTrainResult result;

  for (int f = 0; f < folds; ++f) {
    std::vector<int> train_rows, held_rows;
    for (int i = 0; i < n; ++i) (fold[i] == f ? held_rows : train_rows).push_back(i);
    if (train_rows.empty() || held_rows.empty()) {
      log_warn("fusion_train: fold " + std::to_string(f) +
               " is empty; skipping its held-out estimate");
      result.fold_heldout_ce.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    auto take = [&](const std::vector<int> &rows) {
      std::vector<Matrix> sys(S);
      std::vector<int> labs(rows.size());
      for (int s = 0; s < S; ++s) {
        sys[s] = Matrix(rows.size(), L);
        for (std::size_t r = 0; r < rows.size(); ++r) {
          sys[s].row(r) = subsystem_scores[s].scores.row(rows[r]);
        }
      }
      for (std::size_t r = 0; r < rows.size(); ++r) labs[r] = labels[rows[r]];
      return std::make_pair(sys, labs);
    };
    auto [train_sys, train_labs] = take(train_rows);
    auto [held_sys, held_labs] = take(held_rows);
    CeOptimResult fit = minimize_flat_prior_ce(train_sys, train_labs, Vector::Ones(S),
                                               Vector::Zero(L), opts);
    double held_ce =
        flat_prior_ce(held_sys, held_labs, fit.weights, fit.beta, 0.0, nullptr, nullptr);
    result.fold_heldout_ce.push_back(held_ce);
  }

  std::vector<Matrix> all_sys(S);
  for (int s = 0; s < S; ++s) all_sys[s] = subsystem_scores[s].scores;
  CeOptimResult fit =
      minimize_flat_prior_ce(all_sys, labels, Vector::Ones(S), Vector::Zero(L), opts);
  result.model.weights = fit.weights;
  result.model.beta = fit.beta;
  result.final_ce = fit.final_ce;
  result.model.validate();
  return result;
}

ScoreMatrix fusion_apply(const FusionModel &model,
                         const std::vector<ScoreMatrix> &subsystem_scores) {
  model.validate();
  check_alignment(subsystem_scores);
  if (model.weights.size() != static_cast<Eigen::Index>(subsystem_scores.size())) {
    throw DataError("fusion_apply: subsystem count mismatch");
  }
  if (model.beta.size() != subsystem_scores[0].num_languages()) {
    throw DataError("fusion_apply: language count mismatch");
  }

  ScoreMatrix out;
  out.utt_ids = subsystem_scores[0].utt_ids;
  out.language_order = subsystem_scores[0].language_order;
  out.kind = ScoreKind::raw;
  out.scores = Matrix::Zero(subsystem_scores[0].scores.rows(),
                            subsystem_scores[0].scores.cols());
  for (std::size_t s = 0; s < subsystem_scores.size(); ++s) {
    out.scores += model.weights(static_cast<int>(s)) * subsystem_scores[s].scores;
  }
  out.scores.rowwise() += model.beta.transpose();
  out.validate();
  return out;
}

ScoreMatrix to_llr_per_cluster(const ScoreMatrix &scores,
                               const std::map<std::string, std::string> &lang_to_cluster) {
  scores.validate();
  int L = scores.num_languages();

  // Column indices per cluster, in language order.
  std::map<std::string, std::vector<int>> clusters;
  for (int l = 0; l < L; ++l) {
    auto it = lang_to_cluster.find(scores.language_order[l]);
    if (it == lang_to_cluster.end()) {
      throw DataError("to_llr_per_cluster: language " + scores.language_order[l] +
                      " has no cluster assignment");
    }
    clusters[it->second].push_back(l);
  }
  for (const auto &[name, cols] : clusters) {
    if (cols.size() == 1) {
      log_warn("to_llr_per_cluster: cluster " + name +
               " has a single language; passing scores through");
    }
  }

  ScoreMatrix out;
  out.utt_ids = scores.utt_ids;
  out.language_order = scores.language_order;
  out.kind = ScoreKind::llr;
  out.scores = scores.scores;
  for (int i = 0; i < scores.num_utterances(); ++i) {
    for (const auto &[name, cols] : clusters) {
      if (cols.size() < 2) continue;
      double log_rest = std::log(static_cast<double>(cols.size() - 1));
      for (int l : cols) {
        double mx = -std::numeric_limits<double>::infinity();
        for (int k : cols) {
          if (k != l) mx = std::max(mx, scores.scores(i, k));
        }
        double sum = 0.0;
        for (int k : cols) {
          if (k != l) sum += std::exp(scores.scores(i, k) - mx);
        }
        out.scores(i, l) = scores.scores(i, l) - (mx + std::log(sum) - log_rest);
      }
    }
  }
  out.validate();
  return out;
}

}  // namespace lidkit
