// src/metrics.cpp

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

#include "lidkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lidkit/util.hpp"

namespace lidkit {

namespace {

void check_labels(const ScoreMatrix &scores, const std::vector<int> &labels) {
  if (static_cast<int>(labels.size()) != scores.num_utterances()) {
    throw DataError("metrics: label count does not match score rows");
  }
  for (int lab : labels) {
    if (lab < 0 || lab >= scores.num_languages()) {
      throw DataError("metrics: label out of range");
    }
  }
}

std::map<std::string, std::vector<int>> cluster_columns(
    const ScoreMatrix &scores, const std::map<std::string, std::string> &lang_to_cluster) {
  std::map<std::string, std::vector<int>> clusters;
  for (int l = 0; l < scores.num_languages(); ++l) {
    auto it = lang_to_cluster.find(scores.language_order[l]);
    if (it == lang_to_cluster.end()) {
      throw DataError("metrics: language " + scores.language_order[l] +
                      " has no cluster assignment");
    }
    clusters[it->second].push_back(l);
  }
  return clusters;
}

}  // namespace

double accuracy(const ScoreMatrix &scores, const std::vector<int> &labels) {
  scores.validate();
  check_labels(scores, labels);
  int correct = 0;
  for (int i = 0; i < scores.num_utterances(); ++i) {
    int best = 0;
    for (int l = 1; l < scores.num_languages(); ++l) {
      if (scores.scores(i, l) > scores.scores(i, best)) best = l;
    }
    if (best == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / std::max(1, scores.num_utterances());
}

CavgResult compute_cavg(const ScoreMatrix &llr, const std::vector<int> &labels,
                        const std::map<std::string, std::string> &lang_to_cluster) {
  llr.validate();
  check_labels(llr, labels);
  if (llr.kind != ScoreKind::llr) throw DataError("compute_cavg: scores must be LLRs");
  auto clusters = cluster_columns(llr, lang_to_cluster);

  std::vector<std::vector<int>> trials_of(llr.num_languages());
  for (int i = 0; i < llr.num_utterances(); ++i) trials_of[labels[i]].push_back(i);

  CavgResult result;
  double cluster_sum = 0.0;
  int cluster_count = 0;
  for (const auto &[name, cols] : clusters) {
    double cost_sum = 0.0;
    int targets = 0;
    for (int l : cols) {
      if (trials_of[l].empty()) {
        log_warn("compute_cavg: language " + llr.language_order[l] +
                 " has no trials; excluded from " + name);
        continue;
      }
      int miss = 0;
      for (int t : trials_of[l]) {
        if (llr.scores(t, l) <= 0.0) ++miss;
      }
      double pmiss = static_cast<double>(miss) / trials_of[l].size();
      double pfa_sum = 0.0;
      int nontargets = 0;
      for (int k : cols) {
        if (k == l || trials_of[k].empty()) continue;
        int fa = 0;
        for (int t : trials_of[k]) {
          if (llr.scores(t, l) > 0.0) ++fa;
        }
        pfa_sum += static_cast<double>(fa) / trials_of[k].size();
        ++nontargets;
      }
      double pfa = nontargets > 0 ? pfa_sum / nontargets : 0.0;
      cost_sum += 0.5 * (pmiss + pfa);
      ++targets;
    }
    if (targets == 0) {
      log_warn("compute_cavg: cluster " + name + " has no scored targets");
      continue;
    }
    double cavg = cost_sum / targets;
    result.per_cluster[name] = cavg;
    cluster_sum += cavg;
    ++cluster_count;
  }
  result.overall = cluster_count > 0 ? cluster_sum / cluster_count : 0.0;
  return result;
}

double compute_cllr(const ScoreMatrix &llr, const std::vector<int> &labels,
                    const std::map<std::string, std::string> &lang_to_cluster) {
  llr.validate();
  check_labels(llr, labels);
  if (llr.kind != ScoreKind::llr) throw DataError("compute_cllr: scores must be LLRs");
  auto clusters = cluster_columns(llr, lang_to_cluster);

  std::map<std::string, int> cluster_sizes;
  for (const auto &[name, cols] : clusters) cluster_sizes[name] = static_cast<int>(cols.size());

  // cost per trial: log2(1 + (|C|-1) exp(-llr_true)), the flat-prior
  // posterior cost of the true language within its cluster.
  std::map<std::string, double> sums;
  std::map<std::string, int> counts;
  for (int i = 0; i < llr.num_utterances(); ++i) {
    const std::string &lang = llr.language_order[labels[i]];
    const std::string &cluster = lang_to_cluster.at(lang);
    int size = cluster_sizes.at(cluster);
    double cost;
    if (size < 2) {
      cost = 0.0;  // singleton cluster carries no detection information
    } else {
      double x = std::log(static_cast<double>(size - 1)) - llr.scores(i, labels[i]);
      cost = std::log1p(std::exp(std::min(x, 700.0))) / std::log(2.0);
    }
    sums[cluster] += cost;
    counts[cluster] += 1;
  }
  double total = 0.0;
  int n_clusters = 0;
  for (const auto &[name, sum] : sums) {
    if (counts[name] == 0) continue;
    total += sum / counts[name];
    ++n_clusters;
  }
  return n_clusters > 0 ? total / n_clusters : 0.0;
}

EvalReport evaluate(const ScoreMatrix &llr, const std::vector<int> &labels,
                    const std::map<std::string, std::string> &lang_to_cluster) {
  EvalReport report;
  report.language_order = llr.language_order;
  report.accuracy = accuracy(llr, labels);
  CavgResult cavg = compute_cavg(llr, labels, lang_to_cluster);
  report.cavg_overall = cavg.overall;
  report.cavg_per_cluster = std::move(cavg.per_cluster);
  report.cllr = compute_cllr(llr, labels, lang_to_cluster);

  int L = llr.num_languages();
  report.confusion = Eigen::MatrixXi::Zero(L, L);
  for (int i = 0; i < llr.num_utterances(); ++i) {
    int best = 0;
    for (int l = 1; l < L; ++l) {
      if (llr.scores(i, l) > llr.scores(i, best)) best = l;
    }
    report.confusion(labels[i], best) += 1;
  }
  return report;
}

std::string report_text(const EvalReport &report) {
  std::ostringstream out;
  out << "accuracy: " << format_double(report.accuracy) << "\n";
  out << "cavg_overall: " << format_double(report.cavg_overall) << "\n";
  for (const auto &[name, value] : report.cavg_per_cluster) {
    out << "cavg." << name << ": " << format_double(value) << "\n";
  }
  out << "cllr: " << format_double(report.cllr) << "\n";
  return out.str();
}

std::string report_table(const EvalReport &report) {
  std::ostringstream out;
  out << "accuracy\t" << format_double(report.accuracy) << "\n";
  out << "cavg_overall\t" << format_double(report.cavg_overall) << "\n";
  for (const auto &[name, value] : report.cavg_per_cluster) {
    out << "cavg." << name << "\t" << format_double(value) << "\n";
  }
  out << "cllr\t" << format_double(report.cllr) << "\n";
  return out.str();
}

}  // namespace lidkit
