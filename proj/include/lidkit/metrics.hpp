// lidkit/metrics.hpp

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

#ifndef LIDKIT_METRICS_HPP_
#define LIDKIT_METRICS_HPP_

#include <map>
#include <string>
#include <vector>

#include "lidkit/scores.hpp"
#include "lidkit/types.hpp"

namespace lidkit {

struct EvalReport {
  double accuracy = 0.0;
  double cavg_overall = 0.0;
  std::map<std::string, double> cavg_per_cluster;
  double cllr = 0.0;
  Eigen::MatrixXi confusion;  // rows = true language, cols = argmax
  std::vector<std::string> language_order;
};

// Argmax match rate; ties break to the earlier language.
double accuracy(const ScoreMatrix &scores, const std::vector<int> &labels);

// Detection cost at threshold 0 per cluster: for target l,
// cost_l = (Pmiss_l + mean_k Pfa_{l,k})/2; cluster cost is the mean over
// targets and the overall value the mean over clusters. Requires llr kind.
struct CavgResult {
  double overall = 0.0;
  std::map<std::string, double> per_cluster;
};
CavgResult compute_cavg(const ScoreMatrix &llr, const std::vector<int> &labels,
                        const std::map<std::string, std::string> &lang_to_cluster);

// Multiclass Cllr: per trial log2(1 + (|C|-1) exp(-llr_true)), averaged
// within each cluster, then over clusters.
double compute_cllr(const ScoreMatrix &llr, const std::vector<int> &labels,
                    const std::map<std::string, std::string> &lang_to_cluster);

EvalReport evaluate(const ScoreMatrix &llr, const std::vector<int> &labels,
                    const std::map<std::string, std::string> &lang_to_cluster);

// key: value lines; keys are accuracy, cavg_overall, cavg.<cluster>, cllr.
std::string report_text(const EvalReport &report);
// Flat machine-readable table: key<TAB>value with the same keys.
std::string report_table(const EvalReport &report);

}  // namespace lidkit

#endif  // LIDKIT_METRICS_HPP_
