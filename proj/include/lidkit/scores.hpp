// lidkit/scores.hpp

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

#ifndef LIDKIT_SCORES_HPP_
#define LIDKIT_SCORES_HPP_

#include <string>
#include <vector>

#include "lidkit/types.hpp"

namespace lidkit {

enum class ScoreKind { loglik, llr, raw };

// utterances x languages scores, the common currency between back-ends,
// calibration, fusion and metrics.
struct ScoreMatrix {
  std::vector<std::string> utt_ids;
  std::vector<std::string> language_order;
  Matrix scores;
  ScoreKind kind = ScoreKind::raw;

  int num_utterances() const { return static_cast<int>(utt_ids.size()); }
  int num_languages() const { return static_cast<int>(language_order.size()); }
  void validate() const;
};

// Same utterance sequence and language order; DataError otherwise.
void check_aligned(const ScoreMatrix &a, const ScoreMatrix &b);

// TSV with header `utt_id` followed by the language names; one row per
// utterance, 17 significant digits.
void write_score_tsv(const ScoreMatrix &scores, const std::string &path);
ScoreMatrix read_score_tsv(const std::string &path, ScoreKind kind);

}  // namespace lidkit

#endif  // LIDKIT_SCORES_HPP_
