// src/scores.cpp

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

#include "lidkit/scores.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "lidkit/util.hpp"

namespace lidkit {

void ScoreMatrix::validate() const {
  if (scores.rows() != num_utterances() || scores.cols() != num_languages()) {
    throw DataError("ScoreMatrix: shape does not match id lists");
  }
  if (!scores.allFinite()) throw NumericError("ScoreMatrix: non-finite scores");
  std::set<std::string> langs(language_order.begin(), language_order.end());
  if (static_cast<int>(langs.size()) != num_languages()) {
    throw DataError("ScoreMatrix: duplicate language names");
  }
}

void check_aligned(const ScoreMatrix &a, const ScoreMatrix &b) {
  if (a.utt_ids != b.utt_ids) {
    throw DataError("score matrices are not aligned: utt_id sequences differ");
  }
  if (a.language_order != b.language_order) {
    throw DataError("score matrices are not aligned: language orders differ");
  }
}

void write_score_tsv(const ScoreMatrix &scores, const std::string &path) {
  scores.validate();
  std::ostringstream out;
  out << "utt_id";
  for (const auto &lang : scores.language_order) out << '\t' << lang;
  out << '\n';
  for (int i = 0; i < scores.num_utterances(); ++i) {
    out << scores.utt_ids[i];
    for (int l = 0; l < scores.num_languages(); ++l) {
      out << '\t' << format_double(scores.scores(i, l));
    }
    out << '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write scores: " + path);
  f << out.str();
}

ScoreMatrix read_score_tsv(const std::string &path, ScoreKind kind) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open scores: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty score file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  ScoreMatrix sm;
  sm.kind = kind;
  {
    std::istringstream header(line);
    std::string tok;
    if (!std::getline(header, tok, '\t') || tok != "utt_id") {
      throw DataError("score file missing utt_id header: " + path);
    }
    while (std::getline(header, tok, '\t')) sm.language_order.push_back(tok);
  }
  if (sm.language_order.empty()) throw DataError("score file has no languages: " + path);

  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    std::getline(ls, tok, '\t');
    sm.utt_ids.push_back(tok);
    std::vector<double> vals;
    while (std::getline(ls, tok, '\t')) {
      try {
        vals.push_back(std::stod(tok));
      } catch (const std::exception &) {
        throw DataError("bad score at line " + std::to_string(line_no) + ": " + tok);
      }
    }
    if (vals.size() != sm.language_order.size()) {
      throw DataError("score row at line " + std::to_string(line_no) +
                      " has wrong column count");
    }
    rows.push_back(std::move(vals));
  }
  sm.scores = Matrix(rows.size(), sm.language_order.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t l = 0; l < rows[i].size(); ++l) sm.scores(i, l) = rows[i][l];
  }
  sm.validate();
  return sm;
}

}  // namespace lidkit
