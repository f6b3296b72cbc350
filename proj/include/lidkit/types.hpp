// lidkit/types.hpp

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

#ifndef LIDKIT_TYPES_HPP_
#define LIDKIT_TYPES_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace lidkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Per-frame speech/non-speech decisions; 1 = speech.
using SpeechMask = std::vector<std::uint8_t>;

// frames x dims feature carrier with an aligned speech mask.
struct FeatureMatrix {
  Matrix data;
  SpeechMask mask;

  FeatureMatrix() = default;
  explicit FeatureMatrix(Matrix m)
      : data(std::move(m)), mask(data.rows(), 1) {}
  FeatureMatrix(Matrix m, SpeechMask msk)
      : data(std::move(m)), mask(std::move(msk)) {}

  int frames() const { return static_cast<int>(data.rows()); }
  int dims() const { return static_cast<int>(data.cols()); }

  int speech_frames() const {
    int c = 0;
    for (auto v : mask) c += v ? 1 : 0;
    return c;
  }

  // Rows of `data` whose mask bit is set, in frame order.
  Matrix speech_rows() const;

  // Throws DataError on mask/row mismatch or non-finite entries.
  void validate() const;
};

}  // namespace lidkit

#endif  // LIDKIT_TYPES_HPP_
