// src/types.cpp

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

#include "lidkit/types.hpp"

#include <cmath>

#include "lidkit/util.hpp"

namespace lidkit {

Matrix FeatureMatrix::speech_rows() const {
  Matrix out(speech_frames(), dims());
  int r = 0;
  for (int t = 0; t < frames(); ++t) {
    if (mask[t]) out.row(r++) = data.row(t);
  }
  return out;
}

void FeatureMatrix::validate() const {
  if (static_cast<int>(mask.size()) != frames()) {
    throw DataError("FeatureMatrix mask length does not match frame count");
  }
  if (!data.allFinite()) {
    throw DataError("FeatureMatrix contains NaN or Inf entries");
  }
}

}  // namespace lidkit
