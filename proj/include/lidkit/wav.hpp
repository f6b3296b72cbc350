// lidkit/wav.hpp

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

#ifndef LIDKIT_WAV_HPP_
#define LIDKIT_WAV_HPP_

#include <string>
#include <vector>

namespace lidkit {

struct AudioSignal {
  std::vector<double> samples;  // in [-1, 1]
  int sample_rate_hz = 0;

  double duration_s() const {
    return sample_rate_hz > 0
               ? static_cast<double>(samples.size()) / sample_rate_hz
               : 0.0;
  }
};

// Reads a RIFF/WAVE file. Only PCM 16-bit mono is accepted; int16 samples
// are scaled by 1/32768. Stereo or non-PCM content raises DataError.
AudioSignal read_wav(const std::string &path);

// Writes PCM 16-bit mono, little-endian. Samples are clamped to [-1, 1]
// and rounded to the nearest int16.
void write_wav(const std::string &path, const AudioSignal &signal);

}  // namespace lidkit

#endif  // LIDKIT_WAV_HPP_
