// lidkit/synth.hpp

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

#ifndef LIDKIT_SYNTH_HPP_
#define LIDKIT_SYNTH_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lidkit/manifest.hpp"

namespace lidkit {

// Desk-scale stand-in for real corpora. Each language is a pair of fixed
// random FIR filters (order 16) shaping white noise, crossfaded at a
// language-characteristic rate with a per-utterance random phase. Languages
// therefore differ both in their long-run spectral envelope and in their
// spectral dynamics; the latter is what survives per-utterance CMVN and
// feature warping, mirroring where the identity lives in real speech.
// Fully deterministic given the seed.
struct SynthSpec {
  int n_languages = 5;
  int languages_per_cluster = 3;
  std::map<Split, int> utterances_per_language = {
      {Split::train, 10}, {Split::dev, 4}, {Split::eval, 4}};
  double duration_min_s = 3.0;
  double duration_max_s = 10.0;
  std::uint64_t seed = 7;
  int sample_rate_hz = 8000;

  void validate() const;
};

// Per-language FIR taps (order 16, L2-normalized) and crossfade rate,
// deterministic in (seed, language index). Exposed so tests can reproduce
// the spectra.
std::vector<double> synth_language_filter(std::uint64_t seed, int language_index);
std::vector<double> synth_language_filter_alt(std::uint64_t seed, int language_index);
double synth_language_rate_hz(std::uint64_t seed, int language_index);

// Writes wav/ files plus manifest.tsv under out_dir; returns the manifest
// path. Re-running with the same spec produces byte-identical output.
std::string generate_synthetic_corpus(const SynthSpec &spec, const std::string &out_dir);

}  // namespace lidkit

#endif  // LIDKIT_SYNTH_HPP_
