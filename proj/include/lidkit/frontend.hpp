// lidkit/frontend.hpp

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

#ifndef LIDKIT_FRONTEND_HPP_
#define LIDKIT_FRONTEND_HPP_

#include "lidkit/types.hpp"
#include "lidkit/wav.hpp"

namespace lidkit {

struct FrameConfig {
  double window_ms = 20.0;
  double hop_ms = 10.0;

  int window_samples(int sample_rate_hz) const;
  int hop_samples(int sample_rate_hz) const;
  double frame_rate_hz() const { return 1000.0 / hop_ms; }
};

struct MfccConfig {
  int n_filters = 24;
  int n_ceps = 7;
  bool include_energy = false;  // replaces c0 with frame log-energy
  double preemphasis = 0.97;
};

// Shifted delta cepstra parameters (N-d-P-k).
struct SdcConfig {
  int N = 7;  // cepstral dims used
  int d = 1;  // delta spread
  int P = 3;  // block shift
  int k = 7;  // block count

  int output_dims() const { return N * k; }
  // Temporal half-span of the stacking, used as the VAD context.
  int context_frames() const { return d + (k - 1) * P; }
};

enum class VadMode { energy_threshold, snr_estimate };

struct VadConfig {
  VadMode mode = VadMode::energy_threshold;
  double margin_db = 30.0;
  double context_ratio = 0.7;
};

enum class CmvnScope { per_utterance, sliding };

// Number of frames for a signal of `len` samples: floor((len - win)/hop) + 1.
int frame_count(int len, int win, int hop);

// Per-frame energies in dB of the raw (un-preemphasized, un-windowed)
// frames: 10 log10(max(sum x^2, 1e-10)).
Vector frame_energies_db(const AudioSignal &signal, const FrameConfig &frame);

// MFCC per frame: pre-emphasis, Hamming window, power spectrum (FFT padded
// to the next power of two), mel filterbank, log (floored), orthonormal
// DCT-II, keep n_ceps coefficients. Mask starts all-speech.
FeatureMatrix extract_mfcc(const AudioSignal &signal, const FrameConfig &frame,
                           const MfccConfig &mfcc);

// [c, delta, delta-delta]; regression deltas over +-delta_window frames
// with edge replication.
FeatureMatrix append_deltas(const FeatureMatrix &feat, int delta_window = 2);

// SDC stack: block j of frame t is c(t+jP+d) - c(t+jP-d) over the first
// cfg.N dims, j = 0..k-1, out-of-range frames replicated at the edges.
// Output has N*k dims and the input mask.
FeatureMatrix build_sdc(const FeatureMatrix &cepstra, const SdcConfig &cfg);

// Energy VAD.
//  - energy_threshold: speech when the frame energy exceeds the
//    (max - margin_db) threshold or the equal-posterior split of a
//    two-component GMM fitted on the energies (skipped when degenerate).
//    Frames at the absolute energy floor are never speech.
//  - snr_estimate: noise floor = mean of the lowest-decile energies;
//    speech when energy - floor > margin_db.
SpeechMask energy_vad(const AudioSignal &signal, const FrameConfig &frame,
                      const VadConfig &cfg);

// output[t] = fraction of speech in mask[t-c .. t+c] (edge-clipped) >= ratio.
SpeechMask context_mask(const SpeechMask &mask, int context_frames, double ratio);

// Mean/variance normalization over speech frames (population variance),
// applied to every frame. Sliding scope centers the window on the frame's
// rank among speech frames; window_s is converted with frame_rate_hz.
FeatureMatrix cmvn(const FeatureMatrix &feat, CmvnScope scope,
                   double window_s = 3.0, double frame_rate_hz = 100.0);

// Rank-based warp of each dim to standard normal quantiles over a centered
// window (in speech frames, edge-clipped). Non-speech frames pass through.
FeatureMatrix feature_warp(const FeatureMatrix &feat, int window_frames = 301);

// Front-end recipe for the spectral SDC-MFCC system: 7 MFCCs + 49 SDC
// (7-1-3-7) = 56 dims, energy VAD restricted by the 70% context rule,
// then CMVN and feature warping over speech frames.
struct FrontendConfig {
  FrameConfig frame;
  MfccConfig mfcc;
  SdcConfig sdc;
  VadConfig vad;
  CmvnScope cmvn_scope = CmvnScope::per_utterance;
  double cmvn_window_s = 3.0;
  int warp_window_frames = 301;
  bool apply_warp = true;
};

FeatureMatrix sdc_mfcc_features(const AudioSignal &signal, const FrontendConfig &cfg);

}  // namespace lidkit

#endif  // LIDKIT_FRONTEND_HPP_
