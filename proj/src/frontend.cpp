// src/frontend.cpp

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

#include "lidkit/frontend.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lidkit/dsp.hpp"
#include "lidkit/util.hpp"

namespace lidkit {

int FrameConfig::window_samples(int sample_rate_hz) const {
  return static_cast<int>(std::lround(window_ms * sample_rate_hz / 1000.0));
}

int FrameConfig::hop_samples(int sample_rate_hz) const {
  return static_cast<int>(std::lround(hop_ms * sample_rate_hz / 1000.0));
}

int frame_count(int len, int win, int hop) {
  if (len < win) return 0;
  return (len - win) / hop + 1;
}

Vector frame_energies_db(const AudioSignal &signal, const FrameConfig &frame) {
  int win = frame.window_samples(signal.sample_rate_hz);
  int hop = frame.hop_samples(signal.sample_rate_hz);
  int n = frame_count(static_cast<int>(signal.samples.size()), win, hop);
  Vector e(n);
  for (int t = 0; t < n; ++t) {
    double acc = 0.0;
    for (int i = 0; i < win; ++i) {
      double s = signal.samples[t * hop + i];
      acc += s * s;
    }
    e(t) = 10.0 * std::log10(std::max(acc, kLogFloor));
  }
  return e;
}

FeatureMatrix extract_mfcc(const AudioSignal &signal, const FrameConfig &frame,
                           const MfccConfig &mfcc) {
  if (signal.samples.empty()) throw DataError("extract_mfcc: empty signal");
  if (mfcc.n_ceps < 1 || mfcc.n_ceps > mfcc.n_filters) {
    throw ConfigError("extract_mfcc: need 0 < n_ceps <= n_filters");
  }
  int sr = signal.sample_rate_hz;
  int win = frame.window_samples(sr);
  int hop = frame.hop_samples(sr);
  if (win < hop || hop <= 0) throw ConfigError("extract_mfcc: window_ms >= hop_ms > 0 required");
  int n_frames = frame_count(static_cast<int>(signal.samples.size()), win, hop);
  if (n_frames < 1) {
    throw DataError("extract_mfcc: signal shorter than one window");
  }

  // Pre-emphasis with first-sample replication.
  std::vector<double> pre(signal.samples.size());
  pre[0] = signal.samples[0] * (1.0 - mfcc.preemphasis);
  for (std::size_t i = 1; i < pre.size(); ++i) {
    pre[i] = signal.samples[i] - mfcc.preemphasis * signal.samples[i - 1];
  }

  int nfft = next_pow2(win);
  Vector window = hamming_window(win);
  Matrix fb = mel_filterbank(mfcc.n_filters, nfft, sr);
  Matrix dct = dct2_orthonormal(mfcc.n_ceps, mfcc.n_filters);

  Matrix out(n_frames, mfcc.n_ceps);
  std::vector<double> buf(win);
  for (int t = 0; t < n_frames; ++t) {
    double energy = 0.0;
    for (int i = 0; i < win; ++i) {
      buf[i] = pre[t * hop + i] * window(i);
      energy += buf[i] * buf[i];
    }
    Vector power = power_spectrum(buf, nfft);
    Vector fbank = fb * power;
    for (int m = 0; m < mfcc.n_filters; ++m) {
      fbank(m) = std::log(std::max(fbank(m), kLogFloor));
    }
    Vector ceps = dct * fbank;
    if (mfcc.include_energy) {
      ceps(0) = std::log(std::max(energy, kLogFloor));
    }
    out.row(t) = ceps.transpose();
  }
  return FeatureMatrix(std::move(out));
}

FeatureMatrix append_deltas(const FeatureMatrix &feat, int delta_window) {
  if (feat.frames() == 0) throw DataError("append_deltas: empty input");
  if (delta_window < 1) throw ConfigError("append_deltas: delta_window must be >= 1");
  int T = feat.frames(), D = feat.dims();

  double norm = 0.0;
  for (int d = 1; d <= delta_window; ++d) norm += 2.0 * d * d;

  auto regress = [&](const Matrix &x) {
    Matrix dx(T, D);
    for (int t = 0; t < T; ++t) {
      Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(D);
      for (int d = 1; d <= delta_window; ++d) {
        int hi = std::min(t + d, T - 1);
        int lo = std::max(t - d, 0);
        acc += d * (x.row(hi) - x.row(lo));
      }
      dx.row(t) = acc / norm;
    }
    return dx;
  };

  Matrix d1 = regress(feat.data);
  Matrix d2 = regress(d1);
  Matrix out(T, 3 * D);
  out << feat.data, d1, d2;
  return FeatureMatrix(std::move(out), feat.mask);
}

FeatureMatrix build_sdc(const FeatureMatrix &cepstra, const SdcConfig &cfg) {
  if (cfg.N < 1 || cfg.d < 1 || cfg.P < 1 || cfg.k < 1) {
    throw ConfigError("build_sdc: N, d, P, k must all be positive");
  }
  if (cepstra.dims() < cfg.N) {
    throw DataError("build_sdc: input has " + std::to_string(cepstra.dims()) +
                    " dims, need at least N = " + std::to_string(cfg.N));
  }
  int T = cepstra.frames();
  auto clamp = [T](int t) { return std::max(0, std::min(t, T - 1)); };

  Matrix out(T, cfg.output_dims());
  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < cfg.k; ++j) {
      int hi = clamp(t + j * cfg.P + cfg.d);
      int lo = clamp(t + j * cfg.P - cfg.d);
      out.block(t, j * cfg.N, 1, cfg.N) =
          cepstra.data.block(hi, 0, 1, cfg.N) - cepstra.data.block(lo, 0, 1, cfg.N);
    }
  }
  return FeatureMatrix(std::move(out), cepstra.mask);
}

namespace {

// Equal-posterior crossing of a two-component 1-D GMM fitted on the
// energies; returns false when the fit is unimodal or degenerate.
bool bimodal_split(const Vector &e, double *threshold) {
  int n = static_cast<int>(e.size());
  if (n < 4) return false;
  std::vector<double> sorted(e.data(), e.data() + n);
  std::sort(sorted.begin(), sorted.end());
  double m1 = sorted[n / 4], m2 = sorted[(3 * n) / 4];
  if (m2 - m1 < 1e-9) return false;
  double mean = e.mean();
  double var = (e.array() - mean).square().mean();
  if (var < 1e-12) return false;
  double v1 = var, v2 = var, w1 = 0.5, w2 = 0.5;

  Vector resp(n);
  for (int iter = 0; iter < 50; ++iter) {
    double n1 = 0, s1 = 0, ss1 = 0, n2 = 0, s2 = 0, ss2 = 0;
    for (int i = 0; i < n; ++i) {
      double x = e(i);
      double l1 = std::log(w1) - 0.5 * std::log(v1) - (x - m1) * (x - m1) / (2 * v1);
      double l2 = std::log(w2) - 0.5 * std::log(v2) - (x - m2) * (x - m2) / (2 * v2);
      double r = 1.0 / (1.0 + std::exp(l2 - l1));  // posterior of comp 1
      n1 += r;
      s1 += r * x;
      ss1 += r * x * x;
      n2 += 1 - r;
      s2 += (1 - r) * x;
      ss2 += (1 - r) * x * x;
    }
    if (n1 < 1e-6 || n2 < 1e-6) return false;
    m1 = s1 / n1;
    m2 = s2 / n2;
    v1 = std::max(ss1 / n1 - m1 * m1, 1e-6 * var);
    v2 = std::max(ss2 / n2 - m2 * m2, 1e-6 * var);
    w1 = n1 / n;
    w2 = n2 / n;
  }
  if (m1 > m2) {
    std::swap(m1, m2);
    std::swap(v1, v2);
    std::swap(w1, w2);
  }
  if (m2 - m1 < 1e-6 || w1 < 1e-3 || w2 < 1e-3) return false;

  auto diff = [&](double x) {
    double l1 = std::log(w1) - 0.5 * std::log(v1) - (x - m1) * (x - m1) / (2 * v1);
    double l2 = std::log(w2) - 0.5 * std::log(v2) - (x - m2) * (x - m2) / (2 * v2);
    return l1 - l2;
  };
  double lo = m1, hi = m2;
  if (diff(lo) <= 0.0 || diff(hi) >= 0.0) return false;
  for (int i = 0; i < 100; ++i) {
    double mid = 0.5 * (lo + hi);
    (diff(mid) > 0.0 ? lo : hi) = mid;
  }
  *threshold = 0.5 * (lo + hi);
  return true;
}

}  // namespace

SpeechMask energy_vad(const AudioSignal &signal, const FrameConfig &frame,
                      const VadConfig &cfg) {
  Vector e = frame_energies_db(signal, frame);
  int n = static_cast<int>(e.size());
  if (n < 1) throw DataError("energy_vad: signal shorter than one frame");
  SpeechMask mask(n, 0);
  const double floor_db = 10.0 * std::log10(kLogFloor);

  if (cfg.mode == VadMode::snr_estimate) {
    int decile = std::max(1, n / 10);
    std::vector<double> sorted(e.data(), e.data() + n);
    std::sort(sorted.begin(), sorted.end());
    double noise_floor = 0.0;
    for (int i = 0; i < decile; ++i) noise_floor += sorted[i];
    noise_floor /= decile;
    for (int t = 0; t < n; ++t) {
      mask[t] = (e(t) - noise_floor > cfg.margin_db) ? 1 : 0;
    }
    return mask;
  }

  double margin_threshold = e.maxCoeff() - cfg.margin_db;
  double split = 0.0;
  bool have_split = bimodal_split(e, &split);
  for (int t = 0; t < n; ++t) {
    if (e(t) <= floor_db + 1e-12) continue;  // digital silence
    bool speech = e(t) > margin_threshold || (have_split && e(t) > split);
    mask[t] = speech ? 1 : 0;
  }
  return mask;
}

SpeechMask context_mask(const SpeechMask &mask, int context_frames, double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw ConfigError("context_mask: ratio must be in (0,1]");
  if (context_frames < 0) throw ConfigError("context_mask: negative context");
  int n = static_cast<int>(mask.size());
  SpeechMask out(n, 0);
  for (int t = 0; t < n; ++t) {
    int lo = std::max(0, t - context_frames);
    int hi = std::min(n - 1, t + context_frames);
    int count = 0;
    for (int i = lo; i <= hi; ++i) count += mask[i] ? 1 : 0;
    out[t] = (static_cast<double>(count) / (hi - lo + 1) >= ratio) ? 1 : 0;
  }
  return out;
}

namespace {

std::vector<int> speech_indices(const SpeechMask &mask) {
  std::vector<int> idx;
  for (int t = 0; t < static_cast<int>(mask.size()); ++t) {
    if (mask[t]) idx.push_back(t);
  }
  return idx;
}

}  // namespace

FeatureMatrix cmvn(const FeatureMatrix &feat, CmvnScope scope, double window_s,
                   double frame_rate_hz) {
  feat.validate();
  auto idx = speech_indices(feat.mask);
  if (idx.size() < 2) throw DataError("cmvn: fewer than 2 speech frames");
  int T = feat.frames(), D = feat.dims();
  int ns = static_cast<int>(idx.size());
  FeatureMatrix out(Matrix(T, D), feat.mask);

  auto normalize_range = [&](int lo, int hi, int t) {
    // stats over speech ranks [lo, hi], applied to frame t
    int w = hi - lo + 1;
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(D);
    for (int i = lo; i <= hi; ++i) mean += feat.data.row(idx[i]);
    mean /= w;
    Eigen::RowVectorXd var = Eigen::RowVectorXd::Zero(D);
    for (int i = lo; i <= hi; ++i) {
      var += (feat.data.row(idx[i]) - mean).array().square().matrix();
    }
    var /= w;
    Eigen::RowVectorXd inv_std =
        var.array().max(1e-20).sqrt().inverse().matrix();
    out.data.row(t) = (feat.data.row(t) - mean).cwiseProduct(inv_std);
  };

  if (scope == CmvnScope::per_utterance) {
    // Same stats for every frame.
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(D);
    for (int i : idx) mean += feat.data.row(i);
    mean /= ns;
    Eigen::RowVectorXd var = Eigen::RowVectorXd::Zero(D);
    for (int i : idx) var += (feat.data.row(i) - mean).array().square().matrix();
    var /= ns;
    Eigen::RowVectorXd inv_std = var.array().max(1e-20).sqrt().inverse().matrix();
    for (int t = 0; t < T; ++t) {
      out.data.row(t) = (feat.data.row(t) - mean).cwiseProduct(inv_std);
    }
    return out;
  }

  int wf = std::max(2, static_cast<int>(std::lround(window_s * frame_rate_hz)));
  int half = (wf - 1) / 2;
  for (int t = 0; t < T; ++t) {
    // center at this frame's rank among speech frames
    int rank = static_cast<int>(std::lower_bound(idx.begin(), idx.end(), t) - idx.begin());
    rank = std::min(rank, ns - 1);
    int lo = std::max(0, rank - half);
    int hi = std::min(ns - 1, rank + half);
    normalize_range(lo, hi, t);
  }
  return out;
}

FeatureMatrix feature_warp(const FeatureMatrix &feat, int window_frames) {
  feat.validate();
  if (window_frames < 3 || window_frames % 2 == 0) {
    throw ConfigError("feature_warp: window must be odd and >= 3");
  }
  auto idx = speech_indices(feat.mask);
  int ns = static_cast<int>(idx.size());
  FeatureMatrix out = feat;
  if (ns == 0) return out;
  int half = (window_frames - 1) / 2;
  int D = feat.dims();

  for (int d = 0; d < D; ++d) {
    std::vector<double> v(ns);
    for (int i = 0; i < ns; ++i) v[i] = feat.data(idx[i], d);
    for (int i = 0; i < ns; ++i) {
      int lo = std::max(0, i - half);
      int hi = std::min(ns - 1, i + half);
      int w = hi - lo + 1;
      int rank = 1;
      for (int j = lo; j <= hi; ++j) {
        if (v[j] < v[i] || (v[j] == v[i] && j < i)) ++rank;
      }
      out.data(idx[i], d) = norm_quantile((rank - 0.5) / w);
    }
  }
  return out;
}

FeatureMatrix sdc_mfcc_features(const AudioSignal &signal, const FrontendConfig &cfg) {
  FeatureMatrix mfcc = extract_mfcc(signal, cfg.frame, cfg.mfcc);
  FeatureMatrix sdc = build_sdc(mfcc, cfg.sdc);

  Matrix stacked(mfcc.frames(), cfg.sdc.N + sdc.dims());
  stacked << mfcc.data.leftCols(cfg.sdc.N), sdc.data;

  SpeechMask vad = energy_vad(signal, cfg.frame, cfg.vad);
  SpeechMask ctx = context_mask(vad, cfg.sdc.context_frames(), cfg.vad.context_ratio);
  SpeechMask mask(vad.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = vad[i] && ctx[i];

  FeatureMatrix feat(std::move(stacked), std::move(mask));
  if (feat.speech_frames() < 2) {
    throw DataError("sdc_mfcc_features: fewer than 2 speech frames after VAD");
  }
  feat = cmvn(feat, cfg.cmvn_scope, cfg.cmvn_window_s, cfg.frame.frame_rate_hz());
  if (cfg.apply_warp) feat = feature_warp(feat, cfg.warp_window_frames);
  return feat;
}

}  // namespace lidkit
