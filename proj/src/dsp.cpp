// src/dsp.cpp

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

#include "lidkit/dsp.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>

#include "lidkit/util.hpp"

namespace lidkit {

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

Vector hamming_window(int n) {
  Vector w(n);
  if (n == 1) {
    w(0) = 1.0;
    return w;
  }
  for (int i = 0; i < n; ++i) {
    w(i) = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (n - 1));
  }
  return w;
}

std::vector<std::complex<double>> fft_forward(const std::vector<double> &x, int nfft) {
  std::vector<double> padded(x);
  padded.resize(nfft, 0.0);
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, padded);
  return spectrum;
}

Vector power_spectrum(const std::vector<double> &frame, int nfft) {
  auto spec = fft_forward(frame, nfft);
  int bins = nfft / 2 + 1;
  Vector p(bins);
  for (int i = 0; i < bins; ++i) p(i) = std::norm(spec[i]);
  return p;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Matrix mel_filterbank(int n_filters, int nfft, double sample_rate_hz) {
  if (n_filters < 1) throw ConfigError("mel_filterbank: n_filters must be >= 1");
  int bins = nfft / 2 + 1;
  double nyquist = sample_rate_hz / 2.0;
  double mel_hi = hz_to_mel(nyquist);

  std::vector<double> edges(n_filters + 2);
  for (int i = 0; i < n_filters + 2; ++i) {
    edges[i] = mel_to_hz(mel_hi * i / (n_filters + 1));
  }

  Matrix fb = Matrix::Zero(n_filters, bins);
  for (int m = 0; m < n_filters; ++m) {
    double lo = edges[m], center = edges[m + 1], hi = edges[m + 2];
    for (int i = 0; i < bins; ++i) {
      double f = i * sample_rate_hz / nfft;
      if (f <= lo || f >= hi) continue;
      fb(m, i) = f <= center ? (f - lo) / (center - lo) : (hi - f) / (hi - center);
    }
  }
  return fb;
}

Matrix dct2_orthonormal(int n_out, int n_in) {
  Matrix d(n_out, n_in);
  double s0 = std::sqrt(1.0 / n_in);
  double s = std::sqrt(2.0 / n_in);
  for (int j = 0; j < n_out; ++j) {
    for (int m = 0; m < n_in; ++m) {
      d(j, m) = (j == 0 ? s0 : s) * std::cos(M_PI * j * (m + 0.5) / n_in);
    }
  }
  return d;
}

double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw NumericError("norm_quantile: p must be in (0,1)");

  // Acklam's rational approximation.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425, p_high = 1 - p_low;
  double x;
  if (p < p_low) {
    double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= p_high) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }

  // One Halley step against the exact CDF.
  double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  x = x - u / (1.0 + x * u / 2.0);
  return x;
}

}  // namespace lidkit
