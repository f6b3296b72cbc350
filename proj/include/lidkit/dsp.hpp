// lidkit/dsp.hpp

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

#ifndef LIDKIT_DSP_HPP_
#define LIDKIT_DSP_HPP_

#include <complex>
#include <vector>

#include "lidkit/types.hpp"

namespace lidkit {

// Floor applied before every log in the front-end.
constexpr double kLogFloor = 1e-10;

int next_pow2(int n);

Vector hamming_window(int n);

// Forward FFT of `x` zero-padded to nfft; full-length complex spectrum.
std::vector<std::complex<double>> fft_forward(const std::vector<double> &x, int nfft);

// |X|^2 for bins 0..nfft/2.
Vector power_spectrum(const std::vector<double> &frame, int nfft);

// HTK-style mel scale: mel(f) = 2595 log10(1 + f/700).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filterbank on FFT bins 0..nfft/2, centers equally spaced on
// the mel axis between 0 Hz and Nyquist, triangles linear in Hz.
Matrix mel_filterbank(int n_filters, int nfft, double sample_rate_hz);

// Orthonormal DCT-II matrix: out(j, m) = s_j cos(pi j (m + 1/2) / n_in),
// s_0 = sqrt(1/n_in), s_j = sqrt(2/n_in).
Matrix dct2_orthonormal(int n_out, int n_in);

// Standard normal quantile function (inverse CDF); |error| < 1e-13 after
// one Halley refinement of the Acklam approximation.
double norm_quantile(double p);

}  // namespace lidkit

#endif  // LIDKIT_DSP_HPP_
