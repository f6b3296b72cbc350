// tests/oracles.hpp

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

// Independent reference implementations the tests check the library
// against. Everything here is written for clarity, not speed, and must not
// call into the code paths it verifies.

#ifndef LIDKIT_TESTS_ORACLES_HPP_
#define LIDKIT_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "lidkit/types.hpp"
#include "lidkit/util.hpp"

namespace oracles {

using lidkit::Matrix;
using lidkit::Vector;

// O(n^2) DFT.
inline std::vector<std::complex<double>> naive_dft(const std::vector<double> &x, int nfft) {
  std::vector<std::complex<double>> out(nfft);
  for (int k = 0; k < nfft; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (int n = 0; n < static_cast<int>(x.size()); ++n) {
      double angle = -2.0 * M_PI * k * n / nfft;
      acc += x[n] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

inline Vector naive_power_spectrum(const std::vector<double> &frame, int nfft) {
  auto spec = naive_dft(frame, nfft);
  Vector p(nfft / 2 + 1);
  for (int i = 0; i <= nfft / 2; ++i) p(i) = std::norm(spec[i]);
  return p;
}

// Index-by-index SDC stacking definition.
inline Matrix brute_force_sdc(const Matrix &ceps, int N, int d, int P, int k) {
  int T = static_cast<int>(ceps.rows());
  Matrix out(T, N * k);
  auto clamp = [T](int t) { return std::max(0, std::min(t, T - 1)); };
  for (int t = 0; t < T; ++t) {
    for (int j = 0; j < k; ++j) {
      for (int c = 0; c < N; ++c) {
        out(t, j * N + c) = ceps(clamp(t + j * P + d), c) - ceps(clamp(t + j * P - d), c);
      }
    }
  }
  return out;
}

// Windowed majority count for the VAD context rule.
inline std::vector<std::uint8_t> brute_force_context(const std::vector<std::uint8_t> &mask,
                                                     int context, double ratio) {
  int n = static_cast<int>(mask.size());
  std::vector<std::uint8_t> out(n, 0);
  for (int t = 0; t < n; ++t) {
    int count = 0, total = 0;
    for (int i = t - context; i <= t + context; ++i) {
      if (i < 0 || i >= n) continue;
      ++total;
      count += mask[i] ? 1 : 0;
    }
    out[t] = (static_cast<double>(count) / total >= ratio) ? 1 : 0;
  }
  return out;
}

// Dense multivariate normal log-pdf via explicit inverse and determinant
// (a different route than the Cholesky solves used by the library).
inline double dense_gaussian_logpdf(const Vector &x, const Vector &mean, const Matrix &cov) {
  int d = static_cast<int>(x.size());
  Matrix inv = cov.inverse();
  double det = cov.determinant();
  Vector diff = x - mean;
  return -0.5 * (d * std::log(2.0 * M_PI) + std::log(det) + diff.dot(inv * diff));
}

// log(sum exp) in extended precision.
inline double logsumexp_ld(const std::vector<double> &vals) {
  long double mx = vals[0];
  for (double v : vals) mx = std::max<long double>(mx, v);
  long double sum = 0.0L;
  for (double v : vals) sum += expl(static_cast<long double>(v) - mx);
  return static_cast<double>(mx + logl(sum));
}

// Central finite differences of a scalar function of one coordinate.
template <typename F>
double central_difference(F &&f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Gaussian class blobs for classifier tests.
struct Blobs {
  Matrix x;
  std::vector<int> labels;
};

inline Blobs gaussian_blobs(const std::vector<Vector> &centers, int per_class, double sigma,
                            lidkit::Rng &rng) {
  int dim = static_cast<int>(centers[0].size());
  int n = per_class * static_cast<int>(centers.size());
  Blobs b;
  b.x = Matrix(n, dim);
  b.labels.resize(n);
  int row = 0;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    for (int i = 0; i < per_class; ++i) {
      for (int d = 0; d < dim; ++d) b.x(row, d) = centers[c](d) + sigma * rng.normal();
      b.labels[row] = static_cast<int>(c);
      ++row;
    }
  }
  return b;
}

}  // namespace oracles

#endif  // LIDKIT_TESTS_ORACLES_HPP_
