// tests/test_backends.cpp

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

#include <doctest.h>

#include <cmath>
#include <set>

#include "lidkit/gaussian_backend.hpp"
#include "lidkit/mclr.hpp"
#include "lidkit/pairnet.hpp"
#include "lidkit/plda.hpp"
#include "lidkit/svm.hpp"
#include "lidkit/util.hpp"
#include "oracles.hpp"

using namespace lidkit;

namespace {

const std::vector<std::string> kLangs3 = {"eng", "fra", "spa"};
const std::vector<std::string> kLangs2 = {"eng", "fra"};

}  // namespace

// ---------------------------------------------------------------------------
// Gaussian back-end

TEST_CASE("gb_train: gamma 0 shares the pooled covariance everywhere") {
  Rng rng(61);
  std::vector<Vector> centers(3, Vector::Zero(4));
  centers[1] = Vector::Ones(4);
  centers[2] = -Vector::Ones(4);
  auto blobs = oracles::gaussian_blobs(centers, 40, 1.0, rng);
  GaussianBackend gb = gb_train(blobs.x, blobs.labels, kLangs3, 0.0);
  for (const auto &cov : gb.sigma_smoothed) {
    CHECK((cov - gb.sigma_global).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("gb_train: gamma 1 reproduces the per-language empirical covariance") {
  Rng rng(62);
  std::vector<Vector> centers = {Vector::Zero(3), Vector::Ones(3)};
  auto blobs = oracles::gaussian_blobs(centers, 200, 0.7, rng);
  GaussianBackend gb = gb_train(blobs.x, blobs.labels, kLangs2, 1.0);
  for (int l = 0; l < 2; ++l) {
    // empirical covariance of class l
    std::vector<int> rows;
    for (std::size_t i = 0; i < blobs.labels.size(); ++i) {
      if (blobs.labels[i] == l) rows.push_back(static_cast<int>(i));
    }
    Matrix x(rows.size(), 3);
    for (std::size_t i = 0; i < rows.size(); ++i) x.row(i) = blobs.x.row(rows[i]);
    Vector mean = x.colwise().mean();
    Matrix centered = x.rowwise() - mean.transpose();
    Matrix cov = centered.transpose() * centered / static_cast<double>(rows.size());
    CHECK((gb.sigma_smoothed[l] - cov).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("gb: two 1-D languages at +-1 put the decision boundary at 0") {
  Rng rng(63);
  int per = 4000;
  Matrix x(2 * per, 1);
  std::vector<int> labels(2 * per);
  for (int i = 0; i < per; ++i) {
    x(i, 0) = -1.0 + rng.normal();
    labels[i] = 0;
    x(per + i, 0) = 1.0 + rng.normal();
    labels[per + i] = 1;
  }
  GaussianBackend gb = gb_train(x, labels, kLangs2, 0.0);
  Vector probe(1);
  // scores cross exactly where the empirical means cross; near 0 for
  // symmetric data
  double lo = -0.2, hi = 0.2;
  for (int iter = 0; iter < 60; ++iter) {
    probe(0) = 0.5 * (lo + hi);
    Vector s = gb_score(gb, probe);
    (s(0) > s(1) ? lo : hi) = probe(0);
  }
  CHECK(std::abs(0.5 * (lo + hi)) < 0.05);
}

TEST_CASE("gb_score: the language mean is its own argmax under shared covariance") {
  Rng rng(64);
  std::vector<Vector> centers = {Vector::Zero(5), Vector::Ones(5),
                                 -2.0 * Vector::Ones(5)};
  auto blobs = oracles::gaussian_blobs(centers, 60, 0.8, rng);
  GaussianBackend gb = gb_train(blobs.x, blobs.labels, kLangs3, 0.0);
  for (int l = 0; l < 3; ++l) {
    Vector s = gb_score(gb, Vector(gb.means.row(l).transpose()));
    int argmax = 0;
    s.maxCoeff(&argmax);
    CHECK(argmax == l);
  }
}

TEST_CASE("gb_score: equidistant probes tie under a shared covariance") {
  Rng rng(65);
  std::vector<Vector> centers = {Vector::Zero(2), Vector::Ones(2)};
  auto blobs = oracles::gaussian_blobs(centers, 300, 0.5, rng);
  GaussianBackend gb = gb_train(blobs.x, blobs.labels, kLangs2, 0.0);
  Vector midpoint = 0.5 * (gb.means.row(0) + gb.means.row(1)).transpose();
  Vector s = gb_score(gb, midpoint);
  CHECK(std::abs(s(0) - s(1)) < 1e-10);
}

TEST_CASE("gb_score: matches the dense Gaussian log-pdf oracle") {
  Rng rng(66);
  int r = 5;
  std::vector<Vector> centers;
  for (int l = 0; l < 3; ++l) {
    Vector c(r);
    for (int j = 0; j < r; ++j) c(j) = 2.0 * rng.normal();
    centers.push_back(c);
  }
  auto blobs = oracles::gaussian_blobs(centers, 80, 0.9, rng);
  GaussianBackend gb = gb_train(blobs.x, blobs.labels, kLangs3, 0.1);
  for (int trial = 0; trial < 20; ++trial) {
    Vector w(r);
    for (int j = 0; j < r; ++j) w(j) = 2.0 * rng.normal();
    Vector s = gb_score(gb, w);
    for (int l = 0; l < 3; ++l) {
      double expected = oracles::dense_gaussian_logpdf(
          w, Vector(gb.means.row(l).transpose()), gb.sigma_smoothed[l]);
      CHECK(s(l) == doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("gb_score: score differences are affine in the i-vector when gamma = 0") {
  Rng rng(67);
  std::vector<Vector> centers = {Vector::Zero(3), Vector::Ones(3)};
  auto blobs = oracles::gaussian_blobs(centers, 100, 0.6, rng);
  GaussianBackend gb = gb_train(blobs.x, blobs.labels, kLangs2, 0.0);
  auto diff = [&](const Vector &w) {
    Vector s = gb_score(gb, w);
    return s(0) - s(1);
  };
  for (int trial = 0; trial < 10; ++trial) {
    Vector a(3), b(3);
    for (int j = 0; j < 3; ++j) {
      a(j) = rng.normal();
      b(j) = rng.normal();
    }
    double alpha = rng.uniform();
    double lhs = diff(alpha * a + (1 - alpha) * b);
    double rhs = alpha * diff(a) + (1 - alpha) * diff(b);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
  }
}

TEST_CASE("gb_train: a language with one sample falls back to the global covariance") {
  Rng rng(68);
  Matrix x(5, 2);
  std::vector<int> labels = {0, 0, 0, 0, 1};
  for (int i = 0; i < 5; ++i) {
    x(i, 0) = rng.normal();
    x(i, 1) = rng.normal();
  }
  GaussianBackend gb = gb_train(x, labels, kLangs2, 0.5);
  CHECK((gb.sigma_smoothed[1] - gb.sigma_global).cwiseAbs().maxCoeff() == 0.0);
}

// ---------------------------------------------------------------------------
// MCLR

namespace {

ScoreMatrix make_scores(const Matrix &scores, const std::vector<std::string> &langs,
                        ScoreKind kind = ScoreKind::loglik) {
  ScoreMatrix sm;
  sm.language_order = langs;
  sm.scores = scores;
  sm.kind = kind;
  sm.utt_ids.resize(scores.rows());
  for (int i = 0; i < scores.rows(); ++i) sm.utt_ids[i] = "u" + std::to_string(i);
  return sm;
}

}  // namespace

TEST_CASE("mclr_train: already-calibrated softmax scores stay put") {
  Rng rng(71);
  int n = 2000, L = 3;
  Matrix scores(n, L);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < L; ++l) scores(i, l) = rng.normal();
    // sample the label from softmax(scores) so the scores are calibrated
    std::vector<double> logp(L);
    for (int l = 0; l < L; ++l) logp[l] = scores(i, l);
    double lse = oracles::logsumexp_ld(logp);
    double u = rng.uniform(), acc = 0.0;
    labels[i] = L - 1;
    for (int l = 0; l < L; ++l) {
      acc += std::exp(logp[l] - lse);
      if (u < acc) {
        labels[i] = l;
        break;
      }
    }
  }
  ScoreMatrix sm = make_scores(scores, kLangs3);
  double before = flat_prior_ce({scores}, labels, Vector::Ones(1), Vector::Zero(L), 0.0,
                                nullptr, nullptr);
  MclrModel model = mclr_train(sm, labels);
  Vector beta = model.beta;
  Vector w(1);
  w(0) = model.alpha;
  double after = flat_prior_ce({scores}, labels, w, beta, 0.0, nullptr, nullptr);
  // Fitting L free parameters on N samples from the true model gains about
  // L/(2N) nats of training cross-entropy; with N = 2000 that is O(1e-3),
  // so "essentially unchanged" is asserted at that statistical scale.
  CHECK(before - after >= 0.0);
  CHECK(before - after < 2e-3);
  CHECK(model.alpha == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("mclr_train: final cross-entropy never exceeds the initial one") {
  Rng rng(72);
  int n = 300, L = 4;
  Matrix scores(n, L);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    labels[i] = i % L;
    for (int l = 0; l < L; ++l) {
      scores(i, l) = (l == labels[i] ? 1.5 : 0.0) + rng.normal();
    }
  }
  std::vector<std::string> langs = {"a", "b", "c", "d"};
  ScoreMatrix sm = make_scores(scores, langs);
  double initial = flat_prior_ce({scores}, labels, Vector::Ones(1), Vector::Zero(L), 0.0,
                                 nullptr, nullptr);
  MclrModel model = mclr_train(sm, labels);
  Vector w(1);
  w(0) = model.alpha;
  double final_ce = flat_prior_ce({scores}, labels, w, model.beta, 0.0, nullptr, nullptr);
  CHECK(final_ce <= initial + 1e-12);
}

TEST_CASE("mclr: analytic gradient matches central finite differences") {
  Rng rng(73);
  int n = 40, L = 3;
  Matrix scores(n, L);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    labels[i] = i % L;
    for (int l = 0; l < L; ++l) scores(i, l) = rng.normal();
  }
  Vector w(1), beta(L);
  w(0) = 1.3;
  for (int l = 0; l < L; ++l) beta(l) = 0.2 * rng.normal();

  Vector gw, gb_;
  flat_prior_ce({scores}, labels, w, beta, 0.0, &gw, &gb_);

  double h = 1e-6;
  auto f_alpha = [&](double a) {
    Vector wa(1);
    wa(0) = a;
    return flat_prior_ce({scores}, labels, wa, beta, 0.0, nullptr, nullptr);
  };
  double fd = oracles::central_difference(f_alpha, w(0), h);
  CHECK(gw(0) == doctest::Approx(fd).epsilon(1e-5));

  for (int l = 0; l < L; ++l) {
    auto f_beta = [&](double b) {
      Vector bl = beta;
      bl(l) = b;
      return flat_prior_ce({scores}, labels, w, bl, 0.0, nullptr, nullptr);
    };
    double fdb = oracles::central_difference(f_beta, beta(l), h);
    CHECK(gb_(l) == doctest::Approx(fdb).epsilon(1e-5));
  }
}

TEST_CASE("mclr: objective is convex along random midpoints") {
  Rng rng(74);
  int n = 60, L = 3;
  Matrix scores(n, L);
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    labels[i] = i % L;
    for (int l = 0; l < L; ++l) scores(i, l) = rng.normal();
  }
  for (int trial = 0; trial < 20; ++trial) {
    Vector wa(1), wb(1), ba(L), bb(L);
    wa(0) = rng.uniform(-2.0, 2.0);
    wb(0) = rng.uniform(-2.0, 2.0);
    for (int l = 0; l < L; ++l) {
      ba(l) = rng.normal();
      bb(l) = rng.normal();
    }
    double fa = flat_prior_ce({scores}, labels, wa, ba, 0.0, nullptr, nullptr);
    double fb = flat_prior_ce({scores}, labels, wb, bb, 0.0, nullptr, nullptr);
    double fm = flat_prior_ce({scores}, labels, Vector(0.5 * (wa + wb)),
                              Vector(0.5 * (ba + bb)), 0.0, nullptr, nullptr);
    CHECK(fm <= 0.5 * (fa + fb) + 1e-9);
  }
}

TEST_CASE("mclr_apply: identity calibration keeps the affine part, uniform rows go to 0") {
  MclrModel model;
  model.alpha = 1.0;
  model.beta = Vector::Zero(3);
  Matrix scores(2, 3);
  scores << 1.0, 1.0, 1.0, 0.3, -0.2, 0.8;
  ScoreMatrix sm = make_scores(scores, kLangs3);
  ScoreMatrix out = mclr_apply(model, sm);
  CHECK(out.kind == ScoreKind::llr);
  // uniform scores give zero LLRs
  for (int l = 0; l < 3; ++l) CHECK(std::abs(out.scores(0, l)) < 1e-12);
  // and the conversion matches the extended-precision oracle
  for (int l = 0; l < 3; ++l) {
    std::vector<double> others;
    for (int k = 0; k < 3; ++k) {
      if (k != l) others.push_back(scores(1, k));
    }
    double expected =
        scores(1, l) - (oracles::logsumexp_ld(others) - std::log(others.size()));
    CHECK(out.scores(1, l) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("mclr_train: single-class input is rejected") {
  Matrix scores = Matrix::Zero(10, 2);
  std::vector<int> labels(10, 0);
  ScoreMatrix sm = make_scores(scores, kLangs2);
  CHECK_THROWS_AS(mclr_train(sm, labels), DataError);
}

// ---------------------------------------------------------------------------
// PLDA

namespace {

struct PldaWorld {
  Matrix x;
  std::vector<int> labels;
  Matrix subspace;  // true F
  Matrix centers;   // realized class centers (classes x dim)
};

PldaWorld sample_plda(int dim, int rank, int classes, int per_class, double noise,
                      Rng &rng) {
  PldaWorld world;
  world.subspace = Matrix(dim, rank);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < rank; ++j) world.subspace(i, j) = rng.normal();
  }
  world.x = Matrix(classes * per_class, dim);
  world.labels.resize(classes * per_class);
  world.centers = Matrix(classes, dim);
  int row = 0;
  for (int c = 0; c < classes; ++c) {
    Vector h(rank);
    for (int j = 0; j < rank; ++j) h(j) = rng.normal();
    world.centers.row(c) = (world.subspace * h).transpose();
    for (int i = 0; i < per_class; ++i) {
      for (int d = 0; d < dim; ++d) {
        world.x(row, d) = world.centers(c, d) + noise * rng.normal();
      }
      world.labels[row] = c;
      ++row;
    }
  }
  return world;
}

}  // namespace

TEST_CASE("plda_train: recovers the between-class covariance of a generative model") {
  Rng rng(81);
  PldaWorld world = sample_plda(10, 3, 50, 30, 0.5, rng);
  PldaTrainResult r = plda_train(world.x, world.labels, 3, 60, 5);
  // the identifiable target at 50 classes is the realized center scatter;
  // the population F F' itself carries ~sqrt(2/50) = 20% sampling noise
  Vector cmean = world.centers.colwise().mean();
  Matrix centered = world.centers.rowwise() - cmean.transpose();
  Matrix truth = centered.transpose() * centered / world.centers.rows();
  Matrix learned = r.model.subspace * r.model.subspace.transpose();
  double rel = (learned - truth).norm() / truth.norm();
  CHECK(rel < 0.15);
}

TEST_CASE("plda_train: EM objective is non-decreasing") {
  Rng rng(82);
  PldaWorld world = sample_plda(6, 2, 12, 15, 0.8, rng);
  PldaTrainResult r = plda_train(world.x, world.labels, 2, 25, 3);
  for (std::size_t i = 1; i < r.objective.size(); ++i) {
    double allowed = 1e-8 * std::abs(r.objective[i - 1]);
    CHECK(r.objective[i] >= r.objective[i - 1] - allowed);
  }
}

TEST_CASE("plda_train: rank 70 configuration is accepted at paper scale") {
  Rng rng(83);
  PldaWorld world = sample_plda(80, 5, 75, 4, 1.0, rng);
  PldaTrainResult r = plda_train(world.x, world.labels, 70, 2, 1);
  CHECK(r.model.rank() == 70);
  r.model.validate();
}

TEST_CASE("plda_train: rank above classes-1 is clipped with a warning") {
  Rng rng(84);
  PldaWorld world = sample_plda(8, 2, 4, 20, 0.5, rng);
  PldaTrainResult r = plda_train(world.x, world.labels, 7, 5, 2);
  CHECK(r.model.rank() == 3);
}

TEST_CASE("plda_score: single enrollment vector matches the dense joint-Gaussian oracle") {
  Rng rng(85);
  int dim = 4;
  PldaWorld world = sample_plda(dim, 2, 30, 10, 0.6, rng);
  PldaTrainResult r = plda_train(world.x, world.labels, 2, 30, 7);
  const PldaModel &m = r.model;

  Matrix between = m.subspace * m.subspace.transpose();
  Matrix total = between + m.sigma_w;

  for (int trial = 0; trial < 10; ++trial) {
    Vector enroll(dim), test(dim);
    for (int d = 0; d < dim; ++d) {
      enroll(d) = rng.normal();
      test(d) = rng.normal();
    }
    // oracle: joint covariance of (enroll, test) under the same class
    Matrix joint(2 * dim, 2 * dim);
    joint.topLeftCorner(dim, dim) = total;
    joint.bottomRightCorner(dim, dim) = total;
    joint.topRightCorner(dim, dim) = between;
    joint.bottomLeftCorner(dim, dim) = between;
    Vector stacked(2 * dim);
    stacked << enroll - m.mu, test - m.mu;
    double log_joint = oracles::dense_gaussian_logpdf(stacked, Vector::Zero(2 * dim), joint);
    double log_enroll =
        oracles::dense_gaussian_logpdf(enroll - m.mu, Vector::Zero(dim), total);
    double log_test =
        oracles::dense_gaussian_logpdf(test - m.mu, Vector::Zero(dim), total);
    double expected = (log_joint - log_enroll) - log_test;

    Matrix e(1, dim);
    e.row(0) = enroll.transpose();
    Vector s = plda_score(m, {e}, test);
    CHECK(s(0) == doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("plda_score: zero subspace means class-independent scores") {
  Rng rng(86);
  int dim = 3;
  PldaModel m;
  m.mu = Vector::Zero(dim);
  m.subspace = Matrix::Zero(dim, 1);
  m.sigma_w = Matrix::Identity(dim, dim);
  std::vector<Matrix> enroll;
  for (int l = 0; l < 3; ++l) {
    Matrix e(2, dim);
    for (int i = 0; i < 2; ++i) {
      for (int d = 0; d < dim; ++d) e(i, d) = rng.normal();
    }
    enroll.push_back(e);
  }
  Vector test(dim);
  for (int d = 0; d < dim; ++d) test(d) = rng.normal();
  Vector s = plda_score(m, enroll, test);
  CHECK((s.array() - s(0)).abs().maxCoeff() < 1e-10);
}

TEST_CASE("plda_score: concentrated within-class noise makes the matching mean win") {
  int dim = 3;
  PldaModel m;
  m.mu = Vector::Zero(dim);
  m.subspace = Matrix::Identity(dim, dim) * 2.0;
  m.sigma_w = Matrix::Identity(dim, dim) * 1e-4;
  std::vector<Matrix> enroll;
  Vector c0(dim), c1(dim);
  c0 << 1.0, 0.0, 0.0;
  c1 << 0.0, 1.0, 0.0;
  Matrix e0(1, dim), e1(1, dim);
  e0.row(0) = c0.transpose();
  e1.row(0) = c1.transpose();
  enroll.push_back(e0);
  enroll.push_back(e1);
  Vector s = plda_score(m, enroll, c0);
  CHECK(s(0) > s(1));
}

TEST_CASE("plda_score: identical enrollment sets give identical score vectors") {
  Rng rng(87);
  PldaWorld world = sample_plda(5, 2, 10, 8, 0.5, rng);
  PldaTrainResult r = plda_train(world.x, world.labels, 2, 10, 1);
  Matrix e(3, 5);
  for (int i = 0; i < 3; ++i) {
    for (int d = 0; d < 5; ++d) e(i, d) = rng.normal();
  }
  Vector test(5);
  for (int d = 0; d < 5; ++d) test(d) = rng.normal();
  Vector s = plda_score(r.model, {e, e, e}, test);
  CHECK((s.array() - s(0)).abs().maxCoeff() < 1e-12);
}

// ---------------------------------------------------------------------------
// SVM

TEST_CASE("svm_train: separable pair reaches zero hinge loss with correct signs") {
  Rng rng(91);
  Vector c0(2), c1(2);
  c0 << -2.0, 0.0;
  c1 << 2.0, 0.0;
  auto blobs = oracles::gaussian_blobs({c0, c1}, 50, 0.3, rng);
  SvmTrainOptions opts;
  opts.C = 100.0;
  opts.epochs = 500;
  SvmSet svm = svm_train(blobs.x, blobs.labels, kLangs2, opts);
  REQUIRE(svm.classifiers.size() == 1);
  const auto &clf = svm.classifiers[0];
  int correct = 0;
  for (int i = 0; i < blobs.x.rows(); ++i) {
    double margin = clf.weight.dot(blobs.x.row(i).transpose()) + clf.bias;
    double y = blobs.labels[i] == 0 ? 1.0 : -1.0;
    correct += y * margin > 0 ? 1 : 0;
  }
  CHECK(correct == blobs.x.rows());

  std::vector<double> y(blobs.x.rows());
  for (int i = 0; i < blobs.x.rows(); ++i) y[i] = blobs.labels[i] == 0 ? 1.0 : -1.0;
  double lambda = 1.0 / (opts.C * blobs.x.rows());
  double obj = svm_pair_objective(clf.weight, clf.bias, blobs.x, y, lambda);
  double hinge = obj - 0.5 * lambda * clf.weight.squaredNorm();
  CHECK(hinge < 1e-3);
}

TEST_CASE("svm_train: non-separable XOR-ish data still yields a finite model") {
  Rng rng(92);
  Matrix x(40, 2);
  std::vector<int> labels(40);
  for (int i = 0; i < 40; ++i) {
    double a = rng.uniform() < 0.5 ? -1.0 : 1.0;
    double b = rng.uniform() < 0.5 ? -1.0 : 1.0;
    x(i, 0) = a + 0.1 * rng.normal();
    x(i, 1) = b + 0.1 * rng.normal();
    labels[i] = a * b > 0 ? 0 : 1;
  }
  SvmTrainOptions opts;
  SvmSet svm = svm_train(x, labels, kLangs2, opts);
  CHECK(svm.classifiers[0].weight.allFinite());
  CHECK(std::isfinite(svm.classifiers[0].bias));
}

TEST_CASE("svm_train: learned boundary is within 5 degrees of the grid-search margin") {
  Rng rng(93);
  Vector c0(2), c1(2);
  c0 << -1.0, -0.5;
  c1 << 1.0, 0.5;
  auto blobs = oracles::gaussian_blobs({c0, c1}, 80, 0.25, rng);
  SvmTrainOptions opts;
  opts.C = 1000.0;
  opts.epochs = 4000;
  SvmSet svm = svm_train(blobs.x, blobs.labels, kLangs2, opts);
  Vector w = svm.classifiers[0].weight;

  // brute-force maximum-margin direction over an angle grid
  double best_margin = -1e18;
  double best_angle = 0.0;
  for (int deg = 0; deg < 1800; ++deg) {
    double angle = deg * M_PI / 1800.0;
    Vector u(2);
    u << std::cos(angle), std::sin(angle);
    double min_pos = 1e18, max_neg = -1e18;
    for (int i = 0; i < blobs.x.rows(); ++i) {
      double proj = u.dot(blobs.x.row(i).transpose());
      if (blobs.labels[i] == 0) {
        min_pos = std::min(min_pos, proj);
      } else {
        max_neg = std::max(max_neg, proj);
      }
    }
    double margin = std::max(min_pos - max_neg, max_neg - min_pos);
    if (margin > best_margin) {
      best_margin = margin;
      best_angle = angle;
    }
  }
  double svm_angle = std::atan2(w(1), w(0));
  double diff = std::abs(svm_angle - best_angle);
  while (diff > M_PI / 2) diff = std::abs(diff - M_PI);
  CHECK(diff < 5.0 * M_PI / 180.0);
}

TEST_CASE("svm_score: two languages give an antisymmetric score pair") {
  Rng rng(94);
  Vector c0(2), c1(2);
  c0 << -1, 0;
  c1 << 1, 0;
  auto blobs = oracles::gaussian_blobs({c0, c1}, 30, 0.3, rng);
  SvmSet svm = svm_train(blobs.x, blobs.labels, kLangs2, SvmTrainOptions{});
  Vector probe(2);
  probe << 0.7, -0.1;
  Vector s = svm_score(svm, probe);
  CHECK(s(0) == doctest::Approx(-s(1)).epsilon(1e-12));
}

TEST_CASE("svm_score: a point dominating every pair wins the argmax") {
  Rng rng(95);
  Vector c0(2), c1(2), c2(2);
  c0 << -3, 0;
  c1 << 3, 0;
  c2 << 0, 3;
  auto blobs = oracles::gaussian_blobs({c0, c1, c2}, 40, 0.3, rng);
  SvmSet svm = svm_train(blobs.x, blobs.labels, kLangs3, SvmTrainOptions{});
  Vector probe = c2;
  Vector s = svm_score(svm, probe);
  int argmax = 0;
  s.maxCoeff(&argmax);
  CHECK(argmax == 2);
}

TEST_CASE("svm: three Gaussian blobs classify held-out points at 95 percent") {
  Rng rng(96);
  Vector c0(4), c1(4), c2(4);
  c0 << 2, 0, 0, 0;
  c1 << 0, 2, 0, 0;
  c2 << 0, 0, 2, 0;
  auto train = oracles::gaussian_blobs({c0, c1, c2}, 100, 0.5, rng);
  auto held = oracles::gaussian_blobs({c0, c1, c2}, 100, 0.5, rng);
  SvmTrainOptions opts;
  opts.epochs = 400;
  SvmSet svm = svm_train(train.x, train.labels, kLangs3, opts);
  int correct = 0;
  for (int i = 0; i < held.x.rows(); ++i) {
    Vector s = svm_score(svm, Vector(held.x.row(i).transpose()));
    int argmax = 0;
    s.maxCoeff(&argmax);
    correct += argmax == held.labels[i] ? 1 : 0;
  }
  CHECK(static_cast<double>(correct) / held.x.rows() >= 0.95);
}

TEST_CASE("svm_score: voting variant counts pairwise wins") {
  Rng rng(97);
  Vector c0(2), c1(2);
  c0 << -1, 0;
  c1 << 1, 0;
  auto blobs = oracles::gaussian_blobs({c0, c1}, 30, 0.2, rng);
  SvmSet svm = svm_train(blobs.x, blobs.labels, kLangs2, SvmTrainOptions{});
  Vector probe(2);
  probe << -1.2, 0.0;
  Vector votes = svm_score(svm, probe, true);
  CHECK(votes(0) == doctest::Approx(1.0));
  CHECK(votes(1) == doctest::Approx(0.0));
}

// ---------------------------------------------------------------------------
// Pair generation and the pair-wise net

TEST_CASE("generate_pairs: 20 rounds on N vectors give 2*20*N pairs") {
  std::vector<int> labels;
  for (int i = 0; i < 30; ++i) labels.push_back(i % 3);
  auto pairs = generate_pairs(labels, 20, false, 1);
  CHECK(pairs.size() == 2u * 20u * 30u);
  for (const auto &p : pairs) {
    if (p.same) {
      CHECK(labels[p.a] == labels[p.b]);
      CHECK(p.a != p.b);
    } else {
      CHECK(labels[p.a] != labels[p.b]);
    }
  }
}

TEST_CASE("generate_pairs: balance lifts minority positives to half the majority") {
  std::vector<int> labels;
  for (int i = 0; i < 100; ++i) labels.push_back(0);
  for (int i = 0; i < 10; ++i) labels.push_back(1);
  auto pairs = generate_pairs(labels, 5, true, 2);
  int pos0 = 0, pos1 = 0;
  for (const auto &p : pairs) {
    if (!p.same) continue;
    (labels[p.a] == 0 ? pos0 : pos1) += 1;
  }
  CHECK(pos1 * 2 >= pos0);
}

TEST_CASE("generate_pairs: singleton language skips positives with a warning") {
  std::vector<int> labels = {0, 0, 0, 1};
  auto pairs = generate_pairs(labels, 3, false, 3);
  for (const auto &p : pairs) {
    if (p.same) CHECK(labels[p.a] == 0);
  }
  // vector 3 still contributes negative pairs
  int negatives_for_singleton = 0;
  for (const auto &p : pairs) {
    if (!p.same && labels[p.a] == 1) ++negatives_for_singleton;
  }
  CHECK(negatives_for_singleton == 3);
}

TEST_CASE("pairnet: analytic gradients match central finite differences") {
  Rng rng(101);
  int n = 8, dim = 5;
  Matrix x(n, dim);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < dim; ++d) x(i, d) = rng.normal();
  }
  std::vector<PairExample> pairs = {{0, 1, true},  {2, 3, false}, {4, 5, true},
                                    {6, 7, false}, {1, 2, true}};

  PairNet net;
  net.hidden_w.push_back(Matrix(4, dim));
  net.hidden_b.push_back(Vector(4));
  net.final_w = Matrix(3, 4);
  net.final_b = Vector(3);
  for (int i = 0; i < 4; ++i) {
    net.hidden_b[0](i) = 0.1 * rng.normal();
    for (int j = 0; j < dim; ++j) net.hidden_w[0](i, j) = rng.normal() * 0.6;
  }
  for (int i = 0; i < 3; ++i) {
    net.final_b(i) = 0.1 * rng.normal();
    for (int j = 0; j < 4; ++j) net.final_w(i, j) = rng.normal() * 0.6;
  }
  net.logit_scale = 2.0;
  net.logit_offset = -0.3;

  PairNetGradients grads;
  pairnet_loss(net, x, pairs, &grads);

  double h = 1e-5;
  auto check_grad = [&](double analytic, double *param) {
    double saved = *param;
    *param = saved + h;
    double fp = pairnet_loss(net, x, pairs, nullptr);
    *param = saved - h;
    double fm = pairnet_loss(net, x, pairs, nullptr);
    *param = saved;
    double fd = (fp - fm) / (2 * h);
    if (std::abs(fd) > 1e-8) {
      CHECK(analytic == doctest::Approx(fd).epsilon(1e-4));
    } else {
      CHECK(std::abs(analytic - fd) < 1e-8);
    }
  };

  for (int i = 0; i < 4; ++i) {
    check_grad(grads.hidden_b[0](i), &net.hidden_b[0](i));
    for (int j = 0; j < dim; ++j) {
      check_grad(grads.hidden_w[0](i, j), &net.hidden_w[0](i, j));
    }
  }
  for (int i = 0; i < 3; ++i) {
    check_grad(grads.final_b(i), &net.final_b(i));
    for (int j = 0; j < 4; ++j) check_grad(grads.final_w(i, j), &net.final_w(i, j));
  }
  check_grad(grads.logit_scale, &net.logit_scale);
  check_grad(grads.logit_offset, &net.logit_offset);
}

TEST_CASE("pairnet: training separates cosines of positive and negative pairs") {
  Rng rng(102);
  Vector c0(8), c1(8), c2(8);
  c0.setZero();
  c1.setZero();
  c2.setZero();
  c0(0) = 3.0;
  c1(1) = 3.0;
  c2(2) = 3.0;
  auto train = oracles::gaussian_blobs({c0, c1, c2}, 40, 0.5, rng);
  auto held = oracles::gaussian_blobs({c0, c1, c2}, 30, 0.5, rng);

  PairNetOptions opts;
  opts.hidden_dims = {16};
  opts.embedding_dim = 8;
  opts.epochs_per_stage = 300;
  opts.learning_rate = 1.0;
  opts.rounds = 10;
  opts.seed = 11;
  PairNetTrainResult r = pairnet_train(train.x, train.labels, opts);

  Matrix e = r.net.embed_rows(held.x);
  Rng prng(7);
  auto pairs = generate_pairs(held.labels, 5, false, 99);
  double pos = 0.0, neg = 0.0;
  int pos_n = 0, neg_n = 0;
  for (const auto &p : pairs) {
    double c = e.row(p.a).dot(e.row(p.b)) / (e.row(p.a).norm() * e.row(p.b).norm());
    if (p.same) {
      pos += c;
      ++pos_n;
    } else {
      neg += c;
      ++neg_n;
    }
  }
  CHECK(pos / pos_n - neg / neg_n >= 0.3);
  (void)prng;
}

TEST_CASE("pairnet: left and right inputs go through the same buffers") {
  Rng rng(103);
  PairNet net;
  net.hidden_w.push_back(Matrix::Random(6, 4));
  net.hidden_b.push_back(Vector::Random(6));
  net.final_w = Matrix::Random(3, 6);
  net.final_b = Vector::Random(3);
  Vector v = Vector::Random(4);
  Vector left = net.embed(v);
  Vector right = net.embed(v);
  CHECK((left - right).cwiseAbs().maxCoeff() == 0.0);  // bit-identical
  (void)rng;
}

TEST_CASE("pairnet_score: scores live in [-1, 1] and orthogonal centroids score 0") {
  PairNet net;
  net.hidden_w.push_back(Matrix::Identity(4, 4));
  net.hidden_b.push_back(Vector::Zero(4));
  // no final layer: embedding is the sigmoid output
  Matrix centroids(2, 4);
  centroids.row(0) << 1, 0, 0, 0;
  centroids.row(1) << 0, 1, 0, 0;
  Vector test(4);
  test << 0.3, -0.7, 0.2, 0.9;
  Vector s = pairnet_score(net, centroids, test);
  for (int l = 0; l < 2; ++l) {
    CHECK(s(l) <= 1.0 + 1e-12);
    CHECK(s(l) >= -1.0 - 1e-12);
  }

  // score against an orthogonal centroid is exactly zero
  PairNet id_net;
  id_net.hidden_w.push_back(Matrix::Zero(2, 2));
  id_net.hidden_b.push_back(Vector::Zero(2));
  // sigmoid(0) = 0.5 per dim; centroid orthogonal to (0.5, 0.5)
  Matrix ortho(1, 2);
  ortho << 1.0, -1.0;
  Vector any(2);
  any << 0.4, -0.1;
  Vector s2 = pairnet_score(id_net, ortho, any);
  CHECK(std::abs(s2(0)) < 1e-12);
}

TEST_CASE("pairnet scoring on the margin suite ranks the right language first") {
  Rng rng(104);
  Vector c0(6), c1(6), c2(6);
  c0.setZero();
  c1.setZero();
  c2.setZero();
  c0(0) = 3.0;
  c1(1) = 3.0;
  c2(2) = 3.0;
  auto train = oracles::gaussian_blobs({c0, c1, c2}, 40, 0.4, rng);
  PairNetOptions opts;
  opts.hidden_dims = {16};
  opts.embedding_dim = 6;
  opts.epochs_per_stage = 300;
  opts.learning_rate = 1.0;
  opts.rounds = 10;
  opts.seed = 5;
  PairNetTrainResult r = pairnet_train(train.x, train.labels, opts);
  Matrix centroids = pairnet_centroids(r.net, train.x, train.labels, 3);

  auto held = oracles::gaussian_blobs({c0, c1, c2}, 20, 0.4, rng);
  int correct = 0;
  for (int i = 0; i < held.x.rows(); ++i) {
    Vector s = pairnet_score(r.net, centroids, Vector(held.x.row(i).transpose()));
    int argmax = 0;
    s.maxCoeff(&argmax);
    correct += argmax == held.labels[i] ? 1 : 0;
  }
  CHECK(static_cast<double>(correct) / held.x.rows() >= 0.9);
}

TEST_CASE("scoring functions are pure: repeated calls agree bitwise") {
  Rng rng(105);
  std::vector<Vector> centers = {Vector::Zero(3), Vector::Ones(3)};
  auto blobs = oracles::gaussian_blobs(centers, 50, 0.5, rng);
  GaussianBackend gb = gb_train(blobs.x, blobs.labels, kLangs2, 0.1);
  SvmSet svm = svm_train(blobs.x, blobs.labels, kLangs2, SvmTrainOptions{});
  Vector probe(3);
  probe << 0.2, -0.4, 0.9;
  Vector g1 = gb_score(gb, probe), g2 = gb_score(gb, probe);
  Vector s1 = svm_score(svm, probe), s2 = svm_score(svm, probe);
  CHECK((g1 - g2).cwiseAbs().maxCoeff() == 0.0);
  CHECK((s1 - s2).cwiseAbs().maxCoeff() == 0.0);
}
