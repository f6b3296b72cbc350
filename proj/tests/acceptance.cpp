// tests/acceptance.cpp

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

// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the process exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "lidkit/fusion.hpp"
#include "lidkit/gaussian_backend.hpp"
#include "lidkit/gmm.hpp"
#include "lidkit/manifest.hpp"
#include "lidkit/mclr.hpp"
#include "lidkit/metrics.hpp"
#include "lidkit/pairnet.hpp"
#include "lidkit/pipeline.hpp"
#include "lidkit/plda.hpp"
#include "lidkit/scores.hpp"
#include "lidkit/tv.hpp"
#include "lidkit/util.hpp"
#include "oracles.hpp"

using namespace lidkit;
namespace fs = std::filesystem;

namespace {

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string &what) {
  if (!ok) throw CheckFailure(what);
}

void require_close(double actual, double expected, double tol, const std::string &what) {
  if (!(std::abs(actual - expected) <= tol)) {
    std::ostringstream msg;
    msg << what << ": got " << actual << ", expected " << expected << " +- " << tol;
    throw CheckFailure(msg.str());
  }
}

fs::path fresh_dir(const std::string &tag) {
  fs::path dir = fs::temp_directory_path() / ("lidkit_accept_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_bytes(const fs::path &path) {
  std::ifstream f(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
}

void check_non_decreasing(const std::vector<double> &seq, double rel_tol,
                          const std::string &what) {
  for (std::size_t i = 1; i < seq.size(); ++i) {
    double allowed = rel_tol * std::abs(seq[i - 1]);
    if (seq[i] < seq[i - 1] - allowed) {
      std::ostringstream msg;
      msg << what << ": objective decreased at step " << i << " (" << seq[i - 1] << " -> "
          << seq[i] << ")";
      throw CheckFailure(msg.str());
    }
  }
}

GmmModel random_diag_ubm(int K, int F, Rng &rng) {
  GmmModel ubm;
  ubm.covariance_kind = CovKind::diagonal;
  ubm.weights = Vector::Constant(K, 1.0 / K);
  ubm.means = Matrix(K, F);
  ubm.diag_vars = Matrix(K, F);
  for (int k = 0; k < K; ++k) {
    for (int f = 0; f < F; ++f) {
      ubm.means(k, f) = rng.normal();
      ubm.diag_vars(k, f) = 0.5 + rng.uniform();
    }
  }
  return ubm;
}

BwStats random_stats(int K, int F, double scale, Rng &rng) {
  BwStats st;
  st.n = Vector(K);
  st.f = Matrix(K, F);
  double total = 0.0;
  for (int k = 0; k < K; ++k) {
    st.n(k) = scale * (0.2 + rng.uniform());
    total += st.n(k);
    for (int f = 0; f < F; ++f) st.f(k, f) = scale * rng.normal();
  }
  st.frames_total = static_cast<std::int64_t>(total) + 1;
  return st;
}

Matrix gmm_frames(int n, int F, Rng &rng) {
  // a handful of well-spread modes so multi-component EM has structure
  std::vector<Vector> centers;
  for (int c = 0; c < 5; ++c) {
    Vector v(F);
    for (int f = 0; f < F; ++f) v(f) = 3.0 * rng.normal();
    centers.push_back(v);
  }
  Matrix x(n, F);
  for (int i = 0; i < n; ++i) {
    const Vector &c = centers[i % centers.size()];
    for (int f = 0; f < F; ++f) x(i, f) = c(f) + rng.normal();
  }
  return x;
}

// ---------------------------------------------------------------------------

void criterion_1_sdc() {
  Rng rng(1001);
  SdcConfig cfg;  // 7-1-3-7
  for (int trial = 0; trial < 100; ++trial) {
    int T = 20 + rng.uniform_int(80);
    Matrix ceps(T, 7);
    for (int t = 0; t < T; ++t) {
      for (int d = 0; d < 7; ++d) ceps(t, d) = rng.normal();
    }
    FeatureMatrix sdc = build_sdc(FeatureMatrix{ceps}, cfg);
    Matrix expected = oracles::brute_force_sdc(ceps, 7, 1, 3, 7);
    require((sdc.data - expected).cwiseAbs().maxCoeff() <= 1e-12,
            "SDC brute-force mismatch at trial " + std::to_string(trial));
    require(cfg.N + sdc.dims() == 56, "concatenated dimension is not 56");
  }
}

void criterion_2_em_monotonicity() {
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(2000 + seed);

    Matrix frames = gmm_frames(2000, 5, rng);
    for (int K : {4, 16, 64}) {
      TrainTrace trace;
      train_diag_gmm(frames, K, 4, 1e-3, seed, &trace);
      for (const auto &phase : trace.phases) {
        check_non_decreasing(phase, 1e-8,
                             "diag EM seed " + std::to_string(seed) + " K " +
                                 std::to_string(K));
      }
    }

    GmmModel diag = train_diag_gmm(frames, 4, 4, 1e-3, seed);
    TrainTrace full_trace;
    refine_full_gmm(diag, frames, 5, &full_trace);
    check_non_decreasing(full_trace.phases[0], 1e-8,
                         "full EM seed " + std::to_string(seed));

    GmmModel ubm = random_diag_ubm(4, 3, rng);
    std::vector<BwStats> stats;
    for (int i = 0; i < 30; ++i) stats.push_back(random_stats(4, 3, 25.0, rng));
    TvTrainOptions topts;
    topts.iters = 6;
    topts.seed = seed;
    TvTrainResult tv = train_tv(stats, ubm, 3, topts);
    check_non_decreasing(tv.objective, 1e-8, "TV seed " + std::to_string(seed));

    int classes = 8, per = 10, dim = 6;
    Matrix x(classes * per, dim);
    std::vector<int> labels(classes * per);
    int row = 0;
    for (int c = 0; c < classes; ++c) {
      Vector center(dim);
      for (int d = 0; d < dim; ++d) center(d) = 2.0 * rng.normal();
      for (int i = 0; i < per; ++i) {
        for (int d = 0; d < dim; ++d) x(row, d) = center(d) + 0.7 * rng.normal();
        labels[row] = c;
        ++row;
      }
    }
    PldaTrainResult plda = plda_train(x, labels, 2, 10, seed);
    check_non_decreasing(plda.objective, 1e-8, "PLDA seed " + std::to_string(seed));
  }
}

void criterion_3_ivector_closed_form() {
  Rng rng(3001);
  int K = 2, F = 2, R = 2;
  for (int trial = 0; trial < 50; ++trial) {
    GmmModel ubm = random_diag_ubm(K, F, rng);
    TvModel tv;
    tv.rank = R;
    tv.ubm_hash = ubm.param_hash();
    tv.bias = Vector::Zero(K * F);
    tv.T = Matrix(K * F, R);
    for (int i = 0; i < K * F; ++i) {
      for (int j = 0; j < R; ++j) tv.T(i, j) = rng.normal();
    }
    BwStats st = random_stats(K, F, 5.0, rng);

    Matrix sigma = Matrix::Zero(K * F, K * F);
    Matrix big_n = Matrix::Zero(K * F, K * F);
    Vector f_centered(K * F);
    for (int k = 0; k < K; ++k) {
      for (int f = 0; f < F; ++f) {
        sigma(k * F + f, k * F + f) = ubm.diag_vars(k, f);
        big_n(k * F + f, k * F + f) = st.n(k);
        f_centered(k * F + f) = st.f(k, f) - st.n(k) * ubm.means(k, f);
      }
    }
    Matrix sigma_inv = sigma.inverse();
    Matrix precision = Matrix::Identity(R, R) + tv.T.transpose() * sigma_inv * big_n * tv.T;
    Vector expected = precision.inverse() * tv.T.transpose() * sigma_inv * f_centered;
    Vector w = extract_ivector(tv, ubm, st);
    require((w - expected).cwiseAbs().maxCoeff() <= 1e-10,
            "i-vector oracle mismatch at trial " + std::to_string(trial));
  }
}

void criterion_4_normalization() {
  Rng rng(4001);
  int n = 300, r = 8;
  Matrix x(n, r);
  for (int i = 0; i < n; ++i) {
    double base = rng.normal();
    for (int j = 0; j < r; ++j) x(i, j) = base + 0.7 * rng.normal() + 0.2 * j;
  }
  Normalizer whiten = fit_normalizer(x, NormKind::whiten);
  Matrix y = apply_normalizer_rows(whiten, x);
  Vector mean = y.colwise().mean();
  Matrix centered = y.rowwise() - mean.transpose();
  Matrix cov = centered.transpose() * centered / n;
  require((cov - Matrix::Identity(r, r)).cwiseAbs().maxCoeff() <= 1e-8,
          "post-whitening covariance deviates from identity");

  Normalizer efr = fit_normalizer(x, NormKind::efr, 1);
  Matrix z = apply_normalizer_rows(efr, x);
  for (int i = 0; i < n; ++i) {
    require_close(z.row(i).norm(), 1.0, 1e-12, "length-normalized vector norm");
  }

  // minimum divergence: reparameterization leaves the likelihood unchanged
  GmmModel ubm = random_diag_ubm(3, 2, rng);
  std::vector<BwStats> stats;
  for (int i = 0; i < 20; ++i) stats.push_back(random_stats(3, 2, 30.0, rng));
  TvModel tv;
  tv.rank = 2;
  tv.ubm_hash = ubm.param_hash();
  tv.bias = Vector::Zero(6);
  tv.T = Matrix(6, 2);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 2; ++j) tv.T(i, j) = 0.4 * rng.normal();
  }
  TvExtractor ex(tv, ubm);
  Vector sum_w = Vector::Zero(2);
  Matrix sum_ww = Matrix::Zero(2, 2);
  for (const auto &st : stats) {
    Matrix cov_w;
    Vector w = ex.extract(st, &cov_w);
    sum_w += w;
    sum_ww += cov_w + w * w.transpose();
  }
  Vector mu = sum_w / stats.size();
  Matrix second = sum_ww / stats.size();
  Matrix cov_prior = second - mu * mu.transpose();
  double before = tv_marginal_loglik(tv, ubm, stats, &mu, &cov_prior);
  Eigen::LLT<Matrix> llt(cov_prior);
  require(llt.info() == Eigen::Success, "posterior covariance not SPD");
  TvModel tv2 = tv;
  tv2.bias = tv.bias + tv.T * mu;
  tv2.T = tv.T * Matrix(llt.matrixL());
  double after = tv_marginal_loglik(tv2, ubm, stats);
  require(std::abs(after - before) <= 1e-8 * std::abs(before),
          "minimum-divergence step changed the TV likelihood");
}

void criterion_5_gradients() {
  Rng rng(5001);
  double h = 1e-6;

  // MCLR (single system) and fusion (two systems) share the CE objective.
  for (int systems : {1, 2}) {
    int n = 40, L = 3;
    std::vector<Matrix> sys;
    for (int s = 0; s < systems; ++s) {
      Matrix m(n, L);
      for (int i = 0; i < n; ++i) {
        for (int l = 0; l < L; ++l) m(i, l) = rng.normal();
      }
      sys.push_back(m);
    }
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = i % L;
    Vector w(systems), beta(L);
    for (int s = 0; s < systems; ++s) w(s) = 0.5 + rng.uniform();
    for (int l = 0; l < L; ++l) beta(l) = 0.3 * rng.normal();

    Vector gw, gb_;
    flat_prior_ce(sys, labels, w, beta, 0.0, &gw, &gb_);
    for (int s = 0; s < systems; ++s) {
      Vector wp = w, wm = w;
      wp(s) += h;
      wm(s) -= h;
      double fd = (flat_prior_ce(sys, labels, wp, beta, 0.0, nullptr, nullptr) -
                   flat_prior_ce(sys, labels, wm, beta, 0.0, nullptr, nullptr)) /
                  (2 * h);
      require(std::abs(gw(s) - fd) <= 1e-5 * std::max(1.0, std::abs(fd)),
              "CE weight gradient mismatch");
    }
    for (int l = 0; l < L; ++l) {
      Vector bp = beta, bm = beta;
      bp(l) += h;
      bm(l) -= h;
      double fd = (flat_prior_ce(sys, labels, w, bp, 0.0, nullptr, nullptr) -
                   flat_prior_ce(sys, labels, w, bm, 0.0, nullptr, nullptr)) /
                  (2 * h);
      require(std::abs(gb_(l) - fd) <= 1e-5 * std::max(1.0, std::abs(fd)),
              "CE offset gradient mismatch");
    }
  }

  // pairnet on a 5-pair micro-batch
  int n = 8, dim = 5;
  Matrix x(n, dim);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < dim; ++d) x(i, d) = rng.normal();
  }
  std::vector<PairExample> pairs = {{0, 1, true},  {2, 3, false}, {4, 5, true},
                                    {6, 7, false}, {1, 4, true}};
  PairNet net;
  net.hidden_w.push_back(Matrix(4, dim));
  net.hidden_b.push_back(Vector(4));
  net.final_w = Matrix(3, 4);
  net.final_b = Vector(3);
  for (int i = 0; i < 4; ++i) {
    net.hidden_b[0](i) = 0.1 * rng.normal();
    for (int j = 0; j < dim; ++j) net.hidden_w[0](i, j) = 0.6 * rng.normal();
  }
  for (int i = 0; i < 3; ++i) {
    net.final_b(i) = 0.1 * rng.normal();
    for (int j = 0; j < 4; ++j) net.final_w(i, j) = 0.6 * rng.normal();
  }
  net.logit_scale = 2.0;
  net.logit_offset = 0.1;

  PairNetGradients grads;
  pairnet_loss(net, x, pairs, &grads);
  double hp = 1e-5;
  auto check_param = [&](double analytic, double *param, const char *what) {
    double saved = *param;
    *param = saved + hp;
    double fp = pairnet_loss(net, x, pairs, nullptr);
    *param = saved - hp;
    double fm = pairnet_loss(net, x, pairs, nullptr);
    *param = saved;
    double fd = (fp - fm) / (2 * hp);
    require(std::abs(analytic - fd) <= 1e-4 * std::max(1.0, std::abs(fd)),
            std::string("pairnet gradient mismatch: ") + what);
  };
  for (int i = 0; i < 4; ++i) {
    check_param(grads.hidden_b[0](i), &net.hidden_b[0](i), "hidden bias");
    for (int j = 0; j < dim; ++j) {
      check_param(grads.hidden_w[0](i, j), &net.hidden_w[0](i, j), "hidden weight");
    }
  }
  for (int i = 0; i < 3; ++i) {
    check_param(grads.final_b(i), &net.final_b(i), "final bias");
    for (int j = 0; j < 4; ++j) {
      check_param(grads.final_w(i, j), &net.final_w(i, j), "final weight");
    }
  }
  check_param(grads.logit_scale, &net.logit_scale, "logit scale");
  check_param(grads.logit_offset, &net.logit_offset, "logit offset");
}

void criterion_6_backend_oracles() {
  Rng rng(6001);

  // Gaussian back-end vs dense log-pdf
  {
    int r = 5;
    std::vector<Vector> centers;
    for (int l = 0; l < 3; ++l) {
      Vector c(r);
      for (int j = 0; j < r; ++j) c(j) = 2.0 * rng.normal();
      centers.push_back(c);
    }
    auto blobs = oracles::gaussian_blobs(centers, 60, 0.8, rng);
    GaussianBackend gb = gb_train(blobs.x, blobs.labels, {"a", "b", "c"}, 0.1);
    for (int trial = 0; trial < 25; ++trial) {
      Vector w(r);
      for (int j = 0; j < r; ++j) w(j) = 2.0 * rng.normal();
      Vector s = gb_score(gb, w);
      for (int l = 0; l < 3; ++l) {
        double expected = oracles::dense_gaussian_logpdf(
            w, Vector(gb.means.row(l).transpose()), gb.sigma_smoothed[l]);
        require(std::abs(s(l) - expected) <= 1e-10 * std::max(1.0, std::abs(expected)),
                "gb_score oracle mismatch");
      }
    }
  }

  // PLDA vs dense joint-Gaussian marginal
  {
    int dim = 4;
    PldaModel m;
    m.mu = Vector(dim);
    for (int d = 0; d < dim; ++d) m.mu(d) = 0.3 * rng.normal();
    m.subspace = Matrix(dim, 2);
    for (int d = 0; d < dim; ++d) {
      for (int j = 0; j < 2; ++j) m.subspace(d, j) = rng.normal();
    }
    Matrix a(dim, dim);
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) a(i, j) = 0.4 * rng.normal();
    }
    m.sigma_w = a * a.transpose() + Matrix::Identity(dim, dim) * 0.5;

    Matrix between = m.subspace * m.subspace.transpose();
    Matrix total = between + m.sigma_w;
    for (int trial = 0; trial < 25; ++trial) {
      Vector enroll(dim), test(dim);
      for (int d = 0; d < dim; ++d) {
        enroll(d) = rng.normal();
        test(d) = rng.normal();
      }
      Matrix joint(2 * dim, 2 * dim);
      joint.topLeftCorner(dim, dim) = total;
      joint.bottomRightCorner(dim, dim) = total;
      joint.topRightCorner(dim, dim) = between;
      joint.bottomLeftCorner(dim, dim) = between;
      Vector stacked(2 * dim);
      stacked << enroll - m.mu, test - m.mu;
      double expected =
          oracles::dense_gaussian_logpdf(stacked, Vector::Zero(2 * dim), joint) -
          oracles::dense_gaussian_logpdf(enroll - m.mu, Vector::Zero(dim), total) -
          oracles::dense_gaussian_logpdf(test - m.mu, Vector::Zero(dim), total);
      Matrix e(1, dim);
      e.row(0) = enroll.transpose();
      Vector s = plda_score(m, {e}, test);
      require(std::abs(s(0) - expected) <= 1e-8 * std::max(1.0, std::abs(expected)),
              "plda_score oracle mismatch");
    }
  }

  // per-cluster LLR vs extended-precision log-sum-exp
  {
    std::vector<std::string> langs = {"a", "b", "c", "d"};
    std::map<std::string, std::string> clusters;
    for (const auto &l : langs) clusters[l] = "all";
    for (int trial = 0; trial < 25; ++trial) {
      ScoreMatrix sm;
      sm.language_order = langs;
      sm.utt_ids = {"u0"};
      sm.kind = ScoreKind::raw;
      sm.scores = Matrix(1, 4);
      for (int l = 0; l < 4; ++l) sm.scores(0, l) = 4.0 * rng.normal();
      ScoreMatrix llr = to_llr_per_cluster(sm, clusters);
      for (int l = 0; l < 4; ++l) {
        std::vector<double> others;
        for (int k = 0; k < 4; ++k) {
          if (k != l) others.push_back(sm.scores(0, k));
        }
        double expected =
            sm.scores(0, l) - (oracles::logsumexp_ld(others) - std::log(3.0));
        require(std::abs(llr.scores(0, l) - expected) <= 1e-12 *
                    std::max(1.0, std::abs(expected)),
                "to_llr_per_cluster oracle mismatch");
      }
    }
  }
}

ExperimentConfig desk_config(const std::string &out_dir) {
  ExperimentConfig cfg;
  cfg.synth_enabled = true;
  cfg.synth.n_languages = 5;
  cfg.synth.languages_per_cluster = 3;  // clusters of 3 and 2
  cfg.synth.utterances_per_language = {
      {Split::train, 60}, {Split::dev, 20}, {Split::eval, 20}};
  cfg.synth.duration_min_s = 3.0;
  cfg.synth.duration_max_s = 10.0;
  cfg.synth.seed = 7;
  cfg.synth.sample_rate_hz = 8000;
  cfg.ubm_size = 64;
  cfg.ubm_iters = 6;
  cfg.ubm_max_frames = 120000;
  cfg.tv_rank = 50;
  cfg.tv_iters = 8;
  cfg.norm_kind = NormKind::whiten;
  cfg.norm_length = true;
  cfg.backends.enabled = {"gb_mclr", "plda", "svm", "pairnet"};
  cfg.backends.plda_rank = 4;
  cfg.backends.plda_iters = 10;
  cfg.backends.svm_epochs = 200;
  cfg.backends.pairnet_hidden = {256};
  cfg.backends.pairnet_embedding = 64;
  cfg.backends.pairnet_epochs = 150;
  cfg.backends.pairnet_rounds = 35;
  cfg.fusion_folds = 2;
  cfg.seed = 7;
  cfg.output_dir = out_dir;
  return cfg;
}

void criterion_7_end_to_end() {
  fs::path dir = fresh_dir("e2e");
  ExperimentConfig cfg = desk_config(dir.string());
  RunOptions opts;
  opts.verbose = false;
  RunResult result = run_experiment(cfg, opts);

  double best_cavg = 1.0;
  std::ostringstream detail;
  for (const auto &b : result.backends) {
    detail << " " << b.name << "(acc=" << b.accuracy << ",cavg=" << b.cavg << ")";
    require(b.accuracy >= 0.90,
            "backend " + b.name + " accuracy " + std::to_string(b.accuracy) + " < 0.90");
    best_cavg = std::min(best_cavg, b.cavg);
  }
  std::printf("       e2e detail:%s fused_cavg=%g\n", detail.str().c_str(),
              result.fused.cavg_overall);
  require(result.fused.cavg_overall <= best_cavg + 0.01,
          "fused Cavg " + std::to_string(result.fused.cavg_overall) +
              " exceeds best single backend " + std::to_string(best_cavg) + " + 0.01");
  require(result.fused.cavg_overall <= 0.05,
          "fused Cavg " + std::to_string(result.fused.cavg_overall) + " > 0.05");
}

void criterion_8_determinism() {
#ifndef LIDKIT_CLI_PATH
  throw CheckFailure("CLI binary path not configured");
#else
  fs::path dir_a = fresh_dir("det_a");
  fs::path dir_b = fresh_dir("det_b");
  fs::path cfg_dir = fresh_dir("det_cfg");

  auto write_config = [&](const fs::path &out_dir) {
    std::ostringstream ini;
    ini << "[corpus]\n"
        << "n_languages = 3\n"
        << "languages_per_cluster = 2\n"
        << "train_per_language = 8\n"
        << "dev_per_language = 4\n"
        << "eval_per_language = 4\n"
        << "duration_min_s = 1.5\n"
        << "duration_max_s = 3.0\n"
        << "[frontend]\n"
        << "warp_window = 101\n"
        << "[ubm]\n"
        << "K = 8\n"
        << "iters = 4\n"
        << "[tv]\n"
        << "R = 5\n"
        << "iters = 4\n"
        << "[backends]\n"
        << "enabled = gb_mclr, plda, svm, pairnet\n"
        << "plda_rank = 2\n"
        << "plda_iters = 5\n"
        << "svm_epochs = 80\n"
        << "pairnet_hidden = 8\n"
        << "pairnet_embedding = 4\n"
        << "pairnet_epochs = 60\n"
        << "pairnet_rounds = 5\n"
        << "[run]\n"
        << "seed = 7\n"
        << "jobs = 2\n"
        << "output_dir = " << out_dir.string() << "\n";
    fs::path cfg_path = cfg_dir / (out_dir.filename().string() + ".ini");
    std::ofstream f(cfg_path);
    f << ini.str();
    return cfg_path;
  };

  for (const fs::path &dir : {dir_a, dir_b}) {
    fs::path cfg_path = write_config(dir);
    std::string cmd = std::string(LIDKIT_CLI_PATH) + " run --config " +
                      cfg_path.string() + " > " + (dir / "stdout.txt").string() +
                      " 2> " + (dir / "stderr.txt").string();
    int rc = std::system(cmd.c_str());
    require(rc == 0, "lidkit run exited with " + std::to_string(rc));
  }

  std::string scores_a = read_bytes(dir_a / "scores_eval_fused_llr.tsv");
  std::string scores_b = read_bytes(dir_b / "scores_eval_fused_llr.tsv");
  require(!scores_a.empty(), "first run produced no scores");
  require(scores_a == scores_b, "score TSVs differ between identical runs");

  std::string report_a = read_bytes(dir_a / "report.txt");
  std::string report_b = read_bytes(dir_b / "report.txt");
  require(!report_a.empty(), "first run produced no report");
  require(report_a == report_b, "reports differ between identical runs");
#endif
}

void criterion_9_metric_sanity() {
  std::vector<std::string> langs = {"a", "b", "c", "d", "e"};
  std::map<std::string, std::string> clusters = {
      {"a", "x"}, {"b", "x"}, {"c", "x"}, {"d", "y"}, {"e", "y"}};
  int n = 100;
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = i % 5;

  Matrix oracle(n, 5);
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < 5; ++l) oracle(i, l) = l == labels[i] ? 30.0 : -30.0;
  }
  ScoreMatrix perfect;
  perfect.language_order = langs;
  perfect.kind = ScoreKind::llr;
  perfect.scores = oracle;
  perfect.utt_ids.resize(n);
  for (int i = 0; i < n; ++i) perfect.utt_ids[i] = "u" + std::to_string(i);

  require_close(compute_cavg(perfect, labels, clusters).overall, 0.0, 1e-15,
                "cavg of oracle LLRs");
  require(compute_cllr(perfect, labels, clusters) < 0.01, "cllr of oracle LLRs >= 0.01");

  ScoreMatrix inverted = perfect;
  inverted.scores = -oracle;
  require_close(compute_cavg(inverted, labels, clusters).overall, 1.0, 1e-15,
                "cavg of inverted LLRs");

  ScoreMatrix zeros = perfect;
  zeros.scores = Matrix::Zero(n, 5);
  // clusters have 3 and 2 languages: mean of log2(3) and log2(2)
  double expected = 0.5 * (std::log2(3.0) + 1.0);
  require_close(compute_cllr(zeros, labels, clusters), expected, 1e-12,
                "cllr of all-zero LLRs");
}

struct Criterion {
  int id;
  std::string name;
  std::function<void()> body;
};

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {1, "SDC construction matches the brute-force oracle (dim 56)", criterion_1_sdc},
      {2, "EM monotonicity for diag/full GMM, TV and PLDA over 20 seeds",
       criterion_2_em_monotonicity},
      {3, "i-vector closed form matches the dense oracle", criterion_3_ivector_closed_form},
      {4, "whitening, length normalization and minimum divergence", criterion_4_normalization},
      {5, "MCLR, fusion and pairnet gradients match finite differences",
       criterion_5_gradients},
      {6, "back-end scores match dense and log-sum-exp oracles", criterion_6_backend_oracles},
      {7, "end-to-end synthetic regression at desk scale", criterion_7_end_to_end},
      {8, "byte-identical score TSVs and reports across identical runs",
       criterion_8_determinism},
      {9, "metric sanity at the oracle, inverted and zero-information points",
       criterion_9_metric_sanity},
  };

  int failures = 0;
  for (const auto &criterion : criteria) {
    auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
      criterion.body();
    } catch (const std::exception &e) {
      error = e.what();
    }
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (error.empty()) {
      std::printf("[PASS] criterion %d: %s (%.1fs)\n", criterion.id,
                  criterion.name.c_str(), elapsed);
    } else {
      ++failures;
      std::printf("[FAIL] criterion %d: %s (%.1fs)\n       %s\n", criterion.id,
                  criterion.name.c_str(), elapsed, error.c_str());
    }
    std::fflush(stdout);
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all 9 criteria passed\n");
  return 0;
}
