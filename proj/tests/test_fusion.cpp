// tests/test_fusion.cpp

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

#include "lidkit/fusion.hpp"
#include "lidkit/mclr.hpp"
#include "lidkit/metrics.hpp"
#include "lidkit/util.hpp"
#include "oracles.hpp"

using namespace lidkit;

namespace {

const std::vector<std::string> kLangs4 = {"deu", "eng", "fra", "spa"};
const std::map<std::string, std::string> kClusters4 = {
    {"deu", "germanic"}, {"eng", "germanic"}, {"fra", "romance"}, {"spa", "romance"}};

ScoreMatrix make_scores(const Matrix &scores, const std::vector<std::string> &langs,
                        ScoreKind kind = ScoreKind::raw) {
  ScoreMatrix sm;
  sm.language_order = langs;
  sm.scores = scores;
  sm.kind = kind;
  sm.utt_ids.resize(scores.rows());
  for (int i = 0; i < scores.rows(); ++i) sm.utt_ids[i] = "utt" + std::to_string(i);
  return sm;
}

// Scores informative about the label with additive noise.
ScoreMatrix noisy_scores(const std::vector<int> &labels, double strength, double noise,
                         const std::vector<std::string> &langs, Rng &rng) {
  int n = static_cast<int>(labels.size());
  int L = static_cast<int>(langs.size());
  Matrix s(n, L);
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < L; ++l) {
      s(i, l) = (l == labels[i] ? strength : 0.0) + noise * rng.normal();
    }
  }
  return make_scores(s, langs);
}

std::vector<int> cyclic_labels(int n, int L) {
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = i % L;
  return labels;
}

}  // namespace

TEST_CASE("fusion_train: single subsystem reduces to MCLR calibration") {
  Rng rng(111);
  auto labels = cyclic_labels(240, 4);
  ScoreMatrix sm = noisy_scores(labels, 2.0, 0.8, kLangs4, rng);

  FusionTrainResult fused = fusion_train({sm}, labels, 2);
  MclrModel mclr = mclr_train(sm, labels);

  Vector w(1);
  w(0) = mclr.alpha;
  double ce_mclr = flat_prior_ce({sm.scores}, labels, w, mclr.beta, 0.0, nullptr, nullptr);
  CHECK(fused.final_ce == doctest::Approx(ce_mclr).epsilon(1e-8));
  CHECK(fused.model.weights(0) == doctest::Approx(mclr.alpha).epsilon(1e-6));
}

TEST_CASE("fusion_train: duplicating a subsystem does not change the objective") {
  Rng rng(112);
  auto labels = cyclic_labels(200, 4);
  ScoreMatrix sm = noisy_scores(labels, 1.5, 1.0, kLangs4, rng);

  FusionTrainResult single = fusion_train({sm}, labels, 2);
  FusionTrainResult doubled = fusion_train({sm, sm}, labels, 2);
  CHECK(doubled.final_ce == doctest::Approx(single.final_ce).epsilon(1e-6));
  for (std::size_t f = 0; f < single.fold_heldout_ce.size(); ++f) {
    CHECK(doubled.fold_heldout_ce[f] ==
          doctest::Approx(single.fold_heldout_ce[f]).epsilon(1e-6));
  }
}

TEST_CASE("fusion_train: complementary subsystems beat both individuals") {
  Rng rng(113);
  auto labels = cyclic_labels(400, 4);
  int n = static_cast<int>(labels.size());
  // subsystem A separates the germanic pair only, B the romance pair only
  Matrix sa = Matrix::Zero(n, 4), sb = Matrix::Zero(n, 4);
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < 4; ++l) {
      bool germanic = l < 2;
      if (germanic) {
        sa(i, l) = (l == labels[i] ? 3.0 : 0.0) + 0.5 * rng.normal();
        sb(i, l) = 0.5 * rng.normal();
      } else {
        sa(i, l) = 0.5 * rng.normal();
        sb(i, l) = (l == labels[i] ? 3.0 : 0.0) + 0.5 * rng.normal();
      }
    }
  }
  ScoreMatrix sma = make_scores(sa, kLangs4);
  ScoreMatrix smb = make_scores(sb, kLangs4);

  auto heldout_mean = [](const FusionTrainResult &r) {
    double total = 0.0;
    for (double v : r.fold_heldout_ce) total += v;
    return total / r.fold_heldout_ce.size();
  };
  double ce_a = heldout_mean(fusion_train({sma}, labels, 2));
  double ce_b = heldout_mean(fusion_train({smb}, labels, 2));
  double ce_ab = heldout_mean(fusion_train({sma, smb}, labels, 2));
  CHECK(ce_ab <= std::min(ce_a, ce_b) - 0.01);
}

TEST_CASE("fusion_train: fused held-out CE never exceeds any single calibrated subsystem") {
  Rng rng(114);
  auto labels = cyclic_labels(300, 4);
  ScoreMatrix sa = noisy_scores(labels, 2.0, 1.0, kLangs4, rng);
  ScoreMatrix sb = noisy_scores(labels, 1.0, 1.0, kLangs4, rng);
  ScoreMatrix sc = noisy_scores(labels, 0.5, 1.5, kLangs4, rng);

  auto heldout_mean = [](const FusionTrainResult &r) {
    double total = 0.0;
    for (double v : r.fold_heldout_ce) total += v;
    return total / r.fold_heldout_ce.size();
  };
  double fused = heldout_mean(fusion_train({sa, sb, sc}, labels, 2));
  for (const auto &sm : {sa, sb, sc}) {
    double single = heldout_mean(fusion_train({sm}, labels, 2));
    CHECK(fused <= single + 1e-6);
  }
}

TEST_CASE("fusion_train: misaligned utterance lists are an alignment error") {
  Rng rng(115);
  auto labels = cyclic_labels(50, 4);
  ScoreMatrix sa = noisy_scores(labels, 1.0, 0.5, kLangs4, rng);
  ScoreMatrix sb = sa;
  sb.utt_ids[3] = "other";
  CHECK_THROWS_AS(fusion_train({sa, sb}, labels, 2), DataError);
}

TEST_CASE("fusion objective is convex along midpoints") {
  Rng rng(116);
  auto labels = cyclic_labels(120, 4);
  ScoreMatrix sa = noisy_scores(labels, 1.0, 1.0, kLangs4, rng);
  ScoreMatrix sb = noisy_scores(labels, 0.7, 1.0, kLangs4, rng);
  std::vector<Matrix> sys = {sa.scores, sb.scores};
  for (int trial = 0; trial < 15; ++trial) {
    Vector wa(2), wb(2), ba(4), bb(4);
    for (int s = 0; s < 2; ++s) {
      wa(s) = rng.uniform(-2, 2);
      wb(s) = rng.uniform(-2, 2);
    }
    for (int l = 0; l < 4; ++l) {
      ba(l) = rng.normal();
      bb(l) = rng.normal();
    }
    double fa = flat_prior_ce(sys, labels, wa, ba, 0.0, nullptr, nullptr);
    double fb = flat_prior_ce(sys, labels, wb, bb, 0.0, nullptr, nullptr);
    double fm = flat_prior_ce(sys, labels, Vector(0.5 * (wa + wb)), Vector(0.5 * (ba + bb)),
                              0.0, nullptr, nullptr);
    CHECK(fm <= 0.5 * (fa + fb) + 1e-9);
  }
}

TEST_CASE("fusion_apply: identity and degenerate weights behave as written") {
  Rng rng(117);
  auto labels = cyclic_labels(30, 4);
  ScoreMatrix sm = noisy_scores(labels, 1.0, 0.5, kLangs4, rng);

  FusionModel identity;
  identity.weights = Vector::Ones(1);
  identity.beta = Vector::Zero(4);
  ScoreMatrix out = fusion_apply(identity, {sm});
  CHECK((out.scores - sm.scores).cwiseAbs().maxCoeff() == 0.0);

  FusionModel zero;
  zero.weights = Vector::Zero(1);
  zero.beta = Vector::Ones(4) * 0.75;
  ScoreMatrix constant = fusion_apply(zero, {sm});
  CHECK((constant.scores.array() - 0.75).abs().maxCoeff() == 0.0);
}

TEST_CASE("fusion_apply: random case matches the direct formula") {
  Rng rng(118);
  auto labels = cyclic_labels(25, 4);
  ScoreMatrix sa = noisy_scores(labels, 1.0, 1.0, kLangs4, rng);
  ScoreMatrix sb = noisy_scores(labels, 0.4, 1.0, kLangs4, rng);
  FusionModel model;
  model.weights = Vector(2);
  model.weights << 0.8, 1.7;
  model.beta = Vector(4);
  model.beta << 0.1, -0.2, 0.3, -0.4;
  ScoreMatrix out = fusion_apply(model, {sa, sb});
  for (int i = 0; i < 25; ++i) {
    for (int l = 0; l < 4; ++l) {
      double expected = 0.8 * sa.scores(i, l) + 1.7 * sb.scores(i, l) + model.beta(l);
      CHECK(out.scores(i, l) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("to_llr_per_cluster: a 2-language cluster gives the pairwise difference") {
  Matrix s(1, 4);
  s << 1.0, 2.5, -0.5, 0.75;
  ScoreMatrix sm = make_scores(s, kLangs4);
  ScoreMatrix llr = to_llr_per_cluster(sm, kClusters4);
  CHECK(llr.kind == ScoreKind::llr);
  CHECK(llr.scores(0, 0) == doctest::Approx(s(0, 0) - s(0, 1)).epsilon(1e-12));
  CHECK(llr.scores(0, 1) == doctest::Approx(s(0, 1) - s(0, 0)).epsilon(1e-12));
  CHECK(llr.scores(0, 2) == doctest::Approx(s(0, 2) - s(0, 3)).epsilon(1e-12));
}

TEST_CASE("to_llr_per_cluster: uniform scores in a cluster give zero LLRs") {
  Matrix s(1, 4);
  s << 0.7, 0.7, -4.0, -4.0;
  ScoreMatrix llr = to_llr_per_cluster(make_scores(s, kLangs4), kClusters4);
  for (int l = 0; l < 4; ++l) CHECK(std::abs(llr.scores(0, l)) < 1e-12);
}

TEST_CASE("to_llr_per_cluster: matches the extended-precision oracle on a 4-way cluster") {
  Rng rng(119);
  std::map<std::string, std::string> one_cluster;
  for (const auto &lang : kLangs4) one_cluster[lang] = "all";
  for (int trial = 0; trial < 20; ++trial) {
    Matrix s(1, 4);
    for (int l = 0; l < 4; ++l) s(0, l) = 3.0 * rng.normal();
    ScoreMatrix llr = to_llr_per_cluster(make_scores(s, kLangs4), one_cluster);
    for (int l = 0; l < 4; ++l) {
      std::vector<double> others;
      for (int k = 0; k < 4; ++k) {
        if (k != l) others.push_back(s(0, k));
      }
      double expected = s(0, l) - (oracles::logsumexp_ld(others) - std::log(3.0));
      CHECK(llr.scores(0, l) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("to_llr_per_cluster: singleton cluster passes through, unknown language throws") {
  Matrix s(1, 3);
  s << 0.5, 1.0, 2.0;
  std::vector<std::string> langs = {"eng", "fra", "zho"};
  std::map<std::string, std::string> clusters = {
      {"eng", "germanic"}, {"fra", "romance"}, {"zho", "chinese"}};
  // fra and eng are singleton clusters here as well
  ScoreMatrix llr = to_llr_per_cluster(make_scores(s, langs), clusters);
  CHECK(llr.scores(0, 2) == doctest::Approx(2.0));

  std::map<std::string, std::string> missing = {{"eng", "g"}, {"fra", "r"}};
  CHECK_THROWS_AS(to_llr_per_cluster(make_scores(s, langs), missing), DataError);
}

TEST_CASE("to_llr then cavg is invariant to a per-cluster constant shift") {
  Rng rng(120);
  auto labels = cyclic_labels(200, 4);
  ScoreMatrix sm = noisy_scores(labels, 2.0, 1.0, kLangs4, rng);
  ScoreMatrix shifted = sm;
  shifted.scores.leftCols(2).array() += 5.0;   // germanic cluster columns
  shifted.scores.rightCols(2).array() -= 3.0;  // romance cluster columns

  ScoreMatrix llr_a = to_llr_per_cluster(sm, kClusters4);
  ScoreMatrix llr_b = to_llr_per_cluster(shifted, kClusters4);
  CavgResult a = compute_cavg(llr_a, labels, kClusters4);
  CavgResult b = compute_cavg(llr_b, labels, kClusters4);
  CHECK(a.overall == doctest::Approx(b.overall).epsilon(1e-12));
}

TEST_CASE("compute_cavg: perfect and inverted LLRs hit the extremes") {
  auto labels = cyclic_labels(80, 4);
  int n = static_cast<int>(labels.size());
  Matrix s(n, 4);
  for (int i = 0; i < n; ++i) {
    for (int l = 0; l < 4; ++l) s(i, l) = l == labels[i] ? 10.0 : -10.0;
  }
  ScoreMatrix perfect = make_scores(s, kLangs4, ScoreKind::llr);
  CHECK(compute_cavg(perfect, labels, kClusters4).overall == doctest::Approx(0.0));

  ScoreMatrix inverted = make_scores(Matrix(-s), kLangs4, ScoreKind::llr);
  CHECK(compute_cavg(inverted, labels, kClusters4).overall == doctest::Approx(1.0));
}

TEST_CASE("compute_cavg: random LLRs on balanced binary data sit near one half") {
  Rng rng(121);
  std::vector<std::string> langs = {"a", "b"};
  std::map<std::string, std::string> clusters = {{"a", "c"}, {"b", "c"}};
  auto labels = cyclic_labels(1000, 2);
  Matrix s(1000, 2);
  for (int i = 0; i < 1000; ++i) {
    for (int l = 0; l < 2; ++l) s(i, l) = rng.normal();
  }
  ScoreMatrix llr = make_scores(s, langs, ScoreKind::llr);
  double cavg = compute_cavg(llr, labels, clusters).overall;
  CHECK(cavg > 0.45);
  CHECK(cavg < 0.55);
}

TEST_CASE("compute_cavg: raising target LLRs never hurts") {
  Rng rng(122);
  auto labels = cyclic_labels(120, 4);
  Matrix s(120, 4);
  for (int i = 0; i < 120; ++i) {
    for (int l = 0; l < 4; ++l) s(i, l) = rng.normal();
  }
  ScoreMatrix llr = make_scores(s, kLangs4, ScoreKind::llr);
  double before = compute_cavg(llr, labels, kClusters4).overall;
  Matrix raised = s;
  for (int i = 0; i < 120; ++i) raised(i, labels[i]) += 2.0;
  double after =
      compute_cavg(make_scores(raised, kLangs4, ScoreKind::llr), labels, kClusters4).overall;
  CHECK(after <= before + 1e-12);
}

TEST_CASE("compute_cllr: oracle LLRs approach zero cost") {
  auto labels = cyclic_labels(40, 4);
  Matrix s(40, 4);
  for (int i = 0; i < 40; ++i) {
    for (int l = 0; l < 4; ++l) s(i, l) = l == labels[i] ? 40.0 : -40.0;
  }
  double cllr = compute_cllr(make_scores(s, kLangs4, ScoreKind::llr), labels, kClusters4);
  CHECK(cllr < 0.01);
}

TEST_CASE("compute_cllr: all-zero LLRs cost exactly log2(cluster size)") {
  auto labels = cyclic_labels(40, 4);
  Matrix s = Matrix::Zero(40, 4);
  double cllr = compute_cllr(make_scores(s, kLangs4, ScoreKind::llr), labels, kClusters4);
  CHECK(cllr == doctest::Approx(1.0).epsilon(1e-12));  // log2(2) per 2-language cluster

  // a 4-language single cluster costs log2(4) = 2 bits
  std::map<std::string, std::string> one_cluster;
  for (const auto &lang : kLangs4) one_cluster[lang] = "all";
  double cllr4 = compute_cllr(make_scores(s, kLangs4, ScoreKind::llr), labels, one_cluster);
  CHECK(cllr4 == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("compute_cllr: better separation gives strictly lower cost") {
  Rng rng(123);
  auto labels = cyclic_labels(200, 4);
  int n = static_cast<int>(labels.size());
  auto build = [&](double strength) {
    Matrix s(n, 4);
    Rng local(55);
    for (int i = 0; i < n; ++i) {
      for (int l = 0; l < 4; ++l) {
        s(i, l) = (l == labels[i] ? strength : 0.0) + 0.8 * local.normal();
      }
    }
    return to_llr_per_cluster(make_scores(s, kLangs4), kClusters4);
  };
  double weak = compute_cllr(build(0.5), labels, kClusters4);
  double strong = compute_cllr(build(3.0), labels, kClusters4);
  CHECK(strong < weak);
  (void)rng;
}

TEST_CASE("accuracy and confusion counts are consistent") {
  auto labels = cyclic_labels(60, 4);
  Rng rng(124);
  ScoreMatrix llr = to_llr_per_cluster(noisy_scores(labels, 4.0, 0.3, kLangs4, rng),
                                       kClusters4);
  EvalReport report = evaluate(llr, labels, kClusters4);
  CHECK(report.accuracy > 0.9);
  int diag = 0, total = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      total += report.confusion(i, j);
      if (i == j) diag += report.confusion(i, j);
    }
  }
  CHECK(total == 60);
  CHECK(report.accuracy == doctest::Approx(static_cast<double>(diag) / total));
  // row sums equal per-language trial counts
  for (int i = 0; i < 4; ++i) {
    CHECK(report.confusion.row(i).sum() == 15);
  }
}

TEST_CASE("report text and table carry the exact key names") {
  auto labels = cyclic_labels(40, 4);
  Rng rng(125);
  ScoreMatrix llr =
      to_llr_per_cluster(noisy_scores(labels, 3.0, 0.5, kLangs4, rng), kClusters4);
  EvalReport report = evaluate(llr, labels, kClusters4);
  std::string text = report_text(report);
  CHECK(text.find("accuracy: ") != std::string::npos);
  CHECK(text.find("cavg_overall: ") != std::string::npos);
  CHECK(text.find("cavg.germanic: ") != std::string::npos);
  CHECK(text.find("cavg.romance: ") != std::string::npos);
  CHECK(text.find("cllr: ") != std::string::npos);
  std::string table = report_table(report);
  CHECK(table.find("accuracy\t") != std::string::npos);
  CHECK(table.find("cavg.germanic\t") != std::string::npos);
}

TEST_CASE("fusion fold assignment is deterministic by utt_id hash") {
  for (int folds : {2, 3}) {
    int f = fusion_fold_of("some-utterance", folds);
    CHECK(f == fusion_fold_of("some-utterance", folds));
    CHECK(f >= 0);
    CHECK(f < folds);
  }
}
