// bindings/module.cpp

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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lidkit/config.hpp"
#include "lidkit/frontend.hpp"
#include "lidkit/fusion.hpp"
#include "lidkit/gaussian_backend.hpp"
#include "lidkit/gmm.hpp"
#include "lidkit/manifest.hpp"
#include "lidkit/mclr.hpp"
#include "lidkit/metrics.hpp"
#include "lidkit/model_io.hpp"
#include "lidkit/pairnet.hpp"
#include "lidkit/pipeline.hpp"
#include "lidkit/plda.hpp"
#include "lidkit/scores.hpp"
#include "lidkit/svm.hpp"
#include "lidkit/synth.hpp"
#include "lidkit/tv.hpp"
#include "lidkit/util.hpp"
#include "lidkit/wav.hpp"

namespace py = pybind11;
using namespace lidkit;

namespace {

CovKind cov_kind(const std::string &s) {
  if (s == "diagonal") return CovKind::diagonal;
  if (s == "full") return CovKind::full;
  throw ConfigError("unknown covariance kind: " + s);
}

NormKind norm_kind(const std::string &s) {
  if (s == "whiten") return NormKind::whiten;
  if (s == "efr") return NormKind::efr;
  throw ConfigError("unknown normalizer kind: " + s);
}

std::string score_kind_name(ScoreKind k) {
  switch (k) {
    case ScoreKind::loglik: return "loglik";
    case ScoreKind::llr: return "llr";
    case ScoreKind::raw: return "raw";
  }
  return "raw";
}

ScoreKind score_kind(const std::string &s) {
  if (s == "loglik") return ScoreKind::loglik;
  if (s == "llr") return ScoreKind::llr;
  if (s == "raw") return ScoreKind::raw;
  throw ConfigError("unknown score kind: " + s);
}

SpeechMask to_mask(const std::vector<int> &m) {
  SpeechMask mask(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) mask[i] = m[i] ? 1 : 0;
  return mask;
}

std::vector<int> from_mask(const SpeechMask &m) {
  return std::vector<int>(m.begin(), m.end());
}

py::dict report_dict(const EvalReport &r) {
  py::dict d;
  d["accuracy"] = r.accuracy;
  d["cavg_overall"] = r.cavg_overall;
  py::dict per_cluster;
  for (const auto &[name, value] : r.cavg_per_cluster) per_cluster[name.c_str()] = value;
  d["cavg_per_cluster"] = per_cluster;
  d["cllr"] = r.cllr;
  d["confusion"] = Matrix(r.confusion.cast<double>());
  d["language_order"] = r.language_order;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spoken language identification toolkit: spectral front-end, "
            "GMM-UBM, i-vectors, back-end classifiers, fusion and metrics.";

  py::register_exception<ConfigError>(m, "LidConfigError");
  py::register_exception<DataError>(m, "LidDataError");
  py::register_exception<NumericError>(m, "LidNumericError");

  // ---------------------------------------------------------------- corpus
  py::class_<UtteranceRecord>(m, "UtteranceRecord")
      .def_readonly("utt_id", &UtteranceRecord::utt_id)
      .def_readonly("audio_path", &UtteranceRecord::audio_path)
      .def_readonly("language", &UtteranceRecord::language)
      .def_readonly("cluster", &UtteranceRecord::cluster)
      .def_property_readonly(
          "split", [](const UtteranceRecord &r) { return split_name(r.split); })
      .def_readonly("duration_s", &UtteranceRecord::duration_s);

  m.def("load_manifest", &load_manifest, py::arg("path"));
  m.def("hash_split_keep", &hash_split_keep, py::arg("utt_id"), py::arg("modulus"),
        py::arg("keep_below"));

  m.def(
      "read_wav",
      [](const std::string &path) {
        AudioSignal sig = read_wav(path);
        return py::make_tuple(sig.samples, sig.sample_rate_hz);
      },
      py::arg("path"));
  m.def(
      "write_wav",
      [](const std::string &path, const std::vector<double> &samples, int rate) {
        AudioSignal sig;
        sig.samples = samples;
        sig.sample_rate_hz = rate;
        write_wav(path, sig);
      },
      py::arg("path"), py::arg("samples"), py::arg("sample_rate_hz"));

  m.def(
      "generate_synthetic_corpus",
      [](const std::string &out_dir, int n_languages, int languages_per_cluster,
         int train_per_language, int dev_per_language, int eval_per_language,
         double duration_min_s, double duration_max_s, std::uint64_t seed,
         int sample_rate_hz) {
        SynthSpec spec;
        spec.n_languages = n_languages;
        spec.languages_per_cluster = languages_per_cluster;
        spec.utterances_per_language = {{Split::train, train_per_language},
                                        {Split::dev, dev_per_language},
                                        {Split::eval, eval_per_language}};
        spec.duration_min_s = duration_min_s;
        spec.duration_max_s = duration_max_s;
        spec.seed = seed;
        spec.sample_rate_hz = sample_rate_hz;
        return generate_synthetic_corpus(spec, out_dir);
      },
      py::arg("out_dir"), py::arg("n_languages") = 5,
      py::arg("languages_per_cluster") = 3, py::arg("train_per_language") = 10,
      py::arg("dev_per_language") = 4, py::arg("eval_per_language") = 4,
      py::arg("duration_min_s") = 3.0, py::arg("duration_max_s") = 10.0,
      py::arg("seed") = 7, py::arg("sample_rate_hz") = 8000);

  // -------------------------------------------------------------- frontend
  py::class_<FeatureMatrix>(m, "FeatureMatrix")
      .def(py::init([](const Matrix &data, const std::vector<int> &mask) {
             FeatureMatrix f;
             f.data = data;
             f.mask = mask.empty() ? SpeechMask(data.rows(), 1) : to_mask(mask);
             f.validate();
             return f;
           }),
           py::arg("data"), py::arg("mask") = std::vector<int>{})
      .def_property_readonly("data", [](const FeatureMatrix &f) { return f.data; })
      .def_property_readonly("mask", [](const FeatureMatrix &f) { return from_mask(f.mask); })
      .def_property_readonly("frames", &FeatureMatrix::frames)
      .def_property_readonly("dims", &FeatureMatrix::dims)
      .def("speech_frames", &FeatureMatrix::speech_frames)
      .def("speech_rows", &FeatureMatrix::speech_rows);

  m.def(
      "extract_mfcc",
      [](const std::vector<double> &samples, int rate, double window_ms, double hop_ms,
         int n_filters, int n_ceps, bool include_energy, double preemphasis) {
        AudioSignal sig;
        sig.samples = samples;
        sig.sample_rate_hz = rate;
        FrameConfig frame;
        frame.window_ms = window_ms;
        frame.hop_ms = hop_ms;
        MfccConfig mfcc;
        mfcc.n_filters = n_filters;
        mfcc.n_ceps = n_ceps;
        mfcc.include_energy = include_energy;
        mfcc.preemphasis = preemphasis;
        return extract_mfcc(sig, frame, mfcc);
      },
      py::arg("samples"), py::arg("sample_rate_hz"), py::arg("window_ms") = 20.0,
      py::arg("hop_ms") = 10.0, py::arg("n_filters") = 24, py::arg("n_ceps") = 7,
      py::arg("include_energy") = false, py::arg("preemphasis") = 0.97);

  m.def("append_deltas", &append_deltas, py::arg("features"), py::arg("delta_window") = 2);

  m.def(
      "build_sdc",
      [](const FeatureMatrix &ceps, int n, int d, int p, int k) {
        SdcConfig cfg;
        cfg.N = n;
        cfg.d = d;
        cfg.P = p;
        cfg.k = k;
        return build_sdc(ceps, cfg);
      },
      py::arg("cepstra"), py::arg("n") = 7, py::arg("d") = 1, py::arg("p") = 3,
      py::arg("k") = 7);

  m.def(
      "energy_vad",
      [](const std::vector<double> &samples, int rate, const std::string &mode,
         double margin_db) {
        AudioSignal sig;
        sig.samples = samples;
        sig.sample_rate_hz = rate;
        VadConfig cfg;
        cfg.mode = mode == "snr_estimate" ? VadMode::snr_estimate : VadMode::energy_threshold;
        cfg.margin_db = margin_db;
        return from_mask(energy_vad(sig, FrameConfig{}, cfg));
      },
      py::arg("samples"), py::arg("sample_rate_hz"), py::arg("mode") = "energy_threshold",
      py::arg("margin_db") = 30.0);

  m.def(
      "context_mask",
      [](const std::vector<int> &mask, int context_frames, double ratio) {
        return from_mask(context_mask(to_mask(mask), context_frames, ratio));
      },
      py::arg("mask"), py::arg("context_frames"), py::arg("ratio") = 0.7);

  m.def(
      "cmvn",
      [](const FeatureMatrix &feat, const std::string &scope, double window_s,
         double frame_rate_hz) {
        CmvnScope s = scope == "sliding" ? CmvnScope::sliding : CmvnScope::per_utterance;
        return cmvn(feat, s, window_s, frame_rate_hz);
      },
      py::arg("features"), py::arg("scope") = "per_utterance", py::arg("window_s") = 3.0,
      py::arg("frame_rate_hz") = 100.0);

  m.def("feature_warp", &feature_warp, py::arg("features"), py::arg("window_frames") = 301);

  m.def(
      "sdc_mfcc_features",
      [](const std::vector<double> &samples, int rate, int warp_window) {
        AudioSignal sig;
        sig.samples = samples;
        sig.sample_rate_hz = rate;
        FrontendConfig cfg;
        cfg.warp_window_frames = warp_window;
        return sdc_mfcc_features(sig, cfg);
      },
      py::arg("samples"), py::arg("sample_rate_hz"), py::arg("warp_window") = 301);

  // ------------------------------------------------------------------- gmm
  py::class_<GmmModel>(m, "GmmModel")
      .def_property_readonly("weights", [](const GmmModel &g) { return g.weights; })
      .def_property_readonly("means", [](const GmmModel &g) { return g.means; })
      .def_property_readonly("diag_vars", [](const GmmModel &g) { return g.diag_vars; })
      .def_property_readonly("covariance_kind",
                             [](const GmmModel &g) {
                               return g.covariance_kind == CovKind::diagonal ? "diagonal"
                                                                             : "full";
                             })
      .def_property_readonly("num_components", &GmmModel::num_components)
      .def_property_readonly("dim", &GmmModel::dim);

  py::class_<BwStats>(m, "BwStats")
      .def_property_readonly("n", [](const BwStats &s) { return s.n; })
      .def_property_readonly("f", [](const BwStats &s) { return s.f; })
      .def_readonly("frames_total", &BwStats::frames_total);

  m.def(
      "train_diag_gmm",
      [](const Matrix &frames, int k, int iters, double var_floor, std::uint64_t seed,
         int jobs) {
        return train_diag_gmm(frames, k, iters, var_floor, seed, nullptr, jobs);
      },
      py::arg("frames"), py::arg("k"), py::arg("iters") = 8, py::arg("var_floor") = 1e-3,
      py::arg("seed") = 0, py::arg("jobs") = 1);
  m.def(
      "refine_full_gmm",
      [](const GmmModel &diag, const Matrix &frames, int iters, int jobs) {
        return refine_full_gmm(diag, frames, iters, nullptr, jobs);
      },
      py::arg("diag"), py::arg("frames"), py::arg("iters") = 5, py::arg("jobs") = 1);
  m.def("accumulate_stats", &accumulate_stats, py::arg("ubm"), py::arg("features"));
  m.def("total_log_likelihood", &total_log_likelihood, py::arg("model"), py::arg("frames"));
  m.def("map_supervector", &map_supervector, py::arg("ubm"), py::arg("features"),
        py::arg("relevance") = 16.0, py::arg("kl_normalize") = false);
  m.def("save_gmm",
        [](const GmmModel &g, const std::string &path) { save_gmm(g, path); });
  m.def("load_gmm", [](const std::string &path) { return load_gmm(path); });

  // -------------------------------------------------------------------- tv
  py::class_<TvModel>(m, "TvModel")
      .def_property_readonly("T", [](const TvModel &t) { return t.T; })
      .def_property_readonly("bias", [](const TvModel &t) { return t.bias; })
      .def_readonly("rank", &TvModel::rank);

  py::class_<TvTrainResult>(m, "TvTrainResult")
      .def_readonly("model", &TvTrainResult::model)
      .def_readonly("train_ivectors", &TvTrainResult::train_ivectors)
      .def_readonly("posterior_mean", &TvTrainResult::posterior_mean)
      .def_readonly("posterior_covariance", &TvTrainResult::posterior_covariance)
      .def_readonly("objective", &TvTrainResult::objective);

  m.def(
      "train_tv",
      [](const std::vector<BwStats> &stats, const GmmModel &ubm, int rank, int iters,
         std::uint64_t seed, int jobs) {
        TvTrainOptions opts;
        opts.iters = iters;
        opts.seed = seed;
        opts.jobs = jobs;
        return train_tv(stats, ubm, rank, opts);
      },
      py::arg("stats"), py::arg("ubm"), py::arg("rank"), py::arg("iters") = 8,
      py::arg("seed") = 0, py::arg("jobs") = 1);
  m.def("extract_ivector", &extract_ivector, py::arg("tv"), py::arg("ubm"),
        py::arg("stats"));
  m.def("save_tv", [](const TvModel &t, const std::string &path) { save_tv(t, path); });
  m.def("load_tv", [](const std::string &path) { return load_tv(path); });

  py::class_<Normalizer>(m, "Normalizer")
      .def_property_readonly("mean", [](const Normalizer &n) { return n.mean; })
      .def_property_readonly("transform", [](const Normalizer &n) { return n.transform; })
      .def_readonly("length_norm", &Normalizer::length_norm);

  m.def(
      "fit_normalizer",
      [](const Matrix &ivectors, const std::string &kind, int iterations, bool length) {
        return fit_normalizer(ivectors, norm_kind(kind), iterations, length);
      },
      py::arg("ivectors"), py::arg("kind") = "whiten", py::arg("iterations") = 1,
      py::arg("length_norm") = false);
  m.def("apply_normalizer",
        [](const Normalizer &n, const Vector &w) { return apply_normalizer(n, w); });
  m.def("apply_normalizer_rows", &apply_normalizer_rows, py::arg("normalizer"),
        py::arg("ivectors"));

  // ---------------------------------------------------------------- scores
  py::class_<ScoreMatrix>(m, "ScoreMatrix")
      .def(py::init([](const std::vector<std::string> &utt_ids,
                       const std::vector<std::string> &language_order,
                       const Matrix &scores, const std::string &kind) {
             ScoreMatrix sm;
             sm.utt_ids = utt_ids;
             sm.language_order = language_order;
             sm.scores = scores;
             sm.kind = score_kind(kind);
             sm.validate();
             return sm;
           }),
           py::arg("utt_ids"), py::arg("language_order"), py::arg("scores"),
           py::arg("kind") = "raw")
      .def_readonly("utt_ids", &ScoreMatrix::utt_ids)
      .def_readonly("language_order", &ScoreMatrix::language_order)
      .def_property_readonly("scores", [](const ScoreMatrix &s) { return s.scores; })
      .def_property_readonly("kind",
                             [](const ScoreMatrix &s) { return score_kind_name(s.kind); });
  m.def("write_score_tsv", &write_score_tsv, py::arg("scores"), py::arg("path"));
  m.def(
      "read_score_tsv",
      [](const std::string &path, const std::string &kind) {
        return read_score_tsv(path, score_kind(kind));
      },
      py::arg("path"), py::arg("kind") = "raw");

  // -------------------------------------------------------------- backends
  py::class_<GaussianBackend>(m, "GaussianBackend")
      .def_readonly("language_order", &GaussianBackend::language_order)
      .def_property_readonly("means", [](const GaussianBackend &g) { return g.means; });
  m.def("gb_train", &gb_train, py::arg("ivectors"), py::arg("labels"),
        py::arg("language_order"), py::arg("gamma") = 0.1);
  m.def("gb_score", &gb_score, py::arg("model"), py::arg("ivector"));
  m.def("gb_score_matrix", &gb_score_matrix, py::arg("model"), py::arg("ivectors"),
        py::arg("utt_ids"));

  py::class_<MclrModel>(m, "MclrModel")
      .def_readonly("alpha", &MclrModel::alpha)
      .def_property_readonly("beta", [](const MclrModel &m_) { return m_.beta; });
  m.def("mclr_train", &mclr_train, py::arg("scores"), py::arg("labels"),
        py::arg("l2") = 0.0);
  m.def("mclr_apply", &mclr_apply, py::arg("model"), py::arg("scores"));

  py::class_<PldaModel>(m, "PldaModel")
      .def_property_readonly("mu", [](const PldaModel &p) { return p.mu; })
      .def_property_readonly("subspace", [](const PldaModel &p) { return p.subspace; })
      .def_property_readonly("sigma_w", [](const PldaModel &p) { return p.sigma_w; });
  m.def(
      "plda_train",
      [](const Matrix &x, const std::vector<int> &labels, int rank, int iters,
         std::uint64_t seed) {
        PldaTrainResult r = plda_train(x, labels, rank, iters, seed);
        return py::make_tuple(r.model, r.objective);
      },
      py::arg("ivectors"), py::arg("labels"), py::arg("rank"), py::arg("iters") = 10,
      py::arg("seed") = 0);
  m.def("plda_score", &plda_score, py::arg("model"), py::arg("enroll"), py::arg("test"));

  py::class_<SvmSet>(m, "SvmSet").def_readonly("language_order", &SvmSet::language_order);
  m.def(
      "svm_train",
      [](const Matrix &x, const std::vector<int> &labels,
         const std::vector<std::string> &langs, double c, int epochs) {
        SvmTrainOptions opts;
        opts.C = c;
        opts.epochs = epochs;
        return svm_train(x, labels, langs, opts);
      },
      py::arg("x"), py::arg("labels"), py::arg("language_order"), py::arg("c") = 1.0,
      py::arg("epochs") = 200);
  m.def("svm_score", &svm_score, py::arg("model"), py::arg("x"),
        py::arg("voting") = false);

  m.def(
      "generate_pairs",
      [](const std::vector<int> &labels, int rounds, bool balance, std::uint64_t seed) {
        auto pairs = generate_pairs(labels, rounds, balance, seed);
        std::vector<std::tuple<int, int, bool>> out;
        out.reserve(pairs.size());
        for (const auto &p : pairs) out.emplace_back(p.a, p.b, p.same);
        return out;
      },
      py::arg("labels"), py::arg("rounds") = 20, py::arg("balance") = true,
      py::arg("seed") = 0);

  py::class_<PairNet>(m, "PairNet")
      .def("embed", &PairNet::embed)
      .def("embed_rows", &PairNet::embed_rows)
      .def_property_readonly("embedding_dim", &PairNet::embedding_dim);
  m.def(
      "pairnet_train",
      [](const Matrix &x, const std::vector<int> &labels, std::vector<int> hidden,
         int embedding, int epochs, double lr, int rounds, bool balance,
         std::uint64_t seed) {
        PairNetOptions opts;
        opts.hidden_dims = hidden;
        opts.embedding_dim = embedding;
        opts.epochs_per_stage = epochs;
        opts.learning_rate = lr;
        opts.rounds = rounds;
        opts.balance = balance;
        opts.seed = seed;
        PairNetTrainResult r = pairnet_train(x, labels, opts);
        return py::make_tuple(r.net, r.stage_final_loss);
      },
      py::arg("ivectors"), py::arg("labels"), py::arg("hidden") = std::vector<int>{256},
      py::arg("embedding") = 64, py::arg("epochs") = 150, py::arg("lr") = 0.5,
      py::arg("rounds") = 20, py::arg("balance") = true, py::arg("seed") = 0);
  m.def("pairnet_centroids", &pairnet_centroids, py::arg("net"), py::arg("ivectors"),
        py::arg("labels"), py::arg("n_languages"));
  m.def("pairnet_score", &pairnet_score, py::arg("net"), py::arg("centroids"),
        py::arg("test"));

  // ---------------------------------------------------------------- fusion
  py::class_<FusionModel>(m, "FusionModel")
      .def_property_readonly("weights", [](const FusionModel &f) { return f.weights; })
      .def_property_readonly("beta", [](const FusionModel &f) { return f.beta; });
  m.def(
      "fusion_train",
      [](const std::vector<ScoreMatrix> &scores, const std::vector<int> &labels,
         int folds) {
        FusionTrainResult r = fusion_train(scores, labels, folds);
        return py::make_tuple(r.model, r.fold_heldout_ce, r.final_ce);
      },
      py::arg("subsystem_scores"), py::arg("labels"), py::arg("folds") = 2);
  m.def("fusion_apply", &fusion_apply, py::arg("model"), py::arg("subsystem_scores"));
  m.def("to_llr_per_cluster", &to_llr_per_cluster, py::arg("scores"),
        py::arg("lang_to_cluster"));

  // --------------------------------------------------------------- metrics
  m.def("accuracy", &accuracy, py::arg("scores"), py::arg("labels"));
  m.def(
      "compute_cavg",
      [](const ScoreMatrix &llr, const std::vector<int> &labels,
         const std::map<std::string, std::string> &clusters) {
        CavgResult r = compute_cavg(llr, labels, clusters);
        return py::make_tuple(r.overall, r.per_cluster);
      },
      py::arg("llr"), py::arg("labels"), py::arg("lang_to_cluster"));
  m.def("compute_cllr", &compute_cllr, py::arg("llr"), py::arg("labels"),
        py::arg("lang_to_cluster"));
  m.def(
      "evaluate",
      [](const ScoreMatrix &llr, const std::vector<int> &labels,
         const std::map<std::string, std::string> &clusters) {
        return report_dict(evaluate(llr, labels, clusters));
      },
      py::arg("llr"), py::arg("labels"), py::arg("lang_to_cluster"));

  // -------------------------------------------------------------- pipeline
  m.def(
      "run_experiment",
      [](const std::string &config_path, bool force, int jobs, bool verbose) {
        ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
        RunOptions opts;
        opts.force = force;
        opts.jobs = jobs;
        opts.verbose = verbose;
        RunResult r = run_experiment(cfg, opts);
        py::dict d = report_dict(r.fused);
        py::dict backends;
        for (const auto &b : r.backends) {
          py::dict bd;
          bd["accuracy"] = b.accuracy;
          bd["cavg"] = b.cavg;
          bd["cllr"] = b.cllr;
          backends[b.name.c_str()] = bd;
        }
        d["backends"] = backends;
        d["report_path"] = r.report_path;
        d["scores_path"] = r.scores_path;
        return d;
      },
      py::arg("config_path"), py::arg("force") = false, py::arg("jobs") = 0,
      py::arg("verbose") = false);
  m.def(
      "eval_scores",
      [](const std::string &scores_path, const std::string &manifest_path) {
        return report_dict(eval_scores(scores_path, manifest_path));
      },
      py::arg("scores_path"), py::arg("manifest_path"));
}
