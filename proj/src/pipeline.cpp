// src/pipeline.cpp

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

#include "lidkit/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "lidkit/frontend.hpp"
#include "lidkit/fusion.hpp"
#include "lidkit/gaussian_backend.hpp"
#include "lidkit/gmm.hpp"
#include "lidkit/manifest.hpp"
#include "lidkit/mclr.hpp"
#include "lidkit/pairnet.hpp"
#include "lidkit/plda.hpp"
#include "lidkit/svm.hpp"
#include "lidkit/synth.hpp"
#include "lidkit/tv.hpp"
#include "lidkit/util.hpp"
#include "lidkit/wav.hpp"

namespace fs = std::filesystem;

namespace lidkit {

namespace {

std::string hash_hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Stage caching: LIDK outputs embed the stage hash as meta; other files get
// a sidecar .hash marker.
bool lidk_cached(const std::string &path, std::uint64_t hash, bool force) {
  if (force || !fs::exists(path)) return false;
  try {
    Container c = load_container(path);
    return c.has_meta("config_hash") && c.meta_value("config_hash") == hash_hex(hash);
  } catch (const Error &) {
    return false;
  }
}

bool marker_cached(const std::string &path, std::uint64_t hash, bool force) {
  if (force || !fs::exists(path)) return false;
  std::ifstream in(path + ".hash");
  if (!in) return false;
  std::string stored;
  std::getline(in, stored);
  return stored == hash_hex(hash);
}

void write_marker(const std::string &path, std::uint64_t hash) {
  std::ofstream out(path + ".hash", std::ios::binary);
  out << hash_hex(hash) << "\n";
}

struct Paths {
  fs::path root;
  explicit Paths(const ExperimentConfig &cfg) : root(cfg.output_dir) {}

  std::string corpus_dir() const { return (root / "corpus").string(); }
  std::string manifest() const { return (root / "corpus" / "manifest.tsv").string(); }
  std::string features_dir() const { return (root / "features").string(); }
  std::string feature_file(const std::string &utt) const {
    return (root / "features" / (utt + ".lidf")).string();
  }
  std::string features_index() const { return (root / "features" / "index.lidk").string(); }
  std::string skipped_tsv() const { return (root / "features" / "skipped.tsv").string(); }
  std::string languages() const { return (root / "languages.lidk").string(); }
  std::string ubm() const { return (root / "ubm.lidk").string(); }
  std::string stats(Split s) const {
    return (root / ("stats_" + split_name(s) + ".lidk")).string();
  }
  std::string tv() const { return (root / "tv.lidk").string(); }
  std::string ivectors(Split s) const {
    return (root / ("ivectors_" + split_name(s) + ".lidk")).string();
  }
  std::string normalizer() const { return (root / "normalizer.lidk").string(); }
  std::string backend_model(const std::string &name) const {
    return (root / ("backend_" + name + ".lidk")).string();
  }
  std::string backend_aux(const std::string &name) const {
    return (root / ("backend_" + name + "_aux.lidk")).string();
  }
  std::string backend_mclr(const std::string &name) const {
    return (root / ("calibration_" + name + ".lidk")).string();
  }
  std::string fusion() const { return (root / "fusion.lidk").string(); }
  std::string scores(const std::string &tag) const {
    return (root / ("scores_" + tag + ".tsv")).string();
  }
  std::string report_txt() const { return (root / "report.txt").string(); }
  std::string report_tsv() const { return (root / "report.tsv").string(); }
  std::string backends_report() const { return (root / "backends_report.tsv").string(); }
  std::string confusion_txt() const { return (root / "confusion.txt").string(); }
};

void info(const RunOptions &opts, const std::string &msg) {
  if (opts.verbose) log_info(msg);
}

int effective_jobs(const ExperimentConfig &cfg, const RunOptions &opts) {
  if (opts.jobs > 0) return opts.jobs;
  if (cfg.jobs > 0) return cfg.jobs;
  return default_jobs();
}

// Manifest records that survived the front-end, in manifest order.
struct CorpusView {
  std::vector<UtteranceRecord> records;
  std::vector<std::string> languages;
  std::map<std::string, std::string> clusters;

  std::vector<UtteranceRecord> split(Split s) const { return filter_split(records, s); }
  int language_index(const std::string &lang) const {
    auto it = std::lower_bound(languages.begin(), languages.end(), lang);
    if (it == languages.end() || *it != lang) {
      throw DataError("unknown language: " + lang);
    }
    return static_cast<int>(it - languages.begin());
  }
};

std::string ensure_corpus(const ExperimentConfig &cfg, const RunOptions &opts,
                          const Paths &paths) {
  if (!cfg.synth_enabled) {
    if (!fs::exists(cfg.manifest_path)) {
      throw DataError("manifest does not exist: " + cfg.manifest_path);
    }
    return cfg.manifest_path;
  }
  std::uint64_t h = cfg.stage_hash("corpus");
  std::string manifest = paths.manifest();
  if (marker_cached(manifest, h, opts.force)) {
    info(opts, "corpus: cached");
    return manifest;
  }
  info(opts, "corpus: generating synthetic corpus");
  fs::create_directories(paths.corpus_dir());
  std::string written = generate_synthetic_corpus(cfg.synth, paths.corpus_dir());
  write_marker(written, h);
  return written;
}

CorpusView load_corpus_view(const std::string &manifest_path,
                            const std::set<std::string> *keep_utts) {
  CorpusView view;
  auto all = load_manifest(manifest_path);
  for (auto &rec : all) {
    if (keep_utts != nullptr && keep_utts->count(rec.utt_id) == 0) continue;
    view.records.push_back(std::move(rec));
  }
  view.languages = language_order(view.records);
  view.clusters = cluster_map(view.records);
  return view;
}

// Runs the front-end for every manifest entry, dumping LIDF files; failures
// (too short, all silence) are skipped with a warning and recorded.
void compute_features(const ExperimentConfig &cfg, const RunOptions &opts,
                      const Paths &paths, const std::vector<UtteranceRecord> &records) {
  std::uint64_t h = cfg.stage_hash("features");
  if (lidk_cached(paths.features_index(), h, opts.force)) {
    info(opts, "features: cached");
    return;
  }
  info(opts, "features: extracting " + std::to_string(records.size()) + " utterances");
  fs::create_directories(paths.features_dir());
  int n = static_cast<int>(records.size());
  std::vector<std::string> errors(n);
  parallel_for(n, effective_jobs(cfg, opts), [&](int i) {
    try {
      AudioSignal sig = read_wav(records[i].audio_path);
      FeatureMatrix feat = sdc_mfcc_features(sig, cfg.frontend);
      write_feature_dump(feat, paths.feature_file(records[i].utt_id));
    } catch (const Error &e) {
      errors[i] = e.what();
    }
  });

  std::vector<std::string> ok_utts;
  std::ostringstream skipped;
  for (int i = 0; i < n; ++i) {
    if (errors[i].empty()) {
      ok_utts.push_back(records[i].utt_id);
    } else {
      log_warn("features: skipping " + records[i].utt_id + ": " + errors[i]);
      skipped << records[i].utt_id << '\t' << errors[i] << '\n';
    }
  }
  if (ok_utts.empty()) throw DataError("features: every utterance failed the front-end");
  {
    std::ofstream f(paths.skipped_tsv(), std::ios::binary);
    f << skipped.str();
  }
  ContainerWriter index("feature_index");
  index.set_meta("config_hash", hash_hex(h));
  index.add_names(ok_utts);
  Vector count(1);
  count(0) = static_cast<double>(ok_utts.size());
  index.add_vector("count", count);
  index.write(paths.features_index());
}

std::set<std::string> feature_utts(const Paths &paths) {
  Container c = load_container(paths.features_index());
  return std::set<std::string>(c.names.begin(), c.names.end());
}

FeatureMatrix load_features(const Paths &paths, const std::string &utt) {
  return read_feature_dump(paths.feature_file(utt));
}

void save_language_list(const Paths &paths, const std::vector<std::string> &languages,
                        std::uint64_t hash) {
  ContainerWriter w("language_list");
  w.set_meta("config_hash", hash_hex(hash));
  w.add_names(languages);
  Vector count(1);
  count(0) = static_cast<double>(languages.size());
  w.add_vector("count", count);
  w.write(paths.languages());
}

std::vector<std::string> load_language_list(const Paths &paths) {
  Container c = load_container(paths.languages());
  if (c.kind != "language_list") {
    throw DataError("expected a language_list container in " + paths.languages());
  }
  return c.names;
}

GmmModel ensure_ubm(const ExperimentConfig &cfg, const RunOptions &opts,
                    const Paths &paths, const CorpusView &view) {
  std::uint64_t h = cfg.stage_hash("ubm");
  if (lidk_cached(paths.ubm(), h, opts.force)) {
    info(opts, "ubm: cached");
    return load_gmm(paths.ubm());
  }
  auto train = view.split(Split::train);
  if (train.empty()) throw DataError("ubm: no train-split utterances");
  info(opts, "ubm: pooling speech frames from " + std::to_string(train.size()) +
                 " utterances");
  std::vector<Matrix> chunks(train.size());
  parallel_for(static_cast<int>(train.size()), effective_jobs(cfg, opts), [&](int i) {
    chunks[i] = load_features(paths, train[i].utt_id).speech_rows();
  });
  Eigen::Index total = 0;
  for (const auto &c : chunks) total += c.rows();
  if (total == 0) throw DataError("ubm: no speech frames in the train split");
  Matrix pooled(total, chunks[0].cols());
  Eigen::Index row = 0;
  for (const auto &c : chunks) {
    pooled.middleRows(row, c.rows()) = c;
    row += c.rows();
  }
  pooled = subsample_rows(pooled, cfg.ubm_max_frames);

  info(opts, "ubm: training K=" + std::to_string(cfg.ubm_size) + " on " +
                 std::to_string(pooled.rows()) + " frames");
  int jobs = effective_jobs(cfg, opts);
  GmmModel ubm = train_diag_gmm(pooled, cfg.ubm_size, cfg.ubm_iters, cfg.ubm_var_floor,
                                cfg.seed, nullptr, jobs);
  if (cfg.ubm_kind == CovKind::full) {
    info(opts, "ubm: refining to full covariance");
    ubm = refine_full_gmm(ubm, pooled, cfg.ubm_iters, nullptr, jobs);
  }
  save_gmm(ubm, paths.ubm(), {{"config_hash", hash_hex(h)}});
  return ubm;
}

StatsArchive ensure_stats(const ExperimentConfig &cfg, const RunOptions &opts,
                          const Paths &paths, const CorpusView &view, Split split,
                          const GmmModel &ubm) {
  std::uint64_t h = cfg.stage_hash("stats");
  std::string path = paths.stats(split);
  if (lidk_cached(path, h, opts.force)) {
    StatsArchive cached = load_stats_archive(path);
    if (cached.ubm_hash == ubm.param_hash()) return cached;
  }
  auto records = view.split(split);
  if (records.empty()) {
    throw DataError("stats: split " + split_name(split) + " has no utterances");
  }
  info(opts, "stats: " + split_name(split) + " split, " +
                 std::to_string(records.size()) + " utterances");
  StatsArchive archive;
  archive.ubm_hash = ubm.param_hash();
  archive.utt_ids.resize(records.size());
  archive.stats.resize(records.size());
  parallel_for(static_cast<int>(records.size()), effective_jobs(cfg, opts), [&](int i) {
    archive.utt_ids[i] = records[i].utt_id;
    archive.stats[i] = accumulate_stats(ubm, load_features(paths, records[i].utt_id));
  });
  save_stats_archive(archive, path, {{"config_hash", hash_hex(h)}});
  return archive;
}

TvModel ensure_tv(const ExperimentConfig &cfg, const RunOptions &opts, const Paths &paths,
                  const StatsArchive &train_stats, const GmmModel &ubm) {
  std::uint64_t h = cfg.stage_hash("tv");
  if (lidk_cached(paths.tv(), h, opts.force)) {
    info(opts, "tv: cached");
    return load_tv(paths.tv());
  }
  info(opts, "tv: training R=" + std::to_string(cfg.tv_rank) + " on " +
                 std::to_string(train_stats.stats.size()) + " utterances");
  TvTrainOptions topts;
  topts.iters = cfg.tv_iters;
  topts.seed = cfg.seed;
  topts.jobs = effective_jobs(cfg, opts);
  TvTrainResult r = train_tv(train_stats.stats, ubm, cfg.tv_rank, topts);
  save_tv(r.model, paths.tv(), {{"config_hash", hash_hex(h)}});
  return r.model;
}

VectorArchive ensure_ivectors(const ExperimentConfig &cfg, const RunOptions &opts,
                              const Paths &paths, Split split,
                              const StatsArchive &stats, const TvModel &tv,
                              const GmmModel &ubm) {
  std::uint64_t h = cfg.stage_hash("ivectors");
  std::string path = paths.ivectors(split);
  if (lidk_cached(path, h, opts.force)) {
    return load_vector_archive(path, "ivector_archive");
  }
  info(opts, "ivectors: " + split_name(split) + " split");
  TvExtractor extractor(tv, ubm);
  VectorArchive archive;
  archive.utt_ids = stats.utt_ids;
  archive.rows = Matrix(stats.stats.size(), tv.rank);
  parallel_for(static_cast<int>(stats.stats.size()), effective_jobs(cfg, opts), [&](int i) {
    archive.rows.row(i) = extractor.extract(stats.stats[i]).transpose();
  });
  save_vector_archive(archive, "ivector_archive", path, {{"config_hash", hash_hex(h)}});
  return archive;
}

Normalizer ensure_normalizer(const ExperimentConfig &cfg, const RunOptions &opts,
                             const Paths &paths, const VectorArchive &train_ivectors) {
  std::uint64_t h = cfg.stage_hash("normalizer");
  if (lidk_cached(paths.normalizer(), h, opts.force)) {
    info(opts, "normalizer: cached");
    return load_normalizer(paths.normalizer());
  }
  info(opts, "normalizer: fitting on the train split");
  Normalizer norm = fit_normalizer(train_ivectors.rows, cfg.norm_kind,
                                   cfg.norm_iterations, cfg.norm_length);
  save_normalizer(norm, paths.normalizer(), {{"config_hash", hash_hex(h)}});
  return norm;
}

std::vector<int> labels_for(const CorpusView &view,
                            const std::vector<UtteranceRecord> &records) {
  std::vector<int> labels(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    labels[i] = view.language_index(records[i].language);
  }
  return labels;
}

Matrix tandem_supervectors(const GmmModel &ubm, const StatsArchive &stats,
                           double relevance) {
  int n = static_cast<int>(stats.stats.size());
  Matrix sv(n, static_cast<Eigen::Index>(ubm.num_components()) * ubm.dim());
  for (int i = 0; i < n; ++i) {
    sv.row(i) =
        map_supervector_from_stats(ubm, stats.stats[i], relevance, true).transpose();
  }
  return sv;
}

// Everything a back-end needs at train time.
struct BackendInputs {
  const Matrix &train_norm;
  const std::vector<int> &train_labels;
  const std::vector<UtteranceRecord> &train_records;
  const StatsArchive &train_stats;
  const std::vector<std::string> &languages;
  const GmmModel &ubm;
};

void train_backend_impl(const ExperimentConfig &cfg, const RunOptions &opts,
                        const Paths &paths, const BackendInputs &in,
                        const std::string &name) {
  std::uint64_t h = cfg.stage_hash("backend." + name);
  const std::string model_path = paths.backend_model(name);
  if (lidk_cached(model_path, h, opts.force)) {
    info(opts, "backend " + name + ": cached");
    return;
  }
  info(opts, "backend " + name + ": training");
  MetaMap meta{{"config_hash", hash_hex(h)}};

  if (name == "gb_mclr") {
    GaussianBackend gb =
        gb_train(in.train_norm, in.train_labels, in.languages, cfg.backends.gb_gamma);
    save_gaussian_backend(gb, model_path, meta);
  } else if (name == "plda") {
    // Duration filter applies to training and enrollment alike.
    std::vector<int> keep;
    for (std::size_t i = 0; i < in.train_records.size(); ++i) {
      if (in.train_records[i].duration_s >= cfg.backends.plda_min_duration_s) {
        keep.push_back(static_cast<int>(i));
      }
    }
    if (keep.size() < in.train_records.size()) {
      log_warn("plda: excluded " +
               std::to_string(in.train_records.size() - keep.size()) +
               " utterances shorter than " +
               std::to_string(cfg.backends.plda_min_duration_s) + " s");
    }
    if (keep.empty()) throw DataError("plda: every train utterance filtered out");
    Matrix x(keep.size(), in.train_norm.cols());
    std::vector<int> labels(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
      x.row(i) = in.train_norm.row(keep[i]);
      labels[i] = in.train_labels[keep[i]];
    }
    PldaTrainResult r =
        plda_train(x, labels, cfg.backends.plda_rank, cfg.backends.plda_iters, cfg.seed);
    save_plda(r.model, model_path, meta);
    // Enrollment set, labeled by language name.
    VectorArchive enroll;
    enroll.rows = x;
    enroll.utt_ids.resize(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
      enroll.utt_ids[i] = in.languages[labels[i]];
    }
    save_vector_archive(enroll, "plda_enroll", paths.backend_aux(name), meta);
  } else if (name == "svm") {
    SvmTrainOptions sopts;
    sopts.C = cfg.backends.svm_c;
    sopts.epochs = cfg.backends.svm_epochs;
    SvmSet svm = svm_train(in.train_norm, in.train_labels, in.languages, sopts);
    save_svm(svm, model_path, meta);
  } else if (name == "pairnet") {
    PairNetOptions popts;
    popts.hidden_dims = cfg.backends.pairnet_hidden;
    popts.embedding_dim = cfg.backends.pairnet_embedding;
    popts.epochs_per_stage = cfg.backends.pairnet_epochs;
    popts.learning_rate = cfg.backends.pairnet_lr;
    popts.rounds = cfg.backends.pairnet_rounds;
    popts.balance = cfg.backends.pairnet_balance;
    popts.seed = cfg.seed;
    PairNetTrainResult r = pairnet_train(in.train_norm, in.train_labels, popts);
    save_pairnet(r.net, model_path, meta);
    VectorArchive centroids;
    centroids.rows = pairnet_centroids(r.net, in.train_norm, in.train_labels,
                                       static_cast<int>(in.languages.size()));
    centroids.utt_ids = in.languages;
    save_vector_archive(centroids, "pairnet_centroids", paths.backend_aux(name), meta);
  } else if (name == "tandem_svm") {
    Matrix sv = tandem_supervectors(in.ubm, in.train_stats, cfg.backends.tandem_relevance);
    SvmTrainOptions sopts;
    sopts.C = cfg.backends.svm_c;
    sopts.epochs = cfg.backends.svm_epochs;
    SvmSet svm = svm_train(sv, in.train_labels, in.languages, sopts);
    save_svm(svm, model_path, meta);
  } else {
    throw ConfigError("unknown back-end: " + name);
  }
}

// Raw subsystem scores for a set of utterances.
ScoreMatrix backend_scores(const ExperimentConfig &cfg, const Paths &paths,
                           const std::vector<std::string> &languages,
                           const std::string &name, const Matrix &norm_ivectors,
                           const std::vector<std::string> &utt_ids, const GmmModel &ubm,
                           const StatsArchive &stats) {
  if (name == "gb_mclr") {
    GaussianBackend gb = load_gaussian_backend(paths.backend_model(name));
    if (gb.language_order != languages) {
      throw DataError("backend gb_mclr: language order mismatch with the model");
    }
    return gb_score_matrix(gb, norm_ivectors, utt_ids);
  }
  if (name == "plda") {
    PldaModel model = load_plda(paths.backend_model(name));
    VectorArchive enroll_archive =
        load_vector_archive(paths.backend_aux(name), "plda_enroll");
    std::vector<Matrix> enroll(languages.size());
    for (std::size_t l = 0; l < languages.size(); ++l) {
      std::vector<int> rows;
      for (std::size_t i = 0; i < enroll_archive.utt_ids.size(); ++i) {
        if (enroll_archive.utt_ids[i] == languages[l]) rows.push_back(static_cast<int>(i));
      }
      if (rows.empty()) {
        throw DataError("plda: no enrollment vectors for language " + languages[l]);
      }
      enroll[l] = Matrix(rows.size(), enroll_archive.rows.cols());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        enroll[l].row(r) = enroll_archive.rows.row(rows[r]);
      }
    }
    ScoreMatrix sm;
    sm.utt_ids = utt_ids;
    sm.language_order = languages;
    sm.kind = ScoreKind::loglik;
    sm.scores = Matrix(norm_ivectors.rows(), languages.size());
    for (int i = 0; i < norm_ivectors.rows(); ++i) {
      sm.scores.row(i) =
          plda_score(model, enroll, Vector(norm_ivectors.row(i).transpose())).transpose();
    }
    sm.validate();
    return sm;
  }
  if (name == "svm" || name == "tandem_svm") {
    SvmSet svm = load_svm(paths.backend_model(name));
    if (svm.language_order != languages) {
      throw DataError("backend " + name + ": language order mismatch with the model");
    }
    if (name == "tandem_svm") {
      Matrix sv = tandem_supervectors(ubm, stats, cfg.backends.tandem_relevance);
      return svm_score_matrix(svm, sv, utt_ids);
    }
    return svm_score_matrix(svm, norm_ivectors, utt_ids);
  }
  if (name == "pairnet") {
    PairNet net = load_pairnet(paths.backend_model(name));
    VectorArchive centroids =
        load_vector_archive(paths.backend_aux(name), "pairnet_centroids");
    if (centroids.utt_ids != languages) {
      throw DataError("backend pairnet: language order mismatch with the centroids");
    }
    return pairnet_score_matrix(net, centroids.rows, languages, norm_ivectors, utt_ids);
  }
  throw ConfigError("unknown back-end: " + name);
}

// Affine part of the MCLR calibration; per-cluster LLR conversion happens
// downstream.
ScoreMatrix mclr_calibrate_affine(const MclrModel &model, const ScoreMatrix &scores) {
  ScoreMatrix out = scores;
  out.scores = model.alpha * scores.scores;
  out.scores.rowwise() += model.beta.transpose();
  out.kind = ScoreKind::raw;
  return out;
}

// Shared preparation: corpus + features + filtered manifest view.
struct Prepared {
  Paths paths;
  CorpusView view;

  Prepared(const ExperimentConfig &cfg, const RunOptions &opts) : paths(cfg) {
    fs::create_directories(paths.root);
    std::string manifest = ensure_corpus(cfg, opts, paths);
    CorpusView all = load_corpus_view(manifest, nullptr);
    compute_features(cfg, opts, paths, all.records);
    auto ok = feature_utts(paths);
    view = load_corpus_view(manifest, &ok);
    if (!lidk_cached(paths.languages(), cfg.stage_hash("features"), opts.force)) {
      save_language_list(paths, view.languages, cfg.stage_hash("features"));
    }
  }
};

struct FullContext {
  Prepared prep;
  GmmModel ubm;
  StatsArchive train_stats, dev_stats, eval_stats;
  TvModel tv;
  VectorArchive train_iv, dev_iv, eval_iv;
  Normalizer norm;
  Matrix train_norm, dev_norm, eval_norm;
  std::vector<UtteranceRecord> train_records, dev_records, eval_records;
  std::vector<int> train_labels, dev_labels, eval_labels;
  std::vector<std::string> dev_ids, eval_ids;

  FullContext(const ExperimentConfig &cfg, const RunOptions &opts)
      : prep(cfg, opts),
        ubm(ensure_ubm(cfg, opts, prep.paths, prep.view)),
        train_stats(ensure_stats(cfg, opts, prep.paths, prep.view, Split::train, ubm)),
        dev_stats(ensure_stats(cfg, opts, prep.paths, prep.view, Split::dev, ubm)),
        eval_stats(ensure_stats(cfg, opts, prep.paths, prep.view, Split::eval, ubm)),
        tv(ensure_tv(cfg, opts, prep.paths, train_stats, ubm)),
        train_iv(ensure_ivectors(cfg, opts, prep.paths, Split::train, train_stats, tv, ubm)),
        dev_iv(ensure_ivectors(cfg, opts, prep.paths, Split::dev, dev_stats, tv, ubm)),
        eval_iv(ensure_ivectors(cfg, opts, prep.paths, Split::eval, eval_stats, tv, ubm)),
        norm(ensure_normalizer(cfg, opts, prep.paths, train_iv)) {
    train_norm = apply_normalizer_rows(norm, train_iv.rows);
    dev_norm = apply_normalizer_rows(norm, dev_iv.rows);
    eval_norm = apply_normalizer_rows(norm, eval_iv.rows);
    train_records = prep.view.split(Split::train);
    dev_records = prep.view.split(Split::dev);
    eval_records = prep.view.split(Split::eval);
    train_labels = labels_for(prep.view, train_records);
    dev_labels = labels_for(prep.view, dev_records);
    eval_labels = labels_for(prep.view, eval_records);
    for (const auto &r : dev_records) dev_ids.push_back(r.utt_id);
    for (const auto &r : eval_records) eval_ids.push_back(r.utt_id);
  }

  BackendInputs inputs() const {
    return BackendInputs{train_norm,  train_labels, train_records,
                         train_stats, prep.view.languages, ubm};
  }
};

struct SubsystemScores {
  std::vector<ScoreMatrix> dev;   // subsystem outputs fed to fusion
  std::vector<ScoreMatrix> eval;
  std::vector<ScoreMatrix> eval_calibrated_llr;  // per-backend cluster LLRs
  std::vector<std::string> names;
};

SubsystemScores score_all_backends(const ExperimentConfig &cfg, const RunOptions &opts,
                                   FullContext &ctx) {
  SubsystemScores out;
  const Paths &paths = ctx.prep.paths;
  for (const auto &name : cfg.backends.enabled) {
    BackendInputs in = ctx.inputs();
    train_backend_impl(cfg, opts, paths, in, name);
    std::uint64_t h = cfg.stage_hash("backend." + name);

    ScoreKind fusion_kind = name == "gb_mclr" ? ScoreKind::llr : ScoreKind::raw;
    std::string dev_path = paths.scores("dev_" + name);
    std::string eval_path = paths.scores("eval_" + name);
    std::string eval_llr_path = paths.scores("eval_" + name + "_llr");

    if (!marker_cached(dev_path, h, opts.force) ||
        !marker_cached(eval_path, h, opts.force) ||
        !marker_cached(eval_llr_path, h, opts.force)) {
      info(opts, "backend " + name + ": scoring dev/eval");
      ScoreMatrix dev_raw =
          backend_scores(cfg, paths, ctx.prep.view.languages, name, ctx.dev_norm,
                         ctx.dev_ids, ctx.ubm, ctx.dev_stats);
      ScoreMatrix eval_raw =
          backend_scores(cfg, paths, ctx.prep.view.languages, name, ctx.eval_norm,
                         ctx.eval_ids, ctx.ubm, ctx.eval_stats);

      MclrModel calibration;
      if (lidk_cached(paths.backend_mclr(name), h, opts.force)) {
        calibration = load_mclr(paths.backend_mclr(name));
      } else {
        calibration = mclr_train(dev_raw, ctx.dev_labels);
        save_mclr(calibration, paths.backend_mclr(name), {{"config_hash", hash_hex(h)}});
      }

      ScoreMatrix eval_affine = mclr_calibrate_affine(calibration, eval_raw);
      ScoreMatrix eval_llr = to_llr_per_cluster(eval_affine, ctx.prep.view.clusters);

      // The MCLR system's output is its calibrated LLR vector; the other
      // back-ends feed fusion with their raw scores.
      ScoreMatrix dev_out =
          name == "gb_mclr" ? mclr_apply(calibration, dev_raw) : std::move(dev_raw);
      ScoreMatrix eval_out =
          name == "gb_mclr" ? mclr_apply(calibration, eval_raw) : std::move(eval_raw);

      write_score_tsv(dev_out, dev_path);
      write_marker(dev_path, h);
      write_score_tsv(eval_out, eval_path);
      write_marker(eval_path, h);
      write_score_tsv(eval_llr, eval_llr_path);
      write_marker(eval_llr_path, h);
    }

    out.dev.push_back(read_score_tsv(dev_path, fusion_kind));
    out.eval.push_back(read_score_tsv(eval_path, fusion_kind));
    out.eval_calibrated_llr.push_back(read_score_tsv(eval_llr_path, ScoreKind::llr));
    out.names.push_back(name);
  }
  return out;
}

FusionModel ensure_fusion(const ExperimentConfig &cfg, const RunOptions &opts,
                          const Paths &paths, const SubsystemScores &scores,
                          const std::vector<int> &dev_labels,
                          std::vector<double> *fold_ce) {
  std::uint64_t h = cfg.stage_hash("fusion");
  if (!lidk_cached(paths.fusion(), h, opts.force)) {
    info(opts, "fusion: training (" + std::to_string(scores.dev.size()) + " subsystems)");
    FusionTrainResult fused = fusion_train(scores.dev, dev_labels, cfg.fusion_folds);
    MetaMap meta{{"config_hash", hash_hex(h)}};
    std::ostringstream ce;
    for (double v : fused.fold_heldout_ce) ce << format_double(v) << " ";
    meta["fold_heldout_ce"] = ce.str();
    save_fusion(fused.model, paths.fusion(), meta);
    if (fold_ce != nullptr) *fold_ce = fused.fold_heldout_ce;
  }
  return load_fusion(paths.fusion());
}

}  // namespace

std::string stage_synth(const ExperimentConfig &cfg, const RunOptions &opts) {
  Paths paths(cfg);
  fs::create_directories(paths.root);
  return ensure_corpus(cfg, opts, paths);
}

std::string stage_features(const ExperimentConfig &cfg, const RunOptions &opts) {
  Prepared prep(cfg, opts);
  return prep.paths.features_index();
}

std::string stage_train_ubm(const ExperimentConfig &cfg, const RunOptions &opts) {
  Prepared prep(cfg, opts);
  ensure_ubm(cfg, opts, prep.paths, prep.view);
  return prep.paths.ubm();
}

std::string stage_stats(const ExperimentConfig &cfg, const RunOptions &opts) {
  Prepared prep(cfg, opts);
  GmmModel ubm = ensure_ubm(cfg, opts, prep.paths, prep.view);
  for (Split s : {Split::train, Split::dev, Split::eval}) {
    if (!prep.view.split(s).empty()) ensure_stats(cfg, opts, prep.paths, prep.view, s, ubm);
  }
  return prep.paths.stats(Split::train);
}

std::string stage_train_tv(const ExperimentConfig &cfg, const RunOptions &opts) {
  Prepared prep(cfg, opts);
  GmmModel ubm = ensure_ubm(cfg, opts, prep.paths, prep.view);
  StatsArchive train = ensure_stats(cfg, opts, prep.paths, prep.view, Split::train, ubm);
  ensure_tv(cfg, opts, prep.paths, train, ubm);
  return prep.paths.tv();
}

std::string stage_ivectors(const ExperimentConfig &cfg, const RunOptions &opts) {
  Prepared prep(cfg, opts);
  GmmModel ubm = ensure_ubm(cfg, opts, prep.paths, prep.view);
  StatsArchive train = ensure_stats(cfg, opts, prep.paths, prep.view, Split::train, ubm);
  TvModel tv = ensure_tv(cfg, opts, prep.paths, train, ubm);
  for (Split s : {Split::train, Split::dev, Split::eval}) {
    if (prep.view.split(s).empty()) continue;
    StatsArchive stats = ensure_stats(cfg, opts, prep.paths, prep.view, s, ubm);
    ensure_ivectors(cfg, opts, prep.paths, s, stats, tv, ubm);
  }
  return prep.paths.ivectors(Split::train);
}

std::string stage_train_backend(const ExperimentConfig &cfg, const RunOptions &opts,
                                const std::string &backend) {
  FullContext ctx(cfg, opts);
  BackendInputs in = ctx.inputs();
  train_backend_impl(cfg, opts, ctx.prep.paths, in, backend);
  return ctx.prep.paths.backend_model(backend);
}

std::string stage_fuse(const ExperimentConfig &cfg, const RunOptions &opts) {
  FullContext ctx(cfg, opts);
  SubsystemScores scores = score_all_backends(cfg, opts, ctx);
  Paths paths(cfg);
  ensure_fusion(cfg, opts, paths, scores, ctx.dev_labels, nullptr);
  return paths.fusion();
}

RunResult run_experiment(const ExperimentConfig &cfg, const RunOptions &opts) {
  cfg.validate();
  FullContext ctx(cfg, opts);
  Paths &paths = ctx.prep.paths;
  SubsystemScores scores = score_all_backends(cfg, opts, ctx);

  RunResult result;
  FusionModel fusion =
      ensure_fusion(cfg, opts, paths, scores, ctx.dev_labels, &result.fusion_fold_ce);

  std::uint64_t eval_hash = cfg.stage_hash("eval");
  std::string scores_path = paths.scores("eval_fused_llr");
  if (!marker_cached(scores_path, eval_hash, opts.force)) {
    info(opts, "eval: scoring the eval split");
    ScoreMatrix fused_eval = fusion_apply(fusion, scores.eval);
    ScoreMatrix fused_llr = to_llr_per_cluster(fused_eval, ctx.prep.view.clusters);
    write_score_tsv(fused_llr, scores_path);
    write_marker(scores_path, eval_hash);

    ScoreMatrix fused_dev = fusion_apply(fusion, scores.dev);
    ScoreMatrix dev_llr = to_llr_per_cluster(fused_dev, ctx.prep.view.clusters);
    write_score_tsv(dev_llr, paths.scores("dev_fused_llr"));
    write_marker(paths.scores("dev_fused_llr"), eval_hash);
  }

  ScoreMatrix fused_llr = read_score_tsv(scores_path, ScoreKind::llr);
  result.fused = evaluate(fused_llr, ctx.eval_labels, ctx.prep.view.clusters);
  result.scores_path = scores_path;

  std::ostringstream backends_table;
  backends_table << "backend\taccuracy\tcavg\tcllr\n";
  for (std::size_t s = 0; s < scores.names.size(); ++s) {
    const ScoreMatrix &llr = scores.eval_calibrated_llr[s];
    BackendEval be;
    be.name = scores.names[s];
    be.accuracy = accuracy(llr, ctx.eval_labels);
    be.cavg = compute_cavg(llr, ctx.eval_labels, ctx.prep.view.clusters).overall;
    be.cllr = compute_cllr(llr, ctx.eval_labels, ctx.prep.view.clusters);
    backends_table << be.name << '\t' << format_double(be.accuracy) << '\t'
                   << format_double(be.cavg) << '\t' << format_double(be.cllr) << '\n';
    result.backends.push_back(be);
  }

  if (!marker_cached(paths.report_txt(), eval_hash, opts.force)) {
    std::ofstream txt(paths.report_txt(), std::ios::binary);
    txt << report_text(result.fused);
    std::ofstream tsv(paths.report_tsv(), std::ios::binary);
    tsv << report_table(result.fused);
    std::ofstream bt(paths.backends_report(), std::ios::binary);
    bt << backends_table.str();
    std::ofstream conf(paths.confusion_txt(), std::ios::binary);
    conf << "true\\predicted";
    for (const auto &l : result.fused.language_order) conf << '\t' << l;
    conf << '\n';
    for (int i = 0; i < result.fused.confusion.rows(); ++i) {
      conf << result.fused.language_order[i];
      for (int j = 0; j < result.fused.confusion.cols(); ++j) {
        conf << '\t' << result.fused.confusion(i, j);
      }
      conf << '\n';
    }
    write_marker(paths.report_txt(), eval_hash);
  }
  result.report_path = paths.report_txt();

  std::ifstream skipped(paths.skipped_tsv());
  std::string line;
  while (std::getline(skipped, line)) {
    if (!line.empty()) result.skipped.push_back(line.substr(0, line.find('\t')));
  }
  return result;
}

ScoreCommandResult score_manifest(const ExperimentConfig &cfg, const RunOptions &opts,
                                  const std::string &manifest_path,
                                  const std::string &out_path) {
  Paths paths(cfg);
  for (const std::string &required :
       {paths.ubm(), paths.tv(), paths.normalizer(), paths.fusion(), paths.languages()}) {
    if (!fs::exists(required)) {
      throw DataError("score: missing model artifact " + required +
                      " (run the pipeline first)");
    }
  }
  GmmModel ubm = load_gmm(paths.ubm());
  TvModel tv = load_tv(paths.tv());
  Normalizer norm = load_normalizer(paths.normalizer());
  FusionModel fusion = load_fusion(paths.fusion());
  std::vector<std::string> languages = load_language_list(paths);

  CorpusView view = load_corpus_view(manifest_path, nullptr);
  TvExtractor extractor(tv, ubm);

  ScoreCommandResult result;
  std::vector<std::string> ok_ids;
  std::vector<BwStats> ok_stats;
  int n = static_cast<int>(view.records.size());
  std::vector<std::optional<BwStats>> stats(n);
  parallel_for(n, effective_jobs(cfg, opts), [&](int i) {
    try {
      AudioSignal sig = read_wav(view.records[i].audio_path);
      FeatureMatrix feat = sdc_mfcc_features(sig, cfg.frontend);
      // Quantize like the LIDF dump so scores match the run pipeline,
      // whose stats are always computed from the float32 feature files.
      feat.data = feat.data.cast<float>().cast<double>();
      stats[i] = accumulate_stats(ubm, feat);
    } catch (const Error &) {
      stats[i] = std::nullopt;
    }
  });
  for (int i = 0; i < n; ++i) {
    if (stats[i].has_value()) {
      ok_ids.push_back(view.records[i].utt_id);
      ok_stats.push_back(std::move(*stats[i]));
    } else {
      log_warn("score: skipping " + view.records[i].utt_id +
               " (front-end failure or too short)");
      result.skipped.push_back(view.records[i].utt_id);
    }
  }
  if (ok_ids.empty()) throw DataError("score: every utterance was skipped");

  Matrix norm_iv(ok_ids.size(), tv.rank);
  for (std::size_t i = 0; i < ok_ids.size(); ++i) {
    norm_iv.row(i) = apply_normalizer(norm, extractor.extract(ok_stats[i])).transpose();
  }

  StatsArchive stats_archive;
  stats_archive.utt_ids = ok_ids;
  stats_archive.stats = std::move(ok_stats);
  stats_archive.ubm_hash = ubm.param_hash();

  std::vector<ScoreMatrix> subsystem;
  for (const auto &name : cfg.backends.enabled) {
    ScoreMatrix raw =
        backend_scores(cfg, paths, languages, name, norm_iv, ok_ids, ubm, stats_archive);
    if (name == "gb_mclr") {
      MclrModel calibration = load_mclr(paths.backend_mclr(name));
      raw = mclr_apply(calibration, raw);
    }
    subsystem.push_back(std::move(raw));
  }
  ScoreMatrix fused = fusion_apply(fusion, subsystem);
  ScoreMatrix llr = to_llr_per_cluster(fused, view.clusters);
  write_score_tsv(llr, out_path);
  {
    std::ofstream f(out_path + ".skipped.tsv", std::ios::binary);
    for (const auto &utt : result.skipped) f << utt << "\tfront-end failure\n";
  }
  result.scores_path = out_path;
  return result;
}

EvalReport eval_scores(const std::string &scores_path, const std::string &manifest_path) {
  ScoreMatrix llr = read_score_tsv(scores_path, ScoreKind::llr);
  CorpusView view = load_corpus_view(manifest_path, nullptr);

  std::map<std::string, const UtteranceRecord *> by_id;
  for (const auto &r : view.records) by_id[r.utt_id] = &r;

  std::vector<int> labels(llr.utt_ids.size());
  for (std::size_t i = 0; i < llr.utt_ids.size(); ++i) {
    auto it = by_id.find(llr.utt_ids[i]);
    if (it == by_id.end()) {
      throw DataError("eval: utterance " + llr.utt_ids[i] + " not in manifest");
    }
    auto pos = std::find(llr.language_order.begin(), llr.language_order.end(),
                         it->second->language);
    if (pos == llr.language_order.end()) {
      throw DataError("eval: language " + it->second->language +
                      " missing from score columns");
    }
    labels[i] = static_cast<int>(pos - llr.language_order.begin());
  }
  return evaluate(llr, labels, view.clusters);
}

}  // namespace lidkit
