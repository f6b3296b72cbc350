// src/model_io.cpp

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

#include "lidkit/model_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include "lidkit/util.hpp"

namespace lidkit {

namespace {

constexpr std::uint32_t kContainerVersion = 1;

void put_u32(std::string &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const unsigned char *p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

void append_doubles_le(std::string &out, const double *data, std::size_t count) {
  // Assumes little-endian host floats (all supported targets).
  out.append(reinterpret_cast<const char *>(data), count * sizeof(double));
}

void check_token(const std::string &tok, const char *what) {
  if (tok.empty()) throw DataError(std::string("container: empty ") + what);
  for (char c : tok) {
    if (c == '\n' || c == '\t' || c == ' ') {
      throw DataError(std::string("container: whitespace in ") + what + ": " + tok);
    }
  }
}

}  // namespace

const Container::ArrayEntry &Container::array(const std::string &name) const {
  for (const auto &a : arrays) {
    if (a.name == name) return a;
  }
  throw DataError("container: missing array \"" + name + "\" in kind " + kind);
}

Matrix Container::matrix(const std::string &name) const {
  const auto &a = array(name);
  if (a.shape.size() != 2) throw DataError("container: array " + name + " is not 2-D");
  return a.data;
}

Vector Container::vector(const std::string &name) const {
  const auto &a = array(name);
  if (a.shape.size() != 1) throw DataError("container: array " + name + " is not 1-D");
  return a.data.col(0);
}

std::string Container::meta_value(const std::string &key) const {
  auto it = meta.find(key);
  if (it == meta.end()) throw DataError("container: missing meta key " + key);
  return it->second;
}

void ContainerWriter::set_meta(const std::string &key, const std::string &value) {
  check_token(key, "meta key");
  if (value.find('\n') != std::string::npos) {
    throw DataError("container: newline in meta value for " + key);
  }
  meta_.emplace_back(key, value);
}

void ContainerWriter::add_name(const std::string &name) {
  if (name.find('\n') != std::string::npos || name.find('\t') != std::string::npos) {
    throw DataError("container: tab or newline in name: " + name);
  }
  names_.push_back(name);
}

void ContainerWriter::add_names(const std::vector<std::string> &names) {
  for (const auto &n : names) add_name(n);
}

void ContainerWriter::add_vector(const std::string &name, const Vector &v) {
  check_token(name, "array name");
  Container::ArrayEntry e;
  e.name = name;
  e.shape = {static_cast<int>(v.size())};
  e.data = v;
  arrays_.push_back(std::move(e));
}

void ContainerWriter::add_matrix(const std::string &name, const Matrix &m) {
  check_token(name, "array name");
  Container::ArrayEntry e;
  e.name = name;
  e.shape = {static_cast<int>(m.rows()), static_cast<int>(m.cols())};
  e.data = m;
  arrays_.push_back(std::move(e));
}

void ContainerWriter::write(const std::string &path) const {
  check_token(kind_, "kind");
  std::ostringstream header;
  header << "kind " << kind_ << "\n";
  for (const auto &[key, value] : meta_) header << "meta " << key << " " << value << "\n";
  for (const auto &name : names_) header << "name " << name << "\n";
  for (const auto &a : arrays_) {
    header << "array " << a.name;
    for (int d : a.shape) header << " " << d;
    header << "\n";
  }
  std::string header_text = header.str();

  std::string out;
  out.append("LIDK");
  put_u32(out, kContainerVersion);
  put_u32(out, static_cast<std::uint32_t>(header_text.size()));
  out += header_text;
  for (const auto &a : arrays_) {
    if (a.shape.size() == 1) {
      append_doubles_le(out, a.data.data(), a.data.rows());
    } else {
      // Row-major payload regardless of Eigen's internal layout.
      for (Eigen::Index r = 0; r < a.data.rows(); ++r) {
        Eigen::RowVectorXd row = a.data.row(r);
        append_doubles_le(out, row.data(), row.size());
      }
    }
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write model: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("short write: " + path);
}

Container load_container(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12) throw DataError("container truncated before header: " + path);
  const auto *p = reinterpret_cast<const unsigned char *>(bytes.data());
  if (std::memcmp(p, "LIDK", 4) != 0) throw DataError("bad magic in " + path);
  std::uint32_t version = get_u32(p + 4);
  if (version != kContainerVersion) {
    throw DataError("unsupported container version " + std::to_string(version) + " in " +
                    path);
  }
  std::uint32_t header_len = get_u32(p + 8);
  if (12 + static_cast<std::size_t>(header_len) > bytes.size()) {
    throw DataError("container header truncated: " + path);
  }

  Container c;
  std::istringstream header(bytes.substr(12, header_len));
  std::string line;
  std::size_t payload_doubles = 0;
  while (std::getline(header, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "kind") {
      ls >> c.kind;
    } else if (tag == "meta") {
      std::string key;
      ls >> key;
      std::string value;
      std::getline(ls, value);
      if (!value.empty() && value[0] == ' ') value.erase(0, 1);
      c.meta[key] = value;
    } else if (tag == "name") {
      std::string value;
      std::getline(ls, value);
      if (!value.empty() && value[0] == ' ') value.erase(0, 1);
      c.names.push_back(value);
    } else if (tag == "array") {
      Container::ArrayEntry e;
      ls >> e.name;
      int d;
      while (ls >> d) {
        if (d < 0) throw DataError("container: negative dimension in " + path);
        e.shape.push_back(d);
      }
      if (e.shape.empty() || e.shape.size() > 2) {
        throw DataError("container: bad array declaration in " + path);
      }
      payload_doubles += static_cast<std::size_t>(e.shape[0]) *
                         (e.shape.size() == 2 ? e.shape[1] : 1);
      c.arrays.push_back(std::move(e));
    } else {
      throw DataError("container: unknown header tag \"" + tag + "\" in " + path);
    }
  }
  if (c.kind.empty()) throw DataError("container: missing kind in " + path);

  std::size_t payload_offset = 12 + header_len;
  if (payload_offset + payload_doubles * sizeof(double) > bytes.size()) {
    throw DataError("container payload truncated: " + path + " (declared " +
                    std::to_string(payload_doubles * sizeof(double)) + " bytes, have " +
                    std::to_string(bytes.size() - payload_offset) + ")");
  }

  const char *cursor = bytes.data() + payload_offset;
  for (auto &a : c.arrays) {
    int rows = a.shape[0];
    int cols = a.shape.size() == 2 ? a.shape[1] : 1;
    a.data = Matrix(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int col = 0; col < cols; ++col) {
        double v;
        std::memcpy(&v, cursor, sizeof(double));
        cursor += sizeof(double);
        a.data(r, col) = v;
      }
    }
  }
  return c;
}

std::string peek_kind(const std::string &path) { return load_container(path).kind; }

// ---------------------------------------------------------------------------
// Per-model adapters.

void save_gmm(const GmmModel &model, const std::string &path, const MetaMap &meta) {
  ContainerWriter w(model.covariance_kind == CovKind::diagonal ? "gmm_diag" : "gmm_full");
  for (const auto &[k, v] : meta) w.set_meta(k, v);
  w.add_vector("weights", model.weights);
  w.add_matrix("means", model.means);
  if (model.covariance_kind == CovKind::diagonal) {
    w.add_matrix("vars", model.diag_vars);
  } else {
    int K = model.num_components(), F = model.dim();
    Matrix stacked(static_cast<Eigen::Index>(K) * F, F);
    for (int k = 0; k < K; ++k) {
      stacked.middleRows(static_cast<Eigen::Index>(k) * F, F) = model.full_covs[k];
    }
    w.add_matrix("covs", stacked);
  }
  w.write(path);
}

GmmModel load_gmm(const Container &c) {
  GmmModel model;
  if (c.kind == "gmm_diag") {
    model.covariance_kind = CovKind::diagonal;
  } else if (c.kind == "gmm_full") {
    model.covariance_kind = CovKind::full;
  } else {
    throw DataError("expected a GMM container, found kind " + c.kind);
  }
  model.weights = c.vector("weights");
  model.means = c.matrix("means");
  int K = model.num_components(), F = model.dim();
  if (model.covariance_kind == CovKind::diagonal) {
    model.diag_vars = c.matrix("vars");
  } else {
    Matrix stacked = c.matrix("covs");
    if (stacked.rows() != static_cast<Eigen::Index>(K) * F) {
      throw DataError("gmm container: bad covariance stack shape");
    }
    model.full_covs.resize(K);
    for (int k = 0; k < K; ++k) {
      model.full_covs[k] = stacked.middleRows(static_cast<Eigen::Index>(k) * F, F);
    }
  }
  return model;
}

GmmModel load_gmm(const std::string &path) { return load_gmm(load_container(path)); }

void save_tv(const TvModel &model, const std::string &path, const MetaMap &meta) {
  ContainerWriter w("tv");
  for (const auto &[k, v] : meta) w.set_meta(k, v);
  w.set_meta("rank", std::to_string(model.rank));
  w.set_meta("ubm_hash", std::to_string(model.ubm_hash));
  w.add_matrix("T", model.T);
  w.add_vector("bias", model.bias);
  w.write(path);
}

TvModel load_tv(const Container &c) {
  if (c.kind != "tv") throw DataError("expected a tv container, found kind " + c.kind);
  TvModel model;
  model.T = c.matrix("T");
  model.bias = c.vector("bias");
  model.rank = std::stoi(c.meta_value("rank"));
  model.ubm_hash = std::stoull(c.meta_value("ubm_hash"));
  return model;
}

TvModel load_tv(const std::string &path) { return load_tv(load_container(path)); }

void save_normalizer(const Normalizer &norm, const std::string &path, const MetaMap &meta) {
  ContainerWriter w("normalizer");
  for (const auto &[k, v] : meta) w.set_meta(k, v);
  w.set_meta("norm_kind", norm.kind == NormKind::whiten ? "whiten" : "efr");
  w.set_meta("iterations", std::to_string(norm.iterations));
  w.set_meta("length_norm", norm.length_norm ? "1" : "0");
  w.add_vector("mean", norm.mean);
  w.add_matrix("transform", norm.transform);
  w.write(path);
}

Normalizer load_normalizer(const Container &c) {
  if (c.kind != "normalizer") {
    throw DataError("expected a normalizer container, found kind " + c.kind);
  }
  Normalizer norm;
  std::string kind = c.meta_value("norm_kind");
  if (kind == "whiten") {
    norm.kind = NormKind::whiten;
  } else if (kind == "efr") {
    norm.kind = NormKind::efr;
  } else {
    throw DataError("normalizer container: unknown kind " + kind);
  }
  norm.iterations = std::stoi(c.meta_value("iterations"));
  norm.length_norm = c.meta_value("length_norm") == "1";
  norm.mean = c.vector("mean");
  norm.transform = c.matrix("transform");
  return norm;
}

Normalizer load_normalizer(const std::string &path) {
  return load_normalizer(load_container(path));
}

void save_gaussian_backend(const GaussianBackend &model, const std::string &path,
                           const MetaMap &meta) {
  ContainerWriter w("gaussian_backend");
  for (const auto &[k, v] : meta) w.set_meta(k, v);
  w.add_names(model.language_order);
  Vector gamma(1);
  gamma(0) = model.gamma;
  w.add_vector("gamma", gamma);
  w.add_matrix("means", model.means);
  w.add_matrix("sigma_global", model.sigma_global);
  int L = static_cast<int>(model.language_order.size());
  int r = static_cast<int>(model.means.cols());
  Matrix stacked(static_cast<Eigen::Index>(L) * r, r);
  for (int l = 0; l < L; ++l) {
    stacked.middleRows(static_cast<Eigen::Index>(l) * r, r) = model.sigma_smoothed[l];
  }
  w.add_matrix("sigma_smoothed", stacked);
  w.write(path);
}

GaussianBackend load_gaussian_backend(const Container &c) {
  if (c.kind != "gaussian_backend") {
    throw DataError("expected a gaussian_backend container, found kind " + c.kind);
  }
  GaussianBackend model;
  model.language_order = c.names;
  model.gamma = c.vector("gamma")(0);
  model.means = c.matrix("means");
  model.sigma_global = c.matrix("sigma_global");
  Matrix stacked = c.matrix("sigma_smoothed");
  int L = static_cast<int>(model.language_order.size());
  int r = static_cast<int>(model.means.cols());
  if (stacked.rows() != static_cast<Eigen::Index>(L) * r) {
    throw DataError("gaussian_backend container: bad covariance stack shape");
  }
  model.sigma_smoothed.resize(L);
  for (int l = 0; l < L; ++l) {
    model.sigma_smoothed[l] = stacked.middleRows(static_cast<Eigen::Index>(l) * r, r);
  }
  return model;
}

GaussianBackend load_gaussian_backend(const std::string &path) {
  return load_gaussian_backend(load_container(path));
}

void save_mclr(const MclrModel &model, const std::string &path, const MetaMap &meta) {
  ContainerWriter w("mclr");
  for (const auto &[k, v] : meta) w.set_meta(k, v);
  Vector alpha(1);
  alpha(0) = model.alpha;
  w.add_vector("alpha", alpha);
  w.add_vector("beta", model.beta);
  w.write(path);
}

MclrModel load_mclr(const Container &c) {
  if (c.kind != "mclr") throw DataError("expected an mclr container, found kind " + c.kind);
  MclrModel model;
  model.alpha = c.vector("alpha")(0);
  model.beta = c.vector("beta");
  return model;
}

MclrModel load_mclr(const std::string &path) { return load_mclr(load_container(path)); }

void save_plda(const PldaModel &model, const std::string &path, const MetaMap &meta) {
  ContainerWriter w("plda");
  for (const auto &[k, v] : meta) w.set_meta(k, v);
  w.add_vector("mu", model.mu);
  w.add_matrix("subspace", model.subspace);
  w.add_matrix("sigma_w", model.sigma_w);
  w.write(path);
}

PldaModel load_plda(const Container &c) {
  if (c.kind != "plda") throw DataError("expected a plda container, found kind " + c.kind);
  PldaModel model;
  model.mu = c.vector("mu");
  model.subspace = c.matrix("subspace");
  model.sigma_w = c.matrix("sigma_w");
  return model;
}

PldaModel load_plda(const std::string &path) { return load_plda(load_container(path)); }

void save_svm(const SvmSet &model, const std::string &path, const MetaMap &meta) {
  ContainerWriter w("svm_set");
  for (const auto &[k, v] : meta) w.set_meta(k, v);
  w.add_names(model.language_order);
  int P = static_cast<int>(model.classifiers.size());
  int d = P > 0 ? static_cast<int>(model.classifiers[0].weight.size()) : 0;
  Matrix weights(P, d);
  Vector biases(P);
  Matrix pairs(P, 2);
  for (int i = 0; i < P; ++i) {
    weights.row(i) = model.classifiers[i].weight.transpose();
    biases(i) = model.classifiers[i].bias;
    pairs(i, 0) = model.classifiers[i].lang_a;
    pairs(i, 1) = model.classifiers[i].lang_b;
  }
  Vector c_reg(1);
  c_reg(0) = model.regularization;
  w.add_vector("C", c_reg);
  w.add_matrix("weights", weights);
  w.add_vector("biases", biases);
  w.add_matrix("pairs", pairs);
  w.write(path);
}

SvmSet load_svm(const Container &c) {
  if (c.kind != "svm_set") throw DataError("expected an svm_set container, found kind " + c.kind);
  SvmSet model;
  model.language_order = c.names;
  model.regularization = c.vector("C")(0);
  Matrix weights = c.matrix("weights");
  Vector biases = c.vector("biases");
  Matrix pairs = c.matrix("pairs");
  for (int i = 0; i < weights.rows(); ++i) {
    SvmSet::PairClassifier clf;
    clf.weight = weights.row(i).transpose();
    clf.bias = biases(i);
    clf.lang_a = static_cast<int>(pairs(i, 0));
    clf.lang_b = static_cast<int>(pairs(i, 1));
    model.classifiers.push_back(std::move(clf));
  }
  return model;
}

SvmSet load_svm(const std::string &path) { return load_svm(load_container(path)); }

void save_pairnet(const PairNet &net, const std::string &path, const MetaMap &meta) {
  ContainerWriter w("pairnet");
  for (const auto &[k, v] : meta) w.set_meta(k, v);
  w.set_meta("n_hidden", std::to_string(net.hidden_w.size()));
  w.set_meta("has_final", net.has_final() ? "1" : "0");
  for (std::size_t j = 0; j < net.hidden_w.size(); ++j) {
    w.add_matrix("W" + std::to_string(j), net.hidden_w[j]);
    w.add_vector("b" + std::to_string(j), net.hidden_b[j]);
  }
  if (net.has_final()) {
    w.add_matrix("final_w", net.final_w);
    w.add_vector("final_b", net.final_b);
  }
  Vector logit(2);
  logit(0) = net.logit_scale;
  logit(1) = net.logit_offset;
  w.add_vector("logit", logit);
  w.write(path);
}

PairNet load_pairnet(const Container &c) {
  if (c.kind != "pairnet") throw DataError("expected a pairnet container, found kind " + c.kind);
  PairNet net;
  int n_hidden = std::stoi(c.meta_value("n_hidden"));
  for (int j = 0; j < n_hidden; ++j) {
    net.hidden_w.push_back(c.matrix("W" + std::to_string(j)));
    net.hidden_b.push_back(c.vector("b" + std::to_string(j)));
  }
  if (c.meta_value("has_final") == "1") {
    net.final_w = c.matrix("final_w");
    net.final_b = c.vector("final_b");
  }
  Vector logit = c.vector("logit");
  net.logit_scale = logit(0);
  net.logit_offset = logit(1);
  return net;
}

PairNet load_pairnet(const std::string &path) { return load_pairnet(load_container(path)); }

void save_fusion(const FusionModel &model, const std::string &path, const MetaMap &meta) {
  ContainerWriter w("fusion");
  for (const auto &[k, v] : meta) w.set_meta(k, v);
  w.add_vector("weights", model.weights);
  w.add_vector("beta", model.beta);
  w.write(path);
}

FusionModel load_fusion(const Container &c) {
  if (c.kind != "fusion") throw DataError("expected a fusion container, found kind " + c.kind);
  FusionModel model;
  model.weights = c.vector("weights");
  model.beta = c.vector("beta");
  return model;
}

FusionModel load_fusion(const std::string &path) { return load_fusion(load_container(path)); }

void save_vector_archive(const VectorArchive &archive, const std::string &kind,
                         const std::string &path, const MetaMap &meta) {
  if (archive.rows.rows() != static_cast<Eigen::Index>(archive.utt_ids.size())) {
    throw DataError("vector archive: id/row mismatch");
  }
  ContainerWriter w(kind);
  for (const auto &[k, v] : meta) w.set_meta(k, v);
  w.add_names(archive.utt_ids);
  w.add_matrix("rows", archive.rows);
  w.write(path);
}

VectorArchive load_vector_archive(const std::string &path, const std::string &kind) {
  Container c = load_container(path);
  if (c.kind != kind) {
    throw DataError("expected a " + kind + " container, found kind " + c.kind);
  }
  VectorArchive archive;
  archive.utt_ids = c.names;
  archive.rows = c.matrix("rows");
  if (archive.rows.rows() != static_cast<Eigen::Index>(archive.utt_ids.size())) {
    throw DataError("vector archive: id/row mismatch in " + path);
  }
  return archive;
}

void save_stats_archive(const StatsArchive &archive, const std::string &path,
                        const MetaMap &meta) {
  if (archive.stats.size() != archive.utt_ids.size()) {
    throw DataError("stats archive: id/stats mismatch");
  }
  if (archive.stats.empty()) throw DataError("stats archive: empty");
  int K = static_cast<int>(archive.stats[0].n.size());
  int F = static_cast<int>(archive.stats[0].f.cols());
  int U = static_cast<int>(archive.stats.size());
  Matrix n(U, K);
  Matrix f(U, static_cast<Eigen::Index>(K) * F);
  Vector frames(U);
  for (int u = 0; u < U; ++u) {
    const BwStats &st = archive.stats[u];
    if (st.n.size() != K || st.f.rows() != K || st.f.cols() != F) {
      throw DataError("stats archive: inconsistent stats shapes");
    }
    n.row(u) = st.n.transpose();
    for (int k = 0; k < K; ++k) {
      f.block(u, static_cast<Eigen::Index>(k) * F, 1, F) = st.f.row(k);
    }
    frames(u) = static_cast<double>(st.frames_total);
  }
  ContainerWriter w("bw_stats_archive");
  for (const auto &[k, v] : meta) w.set_meta(k, v);
  w.set_meta("K", std::to_string(K));
  w.set_meta("F", std::to_string(F));
  w.set_meta("ubm_hash", std::to_string(archive.ubm_hash));
  w.add_names(archive.utt_ids);
  w.add_matrix("n", n);
  w.add_matrix("f", f);
  w.add_vector("frames", frames);
  w.write(path);
}

StatsArchive load_stats_archive(const std::string &path) {
  Container c = load_container(path);
  if (c.kind != "bw_stats_archive") {
    throw DataError("expected a bw_stats_archive container, found kind " + c.kind);
  }
  StatsArchive archive;
  archive.utt_ids = c.names;
  archive.ubm_hash = std::stoull(c.meta_value("ubm_hash"));
  int K = std::stoi(c.meta_value("K"));
  int F = std::stoi(c.meta_value("F"));
  Matrix n = c.matrix("n");
  Matrix f = c.matrix("f");
  Vector frames = c.vector("frames");
  int U = static_cast<int>(archive.utt_ids.size());
  if (n.rows() != U || f.rows() != U || frames.size() != U) {
    throw DataError("stats archive: inconsistent shapes in " + path);
  }
  archive.stats.resize(U);
  for (int u = 0; u < U; ++u) {
    BwStats st;
    st.n = n.row(u).transpose();
    st.f = Matrix(K, F);
    for (int k = 0; k < K; ++k) {
      st.f.row(k) = f.block(u, static_cast<Eigen::Index>(k) * F, 1, F);
    }
    st.frames_total = static_cast<std::int64_t>(frames(u));
    archive.stats[u] = std::move(st);
  }
  return archive;
}

void write_feature_dump(const FeatureMatrix &feat, const std::string &path) {
  feat.validate();
  std::string out;
  out.append("LIDF");
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(feat.frames()));
  put_u32(out, static_cast<std::uint32_t>(feat.dims()));
  for (int t = 0; t < feat.frames(); ++t) {
    for (int d = 0; d < feat.dims(); ++d) {
      float v = static_cast<float>(feat.data(t, d));
      out.append(reinterpret_cast<const char *>(&v), sizeof(float));
    }
  }
  for (int t = 0; t < feat.frames(); ++t) {
    out.push_back(static_cast<char>(feat.mask[t] ? 1 : 0));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write features: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("short write: " + path);
}

FeatureMatrix read_feature_dump(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open features: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16) throw DataError("feature dump truncated: " + path);
  const auto *p = reinterpret_cast<const unsigned char *>(bytes.data());
  if (std::memcmp(p, "LIDF", 4) != 0) throw DataError("bad magic in " + path);
  if (get_u32(p + 4) != 1) throw DataError("unsupported feature dump version in " + path);
  std::uint32_t frames = get_u32(p + 8);
  std::uint32_t dims = get_u32(p + 12);
  std::size_t need = 16 + static_cast<std::size_t>(frames) * dims * 4 + frames;
  if (bytes.size() < need) throw DataError("feature dump truncated: " + path);

  FeatureMatrix feat;
  feat.data = Matrix(frames, dims);
  const char *cursor = bytes.data() + 16;
  for (std::uint32_t t = 0; t < frames; ++t) {
    for (std::uint32_t d = 0; d < dims; ++d) {
      float v;
      std::memcpy(&v, cursor, sizeof(float));
      cursor += sizeof(float);
      feat.data(t, d) = v;
    }
  }
  feat.mask.resize(frames);
  for (std::uint32_t t = 0; t < frames; ++t) feat.mask[t] = *cursor++ ? 1 : 0;
  return feat;
}

}  // namespace lidkit
