// lidkit/model_io.hpp

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

#ifndef LIDKIT_MODEL_IO_HPP_
#define LIDKIT_MODEL_IO_HPP_

#include <map>
#include <string>
#include <vector>

#include "lidkit/fusion.hpp"
#include "lidkit/gaussian_backend.hpp"
#include "lidkit/gmm.hpp"
#include "lidkit/mclr.hpp"
#include "lidkit/pairnet.hpp"
#include "lidkit/plda.hpp"
#include "lidkit/svm.hpp"
#include "lidkit/tv.hpp"
#include "lidkit/types.hpp"

namespace lidkit {

// Binary container: magic `LIDK`, u32 version, u32 header length, a
// structured-text header (kind, meta lines, a name list and array shape
// declarations), then float64 little-endian payload arrays in declared
// order. Numeric fields round-trip bit-exactly.
struct Container {
  struct ArrayEntry {
    std::string name;
    std::vector<int> shape;  // 1 or 2 dims
    Matrix data;             // vectors stored as n x 1
  };

  std::string kind;
  std::map<std::string, std::string> meta;
  std::vector<std::string> names;
  std::vector<ArrayEntry> arrays;

  const ArrayEntry &array(const std::string &name) const;
  Matrix matrix(const std::string &name) const;
  Vector vector(const std::string &name) const;
  std::string meta_value(const std::string &key) const;
  bool has_meta(const std::string &key) const { return meta.count(key) > 0; }
};

class ContainerWriter {
 public:
  explicit ContainerWriter(std::string kind) : kind_(std::move(kind)) {}

  void set_meta(const std::string &key, const std::string &value);
  void add_name(const std::string &name);
  void add_names(const std::vector<std::string> &names);
  void add_vector(const std::string &name, const Vector &v);
  void add_matrix(const std::string &name, const Matrix &m);
  void write(const std::string &path) const;

 private:
  std::string kind_;
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::string> names_;
  std::vector<Container::ArrayEntry> arrays_;
};

Container load_container(const std::string &path);

// Kind of the container at `path` without loading the payload.
std::string peek_kind(const std::string &path);

using MetaMap = std::map<std::string, std::string>;

void save_gmm(const GmmModel &model, const std::string &path, const MetaMap &meta = {});
GmmModel load_gmm(const Container &c);
GmmModel load_gmm(const std::string &path);

void save_tv(const TvModel &model, const std::string &path, const MetaMap &meta = {});
TvModel load_tv(const Container &c);
TvModel load_tv(const std::string &path);

void save_normalizer(const Normalizer &norm, const std::string &path,
                     const MetaMap &meta = {});
Normalizer load_normalizer(const Container &c);
Normalizer load_normalizer(const std::string &path);

void save_gaussian_backend(const GaussianBackend &model, const std::string &path,
                           const MetaMap &meta = {});
GaussianBackend load_gaussian_backend(const Container &c);
GaussianBackend load_gaussian_backend(const std::string &path);

void save_mclr(const MclrModel &model, const std::string &path, const MetaMap &meta = {});
MclrModel load_mclr(const Container &c);
MclrModel load_mclr(const std::string &path);

void save_plda(const PldaModel &model, const std::string &path, const MetaMap &meta = {});
PldaModel load_plda(const Container &c);
PldaModel load_plda(const std::string &path);

void save_svm(const SvmSet &model, const std::string &path, const MetaMap &meta = {});
SvmSet load_svm(const Container &c);
SvmSet load_svm(const std::string &path);

void save_pairnet(const PairNet &net, const std::string &path, const MetaMap &meta = {});
PairNet load_pairnet(const Container &c);
PairNet load_pairnet(const std::string &path);

void save_fusion(const FusionModel &model, const std::string &path,
                 const MetaMap &meta = {});
FusionModel load_fusion(const Container &c);
FusionModel load_fusion(const std::string &path);

// utt_id-keyed matrices (i-vectors, centroids and the like).
struct VectorArchive {
  std::vector<std::string> utt_ids;
  Matrix rows;
};
void save_vector_archive(const VectorArchive &archive, const std::string &kind,
                         const std::string &path, const MetaMap &meta = {});
VectorArchive load_vector_archive(const std::string &path, const std::string &kind);

// Baum-Welch statistics for a set of utterances.
struct StatsArchive {
  std::vector<std::string> utt_ids;
  std::vector<BwStats> stats;
  std::uint64_t ubm_hash = 0;
};
void save_stats_archive(const StatsArchive &archive, const std::string &path,
                        const MetaMap &meta = {});
StatsArchive load_stats_archive(const std::string &path);

// Feature dump: magic `LIDF`, u32 version, u32 frames, u32 dims,
// frames x dims float32 little-endian row-major, then one mask byte per
// frame.
void write_feature_dump(const FeatureMatrix &feat, const std::string &path);
FeatureMatrix read_feature_dump(const std::string &path);

}  // namespace lidkit

#endif  // LIDKIT_MODEL_IO_HPP_
