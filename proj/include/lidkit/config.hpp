// lidkit/config.hpp

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

#ifndef LIDKIT_CONFIG_HPP_
#define LIDKIT_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lidkit/frontend.hpp"
#include "lidkit/synth.hpp"
#include "lidkit/tv.hpp"

namespace lidkit {

// Flat structured text: [section] headers, key = value lines, # comments.
class IniFile {
 public:
  static IniFile parse_file(const std::string &path);
  static IniFile parse_string(const std::string &text, const std::string &origin);

  bool has(const std::string &section, const std::string &key) const;
  std::string get(const std::string &section, const std::string &key,
                  const std::string &fallback) const;
  std::string require(const std::string &section, const std::string &key) const;
  int get_int(const std::string &section, const std::string &key, int fallback) const;
  double get_double(const std::string &section, const std::string &key,
                    double fallback) const;
  bool get_bool(const std::string &section, const std::string &key, bool fallback) const;

  // Canonical "key=value" lines of one section, for stage cache hashing.
  std::string section_text(const std::string &section) const;
  bool has_section(const std::string &section) const;

 private:
  // section -> ordered key/value pairs
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections_;
  std::string origin_;
};

struct BackendSettings {
  std::vector<std::string> enabled;  // gb_mclr, plda, svm, pairnet, tandem_svm
  double gb_gamma = 0.1;
  int plda_rank = 10;
  int plda_iters = 10;
  double plda_min_duration_s = 1.0;
  double svm_c = 1.0;
  int svm_epochs = 200;
  std::vector<int> pairnet_hidden = {256};
  int pairnet_embedding = 64;
  int pairnet_epochs = 150;
  double pairnet_lr = 0.5;
  int pairnet_rounds = 35;
  bool pairnet_balance = true;
  double tandem_relevance = 16.0;
};

struct ExperimentConfig {
  // corpus
  bool synth_enabled = true;
  SynthSpec synth;
  std::string manifest_path;  // empty when synthesized

  // frontend
  FrontendConfig frontend;

  // ubm
  int ubm_size = 64;
  CovKind ubm_kind = CovKind::diagonal;
  int ubm_iters = 8;
  double ubm_var_floor = 1e-3;
  int ubm_max_frames = 200000;

  // tv
  int tv_rank = 50;
  int tv_iters = 8;

  // normalizer
  NormKind norm_kind = NormKind::whiten;
  int norm_iterations = 1;
  bool norm_length = true;

  BackendSettings backends;

  int fusion_folds = 2;

  std::uint64_t seed = 7;
  std::string output_dir = "out";
  int jobs = 0;  // 0 = logical cores

  static ExperimentConfig from_ini(const IniFile &ini);
  static ExperimentConfig from_file(const std::string &path);
  void validate() const;

  // Chained stage cache keys: each stage covers its own settings plus
  // everything upstream.
  std::uint64_t stage_hash(const std::string &stage) const;
};

}  // namespace lidkit

#endif  // LIDKIT_CONFIG_HPP_
