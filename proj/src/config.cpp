// src/config.cpp

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

#include "lidkit/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "lidkit/util.hpp"

namespace lidkit {

namespace {

std::string trim(const std::string &s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string &s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

IniFile IniFile::parse_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_string(text, path);
}

IniFile IniFile::parse_string(const std::string &text, const std::string &origin) {
  IniFile ini;
  ini.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": unterminated section");
      }
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) {
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty section name");
      }
      ini.sections_[section];
      continue;
    }
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    if (section.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": key outside any section");
    }
    ini.sections_[section].emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return ini;
}

bool IniFile::has_section(const std::string &section) const {
  return sections_.count(section) > 0;
}

bool IniFile::has(const std::string &section, const std::string &key) const {
  auto it = sections_.find(section);
  if (it == sections_.end()) return false;
  for (const auto &[k, v] : it->second) {
    if (k == key) return true;
  }
  return false;
}

std::string IniFile::get(const std::string &section, const std::string &key,
                         const std::string &fallback) const {
  auto it = sections_.find(section);
  if (it == sections_.end()) return fallback;
  // Last assignment wins.
  std::string value = fallback;
  for (const auto &[k, v] : it->second) {
    if (k == key) value = v;
  }
  return value;
}

std::string IniFile::require(const std::string &section, const std::string &key) const {
  if (!has(section, key)) {
    throw ConfigError(origin_ + ": missing required key " + section + "." + key);
  }
  return get(section, key, "");
}

int IniFile::get_int(const std::string &section, const std::string &key, int fallback) const {
  if (!has(section, key)) return fallback;
  std::string v = get(section, key, "");
  try {
    return std::stoi(v);
  } catch (const std::exception &) {
    throw ConfigError("bad integer for " + section + "." + key + ": " + v);
  }
}

double IniFile::get_double(const std::string &section, const std::string &key,
                           double fallback) const {
  if (!has(section, key)) return fallback;
  std::string v = get(section, key, "");
  try {
    return std::stod(v);
  } catch (const std::exception &) {
    throw ConfigError("bad number for " + section + "." + key + ": " + v);
  }
}

bool IniFile::get_bool(const std::string &section, const std::string &key,
                       bool fallback) const {
  if (!has(section, key)) return fallback;
  std::string v = get(section, key, "");
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("bad boolean for " + section + "." + key + ": " + v);
}

std::string IniFile::section_text(const std::string &section) const {
  auto it = sections_.find(section);
  if (it == sections_.end()) return "";
  std::ostringstream out;
  for (const auto &[k, v] : it->second) out << k << "=" << v << "\n";
  return out.str();
}

ExperimentConfig ExperimentConfig::from_file(const std::string &path) {
  return from_ini(IniFile::parse_file(path));
}

ExperimentConfig ExperimentConfig::from_ini(const IniFile &ini) {
  ExperimentConfig cfg;

  cfg.manifest_path = ini.get("corpus", "manifest", "");
  cfg.synth_enabled = cfg.manifest_path.empty();
  cfg.synth.n_languages = ini.get_int("corpus", "n_languages", cfg.synth.n_languages);
  cfg.synth.languages_per_cluster =
      ini.get_int("corpus", "languages_per_cluster", cfg.synth.languages_per_cluster);
  cfg.synth.utterances_per_language[Split::train] =
      ini.get_int("corpus", "train_per_language", 10);
  cfg.synth.utterances_per_language[Split::dev] =
      ini.get_int("corpus", "dev_per_language", 4);
  cfg.synth.utterances_per_language[Split::eval] =
      ini.get_int("corpus", "eval_per_language", 4);
  cfg.synth.duration_min_s = ini.get_double("corpus", "duration_min_s", 3.0);
  cfg.synth.duration_max_s = ini.get_double("corpus", "duration_max_s", 10.0);
  cfg.synth.sample_rate_hz = ini.get_int("corpus", "sample_rate_hz", 8000);

  cfg.frontend.frame.window_ms = ini.get_double("frontend", "window_ms", 20.0);
  cfg.frontend.frame.hop_ms = ini.get_double("frontend", "hop_ms", 10.0);
  cfg.frontend.mfcc.n_filters = ini.get_int("frontend", "n_filters", 24);
  cfg.frontend.mfcc.n_ceps = ini.get_int("frontend", "n_ceps", 7);
  cfg.frontend.mfcc.include_energy = ini.get_bool("frontend", "include_energy", false);
  cfg.frontend.mfcc.preemphasis = ini.get_double("frontend", "preemphasis", 0.97);
  cfg.frontend.sdc.N = ini.get_int("frontend", "sdc_n", 7);
  cfg.frontend.sdc.d = ini.get_int("frontend", "sdc_d", 1);
  cfg.frontend.sdc.P = ini.get_int("frontend", "sdc_p", 3);
  cfg.frontend.sdc.k = ini.get_int("frontend", "sdc_k", 7);
  std::string vad_mode = ini.get("frontend", "vad_mode", "energy_threshold");
  if (vad_mode == "energy_threshold") {
    cfg.frontend.vad.mode = VadMode::energy_threshold;
  } else if (vad_mode == "snr_estimate") {
    cfg.frontend.vad.mode = VadMode::snr_estimate;
  } else {
    throw ConfigError("unknown vad_mode: " + vad_mode);
  }
  cfg.frontend.vad.margin_db = ini.get_double("frontend", "vad_margin_db", 30.0);
  cfg.frontend.vad.context_ratio = ini.get_double("frontend", "context_ratio", 0.7);
  std::string cmvn_scope = ini.get("frontend", "cmvn", "per_utterance");
  if (cmvn_scope == "per_utterance") {
    cfg.frontend.cmvn_scope = CmvnScope::per_utterance;
  } else if (cmvn_scope == "sliding") {
    cfg.frontend.cmvn_scope = CmvnScope::sliding;
  } else {
    throw ConfigError("unknown cmvn scope: " + cmvn_scope);
  }
  cfg.frontend.cmvn_window_s = ini.get_double("frontend", "cmvn_window_s", 3.0);
  cfg.frontend.warp_window_frames = ini.get_int("frontend", "warp_window", 301);
  cfg.frontend.apply_warp = ini.get_bool("frontend", "feature_warp", true);

  // Extractor preset fills ubm/tv/normalizer defaults; explicit keys override.
  std::string preset_tag = ini.get("tv", "preset", "");
  if (!preset_tag.empty()) {
    ExtractorPreset preset =
        extractor_preset(preset_tag, ini.get_bool("tv", "desk_scale", true));
    cfg.ubm_size = preset.ubm_size;
    cfg.ubm_kind = preset.ubm_kind;
    cfg.tv_rank = preset.tv_rank;
    cfg.norm_kind = preset.norm_kind;
    cfg.norm_iterations = preset.norm_iterations;
    cfg.norm_length = preset.length_norm;
    cfg.frontend.cmvn_scope = preset.cmvn_scope;
    if (preset.cmvn_window_s > 0.0) cfg.frontend.cmvn_window_s = preset.cmvn_window_s;
  }

  cfg.ubm_size = ini.get_int("ubm", "K", cfg.ubm_size);
  std::string cov = ini.get("ubm", "covariance", "");
  if (!cov.empty()) {
    if (cov == "diagonal") {
      cfg.ubm_kind = CovKind::diagonal;
    } else if (cov == "full") {
      cfg.ubm_kind = CovKind::full;
    } else {
      throw ConfigError("unknown ubm covariance kind: " + cov);
    }
  }
  cfg.ubm_iters = ini.get_int("ubm", "iters", cfg.ubm_iters);
  cfg.ubm_var_floor = ini.get_double("ubm", "var_floor", cfg.ubm_var_floor);
  cfg.ubm_max_frames = ini.get_int("ubm", "max_frames", cfg.ubm_max_frames);

  cfg.tv_rank = ini.get_int("tv", "R", cfg.tv_rank);
  cfg.tv_iters = ini.get_int("tv", "iters", cfg.tv_iters);

  std::string norm = ini.get("normalizer", "kind", "");
  if (!norm.empty()) {
    if (norm == "whiten") {
      cfg.norm_kind = NormKind::whiten;
    } else if (norm == "efr") {
      cfg.norm_kind = NormKind::efr;
    } else {
      throw ConfigError("unknown normalizer kind: " + norm);
    }
  }
  cfg.norm_iterations = ini.get_int("normalizer", "iterations", cfg.norm_iterations);
  cfg.norm_length = ini.get_bool("normalizer", "length_norm", cfg.norm_length);

  std::string enabled = ini.get("backends", "enabled", "gb_mclr, plda, svm, pairnet");
  cfg.backends.enabled = split_list(enabled);
  cfg.backends.gb_gamma = ini.get_double("backends", "gb_gamma", 0.1);
  cfg.backends.plda_rank = ini.get_int("backends", "plda_rank", 10);
  cfg.backends.plda_iters = ini.get_int("backends", "plda_iters", 10);
  cfg.backends.plda_min_duration_s =
      ini.get_double("backends", "plda_min_duration_s", 1.0);
  cfg.backends.svm_c = ini.get_double("backends", "svm_c", 1.0);
  cfg.backends.svm_epochs = ini.get_int("backends", "svm_epochs", 200);
  {
    auto dims = split_list(ini.get("backends", "pairnet_hidden", "256"));
    if (!dims.empty()) {
      cfg.backends.pairnet_hidden.clear();
      for (const auto &d : dims) cfg.backends.pairnet_hidden.push_back(std::stoi(d));
    }
  }
  cfg.backends.pairnet_embedding = ini.get_int("backends", "pairnet_embedding", 64);
  cfg.backends.pairnet_epochs = ini.get_int("backends", "pairnet_epochs", 150);
  cfg.backends.pairnet_lr = ini.get_double("backends", "pairnet_lr", 0.5);
  cfg.backends.pairnet_rounds = ini.get_int("backends", "pairnet_rounds", 35);
  cfg.backends.pairnet_balance = ini.get_bool("backends", "pairnet_balance", true);
  cfg.backends.tandem_relevance = ini.get_double("backends", "tandem_relevance", 16.0);

  cfg.fusion_folds = ini.get_int("fusion", "folds", 2);

  cfg.seed = static_cast<std::uint64_t>(ini.get_int("run", "seed", 7));
  cfg.synth.seed = cfg.seed;
  cfg.output_dir = ini.get("run", "output_dir", "out");
  cfg.jobs = ini.get_int("run", "jobs", 0);

  cfg.validate();
  return cfg;
}

void ExperimentConfig::validate() const {
  if (backends.enabled.empty()) {
    throw ConfigError("config: no back-ends enabled");
  }
  for (const auto &b : backends.enabled) {
    if (b != "gb_mclr" && b != "plda" && b != "svm" && b != "pairnet" &&
        b != "tandem_svm") {
      throw ConfigError("config: unknown back-end \"" + b + "\"");
    }
  }
  if (synth_enabled) synth.validate();
  if (fusion_folds < 2) throw ConfigError("config: fusion folds must be >= 2");
  if (ubm_size < 1 || tv_rank < 1) throw ConfigError("config: K and R must be >= 1");
}

namespace {

std::string describe_corpus(const ExperimentConfig &c) {
  std::ostringstream o;
  if (c.synth_enabled) {
    o << "synth:" << c.synth.n_languages << "," << c.synth.languages_per_cluster;
    for (const auto &[split, count] : c.synth.utterances_per_language) {
      o << "," << split_name(split) << "=" << count;
    }
    o << "," << c.synth.duration_min_s << "-" << c.synth.duration_max_s << ","
      << c.synth.sample_rate_hz << ",seed=" << c.synth.seed;
  } else {
    o << "manifest:" << c.manifest_path;
  }
  return o.str();
}

std::string describe_frontend(const ExperimentConfig &c) {
  const FrontendConfig &f = c.frontend;
  std::ostringstream o;
  o << f.frame.window_ms << "," << f.frame.hop_ms << "," << f.mfcc.n_filters << ","
    << f.mfcc.n_ceps << "," << f.mfcc.include_energy << "," << f.mfcc.preemphasis << ","
    << f.sdc.N << "-" << f.sdc.d << "-" << f.sdc.P << "-" << f.sdc.k << ","
    << static_cast<int>(f.vad.mode) << "," << f.vad.margin_db << "," << f.vad.context_ratio
    << "," << static_cast<int>(f.cmvn_scope) << "," << f.cmvn_window_s << ","
    << f.warp_window_frames << "," << f.apply_warp;
  return o.str();
}

std::string describe_backend(const ExperimentConfig &c, const std::string &name) {
  const BackendSettings &b = c.backends;
  std::ostringstream o;
  if (name == "gb_mclr") {
    o << "gb_gamma=" << b.gb_gamma;
  } else if (name == "plda") {
    o << "rank=" << b.plda_rank << ",iters=" << b.plda_iters
      << ",min_dur=" << b.plda_min_duration_s;
  } else if (name == "svm") {
    o << "C=" << b.svm_c << ",epochs=" << b.svm_epochs;
  } else if (name == "pairnet") {
    o << "hidden=";
    for (int d : b.pairnet_hidden) o << d << "+";
    o << ",embed=" << b.pairnet_embedding << ",epochs=" << b.pairnet_epochs
      << ",lr=" << b.pairnet_lr << ",rounds=" << b.pairnet_rounds
      << ",balance=" << b.pairnet_balance;
  } else if (name == "tandem_svm") {
    o << "C=" << b.svm_c << ",epochs=" << b.svm_epochs
      << ",relevance=" << b.tandem_relevance;
  }
  return o.str();
}

}  // namespace

std::uint64_t ExperimentConfig::stage_hash(const std::string &stage) const {
  // Chain: each stage hash mixes its own settings with its parent's hash.
  std::uint64_t h = fnv1a64("seed=" + std::to_string(seed));
  h = fnv1a64(h, describe_corpus(*this));
  if (stage == "corpus") return h;
  h = fnv1a64(h, describe_frontend(*this));
  if (stage == "features") return h;
  {
    std::ostringstream o;
    o << "ubm:" << ubm_size << "," << static_cast<int>(ubm_kind) << "," << ubm_iters << ","
      << ubm_var_floor << "," << ubm_max_frames;
    h = fnv1a64(h, o.str());
  }
  if (stage == "ubm") return h;
  if (stage == "stats") return fnv1a64(h, "stats");
  {
    std::ostringstream o;
    o << "tv:" << tv_rank << "," << tv_iters;
    h = fnv1a64(h, o.str());
  }
  if (stage == "tv") return h;
  if (stage == "ivectors") return fnv1a64(h, "ivectors");
  {
    std::ostringstream o;
    o << "norm:" << static_cast<int>(norm_kind) << "," << norm_iterations << ","
      << norm_length;
    h = fnv1a64(h, o.str());
  }
  if (stage == "normalizer") return h;
  if (stage.rfind("backend.", 0) == 0) {
    std::string name = stage.substr(8);
    return fnv1a64(h, name + ":" + describe_backend(*this, name));
  }
  // fusion and eval depend on every enabled backend
  for (const auto &name : backends.enabled) {
    h = fnv1a64(h, name + ":" + describe_backend(*this, name));
  }
  h = fnv1a64(h, "folds=" + std::to_string(fusion_folds));
  if (stage == "fusion" || stage == "eval") return fnv1a64(h, stage);
  throw ConfigError("unknown stage for hashing: " + stage);
}

}  // namespace lidkit
