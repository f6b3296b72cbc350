// src/manifest.cpp

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

#include "lidkit/manifest.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "lidkit/util.hpp"

namespace fs = std::filesystem;

namespace lidkit {

std::string split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::eval: return "eval";
  }
  return "?";
}

Split split_from_name(const std::string &name) {
  if (name == "train") return Split::train;
  if (name == "dev") return Split::dev;
  if (name == "eval") return Split::eval;
  throw DataError("unknown split name: " + name);
}

namespace {

std::vector<std::string> split_tabs(const std::string &line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

const char *kHeader = "utt_id\tpath\tlanguage\tcluster\tsplit\tduration";

}  // namespace

std::vector<UtteranceRecord> load_manifest(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path);
  fs::path base = fs::path(path).parent_path();

  std::string line;
  if (!std::getline(in, line)) throw DataError("empty manifest: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) {
    throw DataError("manifest header mismatch in " + path + " (expected \"" +
                    std::string(kHeader) + "\")");
  }

  std::vector<UtteranceRecord> records;
  std::set<std::string> seen_ids;
  std::map<std::string, std::string> lang_cluster;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 6) {
      throw DataError("manifest parse error at line " + std::to_string(line_no) +
                      ": expected 6 tab-separated fields, got " +
                      std::to_string(fields.size()));
    }
    UtteranceRecord rec;
    rec.utt_id = fields[0];
    rec.audio_path = fields[1];
    rec.language = fields[2];
    rec.cluster = fields[3];
    try {
      rec.split = split_from_name(fields[4]);
    } catch (const DataError &) {
      throw DataError("manifest parse error at line " + std::to_string(line_no) +
                      ": unknown split \"" + fields[4] + "\"");
    }
    try {
      rec.duration_s = std::stod(fields[5]);
    } catch (const std::exception &) {
      throw DataError("manifest parse error at line " + std::to_string(line_no) +
                      ": bad duration \"" + fields[5] + "\"");
    }
    if (rec.duration_s <= 0.0) {
      throw DataError("manifest validation error at line " + std::to_string(line_no) +
                      ": duration must be positive");
    }
    if (!seen_ids.insert(rec.utt_id).second) {
      throw DataError("manifest validation error at line " + std::to_string(line_no) +
                      ": duplicate utt_id \"" + rec.utt_id + "\"");
    }
    auto it = lang_cluster.find(rec.language);
    if (it == lang_cluster.end()) {
      lang_cluster.emplace(rec.language, rec.cluster);
    } else if (it->second != rec.cluster) {
      throw DataError("manifest validation error at line " + std::to_string(line_no) +
                      ": language \"" + rec.language + "\" mapped to clusters \"" +
                      it->second + "\" and \"" + rec.cluster + "\"");
    }
    if (!rec.audio_path.empty() && !fs::path(rec.audio_path).is_absolute()) {
      rec.audio_path = (base / rec.audio_path).string();
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void save_manifest(const std::vector<UtteranceRecord> &records,
                   const std::string &path) {
  std::ostringstream out;
  out << kHeader << "\n";
  char buf[32];
  for (const auto &r : records) {
    std::snprintf(buf, sizeof(buf), "%.3f", r.duration_s);
    out << r.utt_id << '\t' << r.audio_path << '\t' << r.language << '\t'
        << r.cluster << '\t' << split_name(r.split) << '\t' << buf << "\n";
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write manifest: " + path);
  f << out.str();
}

std::vector<std::string> language_order(const std::vector<UtteranceRecord> &records) {
  std::set<std::string> langs;
  for (const auto &r : records) langs.insert(r.language);
  return std::vector<std::string>(langs.begin(), langs.end());
}

std::map<std::string, std::string> cluster_map(const std::vector<UtteranceRecord> &records) {
  std::map<std::string, std::string> m;
  for (const auto &r : records) m[r.language] = r.cluster;
  return m;
}

std::vector<UtteranceRecord> filter_split(const std::vector<UtteranceRecord> &records, Split s) {
  std::vector<UtteranceRecord> out;
  for (const auto &r : records) {
    if (r.split == s) out.push_back(r);
  }
  return out;
}

bool hash_split_keep(const std::string &utt_id, int modulus, int keep_below) {
  if (modulus <= 0 || keep_below < 0) throw ConfigError("bad hash split parameters");
  return static_cast<int>(fnv1a64(utt_id) % static_cast<std::uint64_t>(modulus)) < keep_below;
}

}  // namespace lidkit
