// lidkit/manifest.hpp

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

#ifndef LIDKIT_MANIFEST_HPP_
#define LIDKIT_MANIFEST_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace lidkit {

enum class Split { train, dev, eval };

std::string split_name(Split s);
Split split_from_name(const std::string &name);

struct UtteranceRecord {
  std::string utt_id;
  std::string audio_path;
  std::string language;
  std::string cluster;
  Split split = Split::train;
  double duration_s = 0.0;
};

// Parses a tab-separated manifest with header
//   utt_id  path  language  cluster  split  duration
// Relative audio paths are resolved against the manifest's directory.
// Checks utt_id uniqueness, positive durations and that each language maps
// to a single cluster.
std::vector<UtteranceRecord> load_manifest(const std::string &path);

void save_manifest(const std::vector<UtteranceRecord> &records,
                   const std::string &path);

// Sorted unique language names.
std::vector<std::string> language_order(const std::vector<UtteranceRecord> &records);

// language -> cluster map (validated to be single-valued by load_manifest).
std::map<std::string, std::string> cluster_map(const std::vector<UtteranceRecord> &records);

std::vector<UtteranceRecord> filter_split(const std::vector<UtteranceRecord> &records, Split s);

// Deterministic data split keyed by utt_id hash residue mod `modulus`.
// Returns true when the residue is strictly below `keep_below`, e.g.
// (3, 2) keeps about two thirds of the data.
bool hash_split_keep(const std::string &utt_id, int modulus, int keep_below);

}  // namespace lidkit

#endif  // LIDKIT_MANIFEST_HPP_
