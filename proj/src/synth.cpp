// src/synth.cpp

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

#include "lidkit/synth.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "lidkit/util.hpp"
#include "lidkit/wav.hpp"

namespace fs = std::filesystem;

namespace lidkit {

namespace {
constexpr int kFirOrder = 16;  // 17 taps
}

void SynthSpec::validate() const {
  if (n_languages < 1 || languages_per_cluster < 1) {
    throw ConfigError("synth: language counts must be >= 1");
  }
  for (const auto &[split, count] : utterances_per_language) {
    if (count < 1) {
      throw ConfigError("synth: utterance count for split " + split_name(split) +
                        " must be >= 1");
    }
  }
  if (!(duration_min_s > 0.0) || duration_max_s < duration_min_s) {
    throw ConfigError("synth: duration range must be positive and ordered");
  }
  if (sample_rate_hz != 8000 && sample_rate_hz != 16000) {
    throw ConfigError("synth: sample rate must be 8000 or 16000");
  }
}

std::vector<double> synth_language_filter(std::uint64_t seed, int language_index) {
  Rng rng = Rng(seed).fork("filter").fork(static_cast<std::uint64_t>(language_index));
  std::vector<double> taps(kFirOrder + 1);
  double norm2 = 0.0;
  for (double &t : taps) {
    t = rng.normal();
    norm2 += t * t;
  }
  double inv = 1.0 / std::sqrt(norm2);
  for (double &t : taps) t *= inv;
  return taps;
}

std::vector<double> synth_language_filter_alt(std::uint64_t seed, int language_index) {
  Rng rng = Rng(seed).fork("filter2").fork(static_cast<std::uint64_t>(language_index));
  std::vector<double> taps(kFirOrder + 1);
  double norm2 = 0.0;
  for (double &t : taps) {
    t = rng.normal();
    norm2 += t * t;
  }
  double inv = 1.0 / std::sqrt(norm2);
  for (double &t : taps) t *= inv;
  return taps;
}

double synth_language_rate_hz(std::uint64_t seed, int language_index) {
  // Geometric ladder with a seeded jitter; rates stay well below the frame
  // rate so the crossfade is visible to the delta features.
  Rng rng = Rng(seed).fork("rate").fork(static_cast<std::uint64_t>(language_index));
  double base = 1.6 * std::pow(1.35, language_index % 8);
  return base * (1.0 + 0.05 * (2.0 * rng.uniform() - 1.0));
}

namespace {

std::string lang_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "lang%02d", i + 1);
  return buf;
}

std::string cluster_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "cluster%d", i + 1);
  return buf;
}

AudioSignal make_utterance(const SynthSpec &spec, const std::vector<double> &taps_a,
                           const std::vector<double> &taps_b, double rate_hz, Rng rng) {
  double dur = rng.uniform(spec.duration_min_s, spec.duration_max_s);
  double phase = rng.uniform(0.0, 2.0 * M_PI);
  int n = static_cast<int>(std::lround(dur * spec.sample_rate_hz));
  AudioSignal sig;
  sig.sample_rate_hz = spec.sample_rate_hz;
  sig.samples.resize(n);
  std::vector<double> noise(n + kFirOrder, 0.0);
  for (int i = 0; i < n + kFirOrder; ++i) noise[i] = rng.normal();
  // Crossfade between the two language filters at the language rate; taps
  // are unit-L2 so the output stays near unit variance and 0.2 leaves
  // headroom against int16 clipping.
  for (int i = 0; i < n; ++i) {
    double a = 0.0, b = 0.0;
    for (int j = 0; j <= kFirOrder; ++j) {
      a += taps_a[j] * noise[i + kFirOrder - j];
      b += taps_b[j] * noise[i + kFirOrder - j];
    }
    double mix =
        0.5 * (1.0 + std::sin(2.0 * M_PI * rate_hz * i / spec.sample_rate_hz + phase));
    sig.samples[i] = 0.2 * (mix * a + (1.0 - mix) * b);
  }
  return sig;
}

}  // namespace

std::string generate_synthetic_corpus(const SynthSpec &spec, const std::string &out_dir) {
  spec.validate();
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "wav", ec);
  if (ec) throw DataError("cannot create corpus directory " + out_dir + ": " + ec.message());

  Rng master(spec.seed);
  std::vector<UtteranceRecord> records;
  const Split splits[] = {Split::train, Split::dev, Split::eval};

  for (int li = 0; li < spec.n_languages; ++li) {
    auto taps_a = synth_language_filter(spec.seed, li);
    auto taps_b = synth_language_filter_alt(spec.seed, li);
    double rate_hz = synth_language_rate_hz(spec.seed, li);
    std::string lang = lang_name(li);
    std::string cluster = cluster_name(li / spec.languages_per_cluster);
    for (Split split : splits) {
      auto it = spec.utterances_per_language.find(split);
      int count = it == spec.utterances_per_language.end() ? 0 : it->second;
      for (int ui = 0; ui < count; ++ui) {
        char utt[64];
        std::snprintf(utt, sizeof(utt), "%s-%s-%04d", lang.c_str(),
                      split_name(split).c_str(), ui + 1);
        Rng rng = master.fork("utt").fork(fnv1a64(utt));
        AudioSignal sig = make_utterance(spec, taps_a, taps_b, rate_hz, rng);
        std::string rel = std::string("wav/") + utt + ".wav";
        write_wav((fs::path(out_dir) / rel).string(), sig);
        UtteranceRecord rec;
        rec.utt_id = utt;
        rec.audio_path = rel;  // relative to the manifest directory
        rec.language = lang;
        rec.cluster = cluster;
        rec.split = split;
        rec.duration_s = sig.duration_s();
        records.push_back(std::move(rec));
      }
    }
  }

  std::string manifest = (fs::path(out_dir) / "manifest.tsv").string();
  save_manifest(records, manifest);
  return manifest;
}

}  // namespace lidkit
