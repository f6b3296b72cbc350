// src/wav.cpp

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

#include "lidkit/wav.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "lidkit/util.hpp"

namespace lidkit {

namespace {

std::uint32_t read_u32(const unsigned char *p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint16_t read_u16(const unsigned char *p) {
  return static_cast<std::uint16_t>(p[0] | p[1] << 8);
}

void put_u32(std::string &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string &out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

AudioSignal read_wav(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open WAV file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  const auto *p = reinterpret_cast<const unsigned char *>(bytes.data());
  if (bytes.size() < 12 || std::memcmp(p, "RIFF", 4) != 0 ||
      std::memcmp(p + 8, "WAVE", 4) != 0) {
    throw DataError("not a RIFF/WAVE file: " + path);
  }

  bool have_fmt = false;
  std::uint16_t audio_format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  std::size_t data_offset = 0, data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    std::uint32_t chunk_size = read_u32(p + pos + 4);
    if (std::memcmp(p + pos, "fmt ", 4) == 0) {
      if (pos + 8 + 16 > bytes.size()) throw DataError("truncated fmt chunk: " + path);
      audio_format = read_u16(p + pos + 8);
      channels = read_u16(p + pos + 10);
      sample_rate = read_u32(p + pos + 12);
      bits = read_u16(p + pos + 22);
      have_fmt = true;
    } else if (std::memcmp(p + pos, "data", 4) == 0) {
      data_offset = pos + 8;
      data_size = chunk_size;
      break;
    }
    pos += 8 + chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }

  if (!have_fmt || data_offset == 0) throw DataError("missing fmt/data chunk: " + path);
  if (audio_format != 1) throw DataError("unsupported format (non-PCM): " + path);
  if (channels != 1) throw DataError("unsupported format (expected mono, got " +
                                     std::to_string(channels) + " channels): " + path);
  if (bits != 16) throw DataError("unsupported format (expected 16-bit PCM): " + path);
  if (data_offset + data_size > bytes.size()) {
    throw DataError("truncated data chunk: " + path);
  }

  AudioSignal sig;
  sig.sample_rate_hz = static_cast<int>(sample_rate);
  std::size_t n = data_size / 2;
  sig.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::int16_t v = static_cast<std::int16_t>(read_u16(p + data_offset + 2 * i));
    sig.samples[i] = static_cast<double>(v) / 32768.0;
  }
  return sig;
}

void write_wav(const std::string &path, const AudioSignal &signal) {
  if (signal.samples.empty()) throw DataError("refusing to write empty WAV: " + path);
  std::uint32_t n = static_cast<std::uint32_t>(signal.samples.size());
  std::uint32_t data_size = n * 2;
  std::string out;
  out.reserve(44 + data_size);
  out.append("RIFF");
  put_u32(out, 36 + data_size);
  out.append("WAVE");
  out.append("fmt ");
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate_hz));
  put_u32(out, static_cast<std::uint32_t>(signal.sample_rate_hz) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.append("data");
  put_u32(out, data_size);
  for (double s : signal.samples) {
    double c = s < -1.0 ? -1.0 : (s > 1.0 ? 1.0 : s);
    double scaled = c * 32768.0;
    if (scaled > 32767.0) scaled = 32767.0;
    auto v = static_cast<std::int16_t>(std::lrint(scaled));
    put_u16(out, static_cast<std::uint16_t>(v));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("short write: " + path);
}

}  // namespace lidkit
