// src/util.cpp

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

#include "lidkit/util.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace lidkit {

void log_warn(const std::string &msg) {
  std::fprintf(stderr, "WARNING: %s\n", msg.c_str());
}

void log_info(const std::string &msg) {
  std::fprintf(stderr, "INFO: %s\n", msg.c_str());
}

std::uint64_t fnv1a64(std::uint64_t h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view s) {
  return fnv1a64(14695981039346656037ULL, s);
}

int Rng::uniform_int(int n) {
  // Rejection sampling keeps the draw unbiased for any n.
  std::uint64_t limit = ~0ULL - ~0ULL % static_cast<std::uint64_t>(n);
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return static_cast<int>(v % static_cast<std::uint64_t>(n));
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1, u2;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Rng Rng::fork(std::string_view tag) const {
  std::uint64_t h = fnv1a64(seed_ ^ 14695981039346656037ULL, tag);
  return Rng(h);
}

Rng Rng::fork(std::uint64_t tag) const {
  char buf[16];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((seed_ >> (8 * i)) & 0xff);
  for (int i = 0; i < 8; ++i) buf[8 + i] = static_cast<char>((tag >> (8 * i)) & 0xff);
  return Rng(fnv1a64(std::string_view(buf, 16)));
}

int default_jobs() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

void parallel_for(int n, int jobs, const std::function<void(int)> &fn) {
  if (n <= 0) return;
  if (jobs <= 1 || n == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  int workers = std::min(jobs, n);
  std::atomic<int> next(0);
  std::mutex err_mutex;
  std::exception_ptr err;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    threads.emplace_back([&]() {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto &th : threads) th.join();
  if (err) std::rethrow_exception(err);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

}  // namespace lidkit
