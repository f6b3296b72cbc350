// lidkit/util.hpp

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

#ifndef LIDKIT_UTIL_HPP_
#define LIDKIT_UTIL_HPP_

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lidkit {

// Error categories; the CLI maps them to exit codes (config 2, data 3,
// numeric 4).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct DataError : Error {
  using Error::Error;
};
struct NumericError : Error {
  using Error::Error;
};

void log_warn(const std::string &msg);
void log_info(const std::string &msg);

// FNV-1a, used for fold assignment, data splits and stage cache keys.
std::uint64_t fnv1a64(std::string_view s);
std::uint64_t fnv1a64(std::uint64_t h, std::string_view s);

// Deterministic RNG. mt19937_64 is bit-exact across standard libraries;
// the uniform/normal transforms are done here rather than with
// std::*_distribution, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // [0, n)
  int uniform_int(int n);

  // Standard normal via Box-Muller.
  double normal();

  // Independent stream derived from (seed, tag); drawing from the child
  // does not perturb the parent.
  Rng fork(std::string_view tag) const;
  Rng fork(std::uint64_t tag) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Runs fn(i) for i in [0, n) on up to `jobs` threads. fn must not throw
// across threads without being self-contained; exceptions are rethrown on
// the caller thread.
void parallel_for(int n, int jobs, const std::function<void(int)> &fn);

int default_jobs();

std::string format_double(double v);  // 17 significant digits, locale-free

}  // namespace lidkit

#endif  // LIDKIT_UTIL_HPP_
