#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace webcolor {

/// Error with a stable machine-readable code alongside the human message.
/// The CLI maps these codes into its JSON error output.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

namespace rng {

/// FNV-1a, used to derive named RNG sub-streams. Not std::hash: that one is
/// implementation-defined and would break seed reproducibility across builds.
inline std::uint64_t fnv1a(std::string_view s) noexcept {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// A named sub-stream of the master seed. Stages that draw randomness each
/// get their own stream so they stay reproducible independent of each other.
inline std::mt19937_64 substream(std::uint64_t seed, std::string_view name,
                                 std::uint64_t index = 0) {
  std::seed_seq seq{seed, fnv1a(name), index};
  return std::mt19937_64(seq);
}

/// Uniform double in [0,1) with 53 random bits, engine-portable.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/// Uniform double in [0, hi).
inline double uniform(std::mt19937_64& gen, double hi) {
  return uniform01(gen) * hi;
}

} // namespace rng

/// Runs fn(i) for i in [0, n) across hardware threads. Results must be
/// written to disjoint slots; no reduction is performed here.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  unsigned hw = std::thread::hardware_concurrency();
  if (hw <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  unsigned workers = static_cast<unsigned>(std::min<std::size_t>(hw, n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) {
    pool.emplace_back([t, workers, n, &fn] {
      for (std::size_t i = t; i < n; i += workers) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

} // namespace webcolor
