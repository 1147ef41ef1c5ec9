#pragma once

#include <cstdint>
#include <random>

namespace bintopo {

// Named consumers of randomness within one run. Each gets its own engine
// seeded from the master seed, so adding draws to one stream never shifts
// another.
enum class Stream : std::uint64_t {
  environment = 1,
  algorithm = 2,
  buffer = 3,
  analysis = 4,
  init = 5,
};

// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Sub-stream seed = splitmix64(splitmix64(master) + stream * golden + counter).
// The counter lets one consumer derive further independent children
// (e.g. one per network reinitialization).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t counter = 0) {
  return splitmix64(splitmix64(master) + stream * 0x9e3779b97f4a7c15ULL +
                    splitmix64(counter + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t master, Stream stream,
                                    std::uint64_t counter = 0) {
  return derive_seed(master, static_cast<std::uint64_t>(stream), counter);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  void reseed(std::uint64_t seed) { engine_.seed(seed); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  std::uint8_t bit() { return static_cast<std::uint8_t>(engine_() >> 63); }

  // Uniform integer in [0, n). Lemire's multiply-shift; bias is < n / 2^64.
  std::size_t below(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(engine_()) * n) >> 64);
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    std::normal_distribution<double> dist(mean, stddev);
    return dist(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace bintopo
