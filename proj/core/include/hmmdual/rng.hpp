#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hmmdual {

// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Substream key for (master seed, path index, stream). Every Monte Carlo
// path draws from its own stream, so path sets are identical under any
// degree of parallelism.
inline std::uint64_t derive_seed(std::uint64_t master, std::int64_t path_index,
                                 std::uint64_t stream = 0) {
  std::uint64_t x = mix64(master);
  x = mix64(x ^ (0xD1B54A32D192ED03ULL * (static_cast<std::uint64_t>(path_index) + 1)));
  x = mix64(x ^ (0x8CB92BA72F3D8DD7ULL * (stream + 1)));
  return x;
}

// Per-path random stream. Draw order within a path is fixed by the caller,
// which together with derive_seed gives bit-identical paths regardless of
// worker count.
class PathRng {
 public:
  PathRng(std::uint64_t master_seed, std::int64_t path_index,
          std::uint64_t stream = 0)
      : engine_(derive_seed(master_seed, path_index, stream)) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; consumes two uniforms per pair.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double exponential(double rate) {
    return -std::log1p(-uniform()) / rate;
  }

  // Index draw proportional to nonnegative weights with known total.
  int discrete(const double* weights, int n, double total) {
    const double target = uniform() * total;
    double cum = 0.0;
    int last_positive = -1;
    for (int i = 0; i < n; ++i) {
      if (weights[i] > 0.0) last_positive = i;
      cum += weights[i];
      if (target < cum) return i;
    }
    return last_positive >= 0 ? last_positive : n - 1;
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hmmdual
