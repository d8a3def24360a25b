#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace asma {

// Deterministic RNG. Uniform and normal draws are derived from the raw
// mt19937_64 output stream with fixed arithmetic, so sequences are
// bit-identical across standard library implementations; serialize()
// round-trips the full state for checkpoint resume.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller on the uniform stream.
  double normal();

  // [0, n)
  int64_t uniform_int(int64_t n) {
    int64_t v = static_cast<int64_t>(uniform() * static_cast<double>(n));
    return v >= n ? n - 1 : v;
  }

  std::string serialize() const;
  void deserialize(const std::string& s);

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace asma
