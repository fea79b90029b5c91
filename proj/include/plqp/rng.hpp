#pragma once

#include <array>
#include <cstdint>
#include <gmpxx.h>
#include <vector>

namespace plqp {

// ChaCha20-based random stream. Default construction seeds from the OS
// entropy pool; the seeded constructor gives a reproducible stream for
// tests and golden vectors (never use a fixed seed for real keys).
class Rng {
 public:
  Rng();
  explicit Rng(uint64_t seed);

  void fill(void* out, size_t len);

  // Uniform integer in [0, 2^nbits).
  mpz_class bits(size_t nbits);
  // Uniform integer in [0, bound), bound > 0. Rejection sampled.
  mpz_class below(const mpz_class& bound);
  // Uniform integer in [lo, hi), lo < hi.
  mpz_class range(const mpz_class& lo, const mpz_class& hi);

  uint64_t u64();
  uint64_t u64_below(uint64_t bound);
  // Uniform in [lo, hi] inclusive.
  int64_t i64_range(int64_t lo, int64_t hi);
  double real01();

  // One shared instance per thread, OS-seeded.
  static Rng& thread_default();

 private:
  void refill();

  std::array<uint8_t, 32> key_{};
  uint64_t block_counter_ = 0;
  std::array<uint8_t, 1024> buf_{};
  size_t avail_ = 0;
};

}  // namespace plqp
