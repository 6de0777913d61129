#pragma once

#include <cstdint>

#include "tspx/rational.hpp"

namespace tspx {

// Counter-based 64-bit generator: output i is a hash of (key, i), so streams
// derived from (seed, stream id) are independent and order-insensitive.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  // Independent stream for a (seed, stream id) pair, e.g. (trial, pair index).
  static CounterRng stream(std::uint64_t key, std::uint64_t stream_id) {
    return CounterRng(mix(key ^ mix(stream_id ^ 0x6a09e667f3bcc909ULL)));
  }

  std::uint64_t next_u64() {
    return mix(key_ + (counter_++) * 0x9e3779b97f4a7c15ULL);
  }

  // Uniform in [0, bound), bound >= 1; rejection sampling keeps it unbiased.
  std::uint64_t next_below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % bound;
  }

  // Exact uniform draw from {0, 1/2^64, ..., (2^64-1)/2^64}.
  Rational next_unit_rational() {
    std::uint64_t v = next_u64();
    Rational num(static_cast<unsigned long>(v));
    Rational den;
    mpz_ui_pow_ui(den.get_num().get_mpz_t(), 2, 64);
    den.get_den() = 1;
    Rational r = num / den;
    r.canonicalize();
    return r;
  }

  double next_unit_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace tspx
