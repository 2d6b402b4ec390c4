#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace ghostdet {

/// SplitMix64 generator. Cheap to construct, so one can be created per
/// simulation event from a derived key. Satisfies UniformRandomBitGenerator.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t state = 0) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// Seed for a labeled substream of `master`, e.g. derive_seed(seed, "mobility").
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

/// Seed for a keyed substream: one per (parent, a, b) event id.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t a, std::uint64_t b = 0);

/// Uniform double in [0, 1) built from the top 53 bits.
template <class Engine>
double uniform01(Engine& engine) {
  return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller. Implemented here rather than with
/// std::normal_distribution so that per-event streams stay stateless and the
/// sequence does not depend on the standard library vendor.
template <class Engine>
double standard_normal(Engine& engine);

/// 64-bit FNV-1a, used for config and file fingerprints.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

}  // namespace ghostdet

#include <cmath>
#include <numbers>

namespace ghostdet {

template <class Engine>
double standard_normal(Engine& engine) {
  double u1 = uniform01(engine);
  const double u2 = uniform01(engine);
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace ghostdet
