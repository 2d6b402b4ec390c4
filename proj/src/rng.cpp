#include "ghostdet/rng.hpp"

namespace ghostdet {

namespace {

std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
  return mix(master ^ mix(fnv1a64(label)));
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = mix(parent + 0x9e3779b97f4a7c15ULL);
  h = mix(h ^ (a * 0xd1b54a32d192ed03ULL));
  h = mix(h ^ (b * 0x8cb92ba72f3d8dd7ULL + 1));
  return h;
}

}  // namespace ghostdet
