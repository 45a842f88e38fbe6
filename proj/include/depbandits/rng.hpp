#ifndef DEPBANDITS_RNG_HPP
#define DEPBANDITS_RNG_HPP

// Counter-free splittable RNG used across simulation code.
//
// Every stream is keyed by a (seed, stream) pair and generates an
// independent-looking sequence via the splitmix64 update.  Episode-level
// code derives one stream per episode index, so results are independent
// of evaluation order and identical across platforms: nothing here
// depends on std::random distributions or implementation-defined
// library behaviour.
//
//   next_u64():     splitmix64 step (Steele, Lea, Flood 2014 mixing
//                   constants), period 2^64 per stream.
//   next_uniform(): top 53 bits scaled into [0, 1).
//   bernoulli(p):   next_uniform() < p, so p = 1 always succeeds and
//                   p = 0 never does.

#include <cstdint>

namespace depbandits {

inline std::uint64_t mix_u64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(mix_u64(seed ^ mix_u64(stream ^ 0xa02bdbf7bb3c0a7ULL))) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return next_uniform() < p; }

 private:
  std::uint64_t state_;
};

}  // namespace depbandits

#endif  // DEPBANDITS_RNG_HPP
