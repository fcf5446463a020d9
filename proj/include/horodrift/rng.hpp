#ifndef HORODRIFT_RNG_HPP
#define HORODRIFT_RNG_HPP

#include <cmath>
#include <cstdint>

namespace horodrift {

// Counter-based stream addressing: every consumer owns a (master, stream)
// pair, path i uses stream = i, so results never depend on worker scheduling.
struct RngSeed {
  std::uint64_t master = 0;
  std::uint64_t stream = 0;
};

inline std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derive a sub-master seed for an independent estimator within one experiment.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
  std::uint64_t x = master ^ (0x6a09e667f3bcc909ULL + tag * 0x9e3779b97f4a7c15ULL);
  return splitmix64(x);
}

// xoshiro256++, seeded from (master, stream) via splitmix64. Deterministic
// across platforms; no shared mutable state.
class Rng {
 public:
  explicit Rng(RngSeed seed) {
    std::uint64_t x = seed.master;
    (void)splitmix64(x);
    x ^= 0xd1342543de82ef95ULL * (seed.stream + 1);
    for (auto& w : s_) w = splitmix64(x);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform on [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on (0, 1], safe as a log argument
  double uniform_pos() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

  // standard normal via Box-Muller; pairs are cached so the stream
  // consumption per draw is fixed and reproducible
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform_pos();
    double u2 = uniform();
    double rad = std::sqrt(-2.0 * std::log(u1));
    double ang = 6.283185307179586476925286766559 * u2;
    cached_ = rad * std::sin(ang);
    have_cached_ = true;
    return rad * std::cos(ang);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace horodrift

#endif
