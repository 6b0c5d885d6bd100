#pragma once

#include <cmath>
#include <cstdint>

namespace strm {

// Counter-based splittable random stream.
//
// A Stream is a value-type handle on a splitmix64-style sequence: draws are
// finalizer(key + GOLDEN * ++counter), and child streams are derived from the
// key alone by a second round of mixing.  Because fork() ignores the counter,
// the substream reached by a given chain of tags is a pure function of
// (seed, tags...): any two code paths that derive the same chain see the same
// draws, regardless of thread schedule or evaluation order.  This is what
// makes sparse-grid runs bit-identical across thread counts and lets a
// pruned run reproduce exactly the draws of the full run on the surviving
// cells.
//
// Derivation discipline used throughout the library:
//   root(seed).fork(module_tag).fork(replicate)          -> run stream
//   run_stream.fork(level).fork(key_lo).fork(key_hi)     -> cell stream
//   cell_stream.fork(slot)                               -> per-particle /
//                                                           per-child stream
class Stream {
 public:
  Stream() = default;
  explicit Stream(uint64_t key) : key_(key) {}

  // Entry point: decorrelates adjacent user seeds.
  static Stream root(uint64_t seed) { return Stream(mix(seed ^ kRootSalt)); }

  // Child stream independent of this stream's draw position.
  Stream fork(uint64_t tag) const {
    return Stream(mix(mix(key_ ^ kForkSalt) + kGolden * tag));
  }

  uint64_t next() { return mix(key_ + kGolden * ++ctr_); }

  // Uniform on the open interval (0,1); never returns 0 or 1, so logs are
  // always finite.
  double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * kInv53; }

  // Uniform on [0, n).  Lemire multiply-shift with rejection; exact for any n.
  uint64_t below(uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
    auto lo = static_cast<uint64_t>(m);
    if (lo < n) {
      uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        m = static_cast<unsigned __int128>(next()) * n;
        lo = static_cast<uint64_t>(m);
      }
    }
    return static_cast<uint64_t>(m >> 64);
  }

  // Standard normal via Box-Muller (cosine branch).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  uint64_t key() const { return key_; }
  uint64_t counter() const { return ctr_; }

  static uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }

 private:
  static constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ull;
  static constexpr uint64_t kForkSalt = 0xd1b54a32d192ed03ull;
  static constexpr uint64_t kRootSalt = 0x8cb92ba72f3d8dd7ull;
  static constexpr double kInv53 = 1.0 / 9007199254740992.0;  // 2^-53
  static constexpr double kPi = 3.14159265358979323846;

  uint64_t key_ = 0;
  uint64_t ctr_ = 0;
};

// Module tags: first fork below the root seed.  Keeping them in one place
// guarantees experiments never share substreams by accident.
namespace tag {
inline constexpr uint64_t kGrid = 1;
inline constexpr uint64_t kFractal = 2;
inline constexpr uint64_t kCoupling = 3;
inline constexpr uint64_t kForest = 4;
inline constexpr uint64_t kGamma = 5;
inline constexpr uint64_t kSpine = 6;
inline constexpr uint64_t kSbm = 7;
inline constexpr uint64_t kStats = 8;
}  // namespace tag

// Poisson sampler: multiplicative inversion for small mean (with the
// exp(-lambda) factor supplied or computed), Hormann's PTRD transformed
// rejection for lambda >= 10.  lambda == 0 deterministically returns 0.
uint64_t poisson_draw(Stream& s, double lambda);

// Same, but with exp(-lambda) precomputed by the caller.  The sparse grid
// engine caches these per occupancy count, which removes the exp() from the
// hot loop.  Only valid for lambda < 10 (the inversion branch).
uint64_t poisson_draw_small(Stream& s, double lambda, double exp_neg_lambda);

// Binomial(n, p) by n Bernoulli draws for small n, else by inversion.
uint64_t binomial_draw(Stream& s, uint64_t n, double p);

}  // namespace strm
