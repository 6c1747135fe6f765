#ifndef MRT_RNG_HPP
#define MRT_RNG_HPP

#include <cstdint>
#include <random>

namespace mrt {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Deterministic uniform source.  Replicate streams are derived from a master
// seed via splitmix64 so that independently numbered streams never overlap in
// practice and every run with the same (master, replicate) is reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

  static Rng for_replicate(std::uint64_t master, std::uint64_t replicate) {
    return Rng(splitmix64(master) ^ splitmix64(0x5851F42D4C957F2DULL * (replicate + 1)));
  }

  std::uint64_t raw() { return eng_(); }

  // Uniform on (0, 1]; safe as an argument to log().
  double uniform() {
    return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1p-53;
  }

  // Uniform on [0, 1).
  double uniform_co() { return static_cast<double>(eng_() >> 11) * 0x1p-53; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace mrt

#endif  // MRT_RNG_HPP
