#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace seqmt {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for one replication inside one simulation cell. Counter-based so that
// results do not depend on how replications are scheduled across threads.
inline std::uint64_t replication_seed(std::uint64_t master, std::uint64_t cell,
                                      std::uint64_t rep) {
  return splitmix64(splitmix64(splitmix64(master) ^ cell) ^ rep);
}

// Random source with a fixed normal-variate algorithm. std::normal_distribution
// is implementation-defined, which would break bit-identical reruns across
// toolchains, so Gaussian draws use Box-Muller explicitly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on (0, 1].
  double uniform_pos() {
    return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
  }

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    return r * std::cos(6.283185307179586476925286766559 * uniform());
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace seqmt
