#pragma once

#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>

namespace spde {

// splitmix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// child seed for replica / slice / stream `index`
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) {
  return derive_seed(derive_seed(master, a), b);
}

using Engine = std::mt19937_64;

class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : eng_(seed) {}
  double operator()() { return dist_(eng_); }
  // (0,1)
  double uniform_open() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }
  Engine& engine() { return eng_; }

 private:
  Engine eng_;
  boost::random::normal_distribution<double> dist_{0.0, 1.0};  // ziggurat
};

}  // namespace spde
