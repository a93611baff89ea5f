#pragma once

#include <cstdint>
#include <vector>

namespace hopex {

// Deterministic 64-bit generator (splitmix64).  We roll our own instead of
// using <random> adaptors because std::shuffle and the distribution classes
// are implementation-defined; transcripts must be reproducible byte for byte
// from a seed alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform value in [0, n).  Modulo bias is irrelevant for test-scale n.
  std::uint64_t below(std::uint64_t n) { return n <= 1 ? 0 : next() % n; }

  double unit() {  // uniform in [0, 1)
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Derive an independent child stream; used to give sub-modules their own
  // reproducible randomness regardless of call order elsewhere.
  Rng fork(std::uint64_t salt) {
    return Rng(next() ^ (salt * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace hopex
