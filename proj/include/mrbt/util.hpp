#pragma once

#include <chrono>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace mrbt {

inline std::uint64_t hash_mix(std::uint64_t h, std::uint64_t v) {
  // splitmix64-style combine; stable across platforms
  v += 0x9e3779b97f4a7c15ull + h;
  v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ull;
  v = (v ^ (v >> 27)) * 0x94d049bb133111ebull;
  return v ^ (v >> 31);
}

inline std::uint64_t hash_str(std::uint64_t h, const std::string& s) {
  for (unsigned char c : s) h = hash_mix(h, c);
  return hash_mix(h, s.size());
}

// Deterministic RNG wrapper. std::uniform_int_distribution is
// implementation-defined, so bounded draws are done by hand here to keep
// runs reproducible across standard libraries.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, n)
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) return 0;
    std::uint64_t bound = ~std::uint64_t(0) - (~std::uint64_t(0) % n);
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= bound);
    return v % n;
  }

  int below_int(int n) { return static_cast<int>(below(static_cast<std::uint64_t>(n))); }

  // uniform in [0, 1)
  double uniform() {
    return static_cast<double>(engine_() >> 11) * (1.0 / 9007199254740992.0);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // derive an independent stream for a named purpose
  RngStream split(std::uint64_t tag) const {
    return RngStream(hash_mix(hash_mix(0x5eedu, seed_tag_), tag));
  }

  static RngStream seeded(std::uint64_t seed, std::uint64_t tag) {
    RngStream r(hash_mix(hash_mix(0x5eedu, seed), tag));
    r.seed_tag_ = hash_mix(seed, tag);
    return r;
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_tag_ = 0;
};

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    auto d = std::chrono::steady_clock::now() - start_;
    return std::chrono::duration<double>(d).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

class Deadline {
 public:
  explicit Deadline(double seconds)
      : end_(std::chrono::steady_clock::now() +
             std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                 std::chrono::duration<double>(seconds))) {}
  bool expired() const { return std::chrono::steady_clock::now() >= end_; }

 private:
  std::chrono::steady_clock::time_point end_;
};

std::vector<std::string> split_ws(const std::string& s);
std::string trim(const std::string& s);
bool starts_with(const std::string& s, const std::string& prefix);

}  // namespace mrbt
