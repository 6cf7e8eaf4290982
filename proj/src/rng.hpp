#pragma once

#include <cstdint>
#include <random>

namespace pstest {

// splitmix64 finalizer; used to turn structured coordinates into engine seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based key derivation: fold each coordinate into the running key.
// derive_key(seed, dgp, n, rep, ...) gives every replication / bootstrap draw
// its own stream, independent of execution order.
inline std::uint64_t derive_key(std::uint64_t key) { return mix64(key); }

template <typename... Rest>
std::uint64_t derive_key(std::uint64_t key, std::uint64_t next, Rest... rest) {
    return derive_key(mix64(key ^ mix64(next)), rest...);
}

class Rng {
  public:
    explicit Rng(std::uint64_t key) : engine_(key) {}

    double uniform() { return uniform_(engine_); }                  // [0,1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal() { return normal_(engine_); }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace pstest
