#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace ecstat {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Deterministic stream splitter. A single user seed plus a (name, index)
/// pair identifies an independent substream, so parallel replicates can each
/// own an engine regardless of worker scheduling.
class RngSeed {
 public:
  explicit RngSeed(std::uint64_t seed) : state_(detail::splitmix64(seed)) {}

  /// Substream for a named purpose ("simulate", "bootstrap", ...) and counter.
  RngSeed stream(std::string_view name, std::uint64_t index = 0) const {
    std::uint64_t s = state_;
    s = detail::splitmix64(s ^ detail::fnv1a(name));
    s = detail::splitmix64(s ^ index);
    return RngSeed(FromState{}, s);
  }

  RngSeed stream(std::uint64_t index) const { return stream("i", index); }

  /// Fresh engine for this stream; repeated calls return identical engines.
  std::mt19937_64 engine() const {
    std::uint64_t s = state_;
    std::seed_seq seq{static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32),
                      static_cast<std::uint32_t>(detail::splitmix64(s)),
                      static_cast<std::uint32_t>(detail::splitmix64(s) >> 32)};
    return std::mt19937_64(seq);
  }

  std::uint64_t state() const { return state_; }

 private:
  struct FromState {};
  RngSeed(FromState, std::uint64_t s) : state_(s) {}
  std::uint64_t state_;
};

/// Standard normal draw via the polar method. Hand-rolled so the byte stream
/// is a pure function of the engine sequence (std::normal_distribution keeps
/// hidden state and its algorithm is implementation-defined).
inline double normal_draw(std::mt19937_64& eng) {
  static constexpr double kInv = 1.0 / 9007199254740992.0;  // 2^-53
  for (;;) {
    double u = 2.0 * (static_cast<double>(eng() >> 11) * kInv) - 1.0;
    double v = 2.0 * (static_cast<double>(eng() >> 11) * kInv) - 1.0;
    double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) {
      return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }
}

}  // namespace ecstat
