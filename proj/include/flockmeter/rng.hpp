#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace flockmeter::rng {

/// Name of the generator family, echoed into reports.
inline constexpr std::string_view kGeneratorFamily = "mt19937_64 seeded by splitmix64(master, replicate, label)";

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream labels keep independent draws of one replicate apart.
enum class Stream : std::uint64_t { Initial = 1, Reference = 2, Perturbation = 3, Sample = 4 };

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replicate, Stream label) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ replicate);
  return splitmix64(h ^ static_cast<std::uint64_t>(label));
}

inline std::mt19937_64 make_stream(std::uint64_t master, std::uint64_t replicate, Stream label) {
  return std::mt19937_64(derive_seed(master, replicate, label));
}

/// Uniform on [0, 1) from the top 53 bits; independent of the standard
/// library's distribution implementation.
inline double unit(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

/// Uniform on [-a, a).
inline double symmetric(std::mt19937_64& g, double a) { return a * (2.0 * unit(g) - 1.0); }

}  // namespace flockmeter::rng
