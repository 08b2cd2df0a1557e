#pragma once

#include <cstdint>
#include <random>

namespace dol {

using Engine = std::mt19937_64;

/// SplitMix64 finaliser; used to derive independent per-item seeds from a
/// (seed, stream, index) counter so results do not depend on thread layout.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                    std::uint64_t index = 0) {
  return mix64(mix64(mix64(seed) ^ (stream + 0x632be59bd9b4e019ULL)) ^ index);
}

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
  return Engine(derive_seed(seed, stream, index));
}

/// Stream identifiers keep unrelated consumers of one user seed apart.
namespace streams {
inline constexpr std::uint64_t us_specimen = 1;
inline constexpr std::uint64_t canadian_specimen = 2;
inline constexpr std::uint64_t gamma_specimen = 3;
inline constexpr std::uint64_t abc_chain = 4;
inline constexpr std::uint64_t abc_simulation = 5;
inline constexpr std::uint64_t gp_chain = 6;
inline constexpr std::uint64_t load_path = 7;
inline constexpr std::uint64_t trial_strength = 8;
inline constexpr std::uint64_t bootstrap = 9;
inline constexpr std::uint64_t parameter_draws = 10;
inline constexpr std::uint64_t gof = 11;
}  // namespace streams

}  // namespace dol
