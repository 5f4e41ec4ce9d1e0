#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace bnmt {

// Every stochastic component draws from an explicitly passed generator.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

// Draws an index from unnormalized non-negative weights.
std::size_t sample_index(std::span<const double> weights, Rng& rng);

// Derives an independent stream for a named sub-task, e.g. per rater.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt);

}  // namespace bnmt
