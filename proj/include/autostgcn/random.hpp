#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace autostgcn {

// mt19937_64 is bit-exact across standard libraries; the helpers below avoid
// the implementation-defined std distributions so logs reproduce everywhere.
using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

// Stream seed for a named component: splitmix64(root ^ fnv1a64(label)).
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);

// Stream seed for the index-th member of a labelled family (e.g. episodes).
std::uint64_t derive_seed(std::uint64_t root, std::string_view label,
                          std::uint64_t index);

std::uint64_t fnv1a64(std::string_view bytes);

// Uniform in [0, n). n must be > 0.
std::size_t uniform_index(Rng& rng, std::size_t n);

// Uniform in [0, 1) with 53 random bits.
double uniform_unit(Rng& rng);

}  // namespace autostgcn
