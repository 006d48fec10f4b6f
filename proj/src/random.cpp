#include "autostgcn/random.hpp"

#include <limits>

namespace autostgcn {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view label) {
  return splitmix64(root ^ fnv1a64(label));
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view label,
                          std::uint64_t index) {
  return splitmix64(derive_seed(root, label) + splitmix64(index));
}

std::size_t uniform_index(Rng& rng, std::size_t n) {
  const std::uint64_t bound = n;
  // Rejection sampling: discard the top partial bucket.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace autostgcn
