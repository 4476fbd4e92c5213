#include "btp/random.hpp"

namespace btp {

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Seed derive(Seed parent, std::uint64_t index) noexcept {
  return Seed{mix64(parent.master + 0x9E3779B97F4A7C15ULL * (index + 1))};
}

Seed derive(Seed parent, Stream stream) noexcept {
  return derive(parent, static_cast<std::uint64_t>(stream));
}

}  // namespace btp
