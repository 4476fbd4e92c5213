#pragma once

#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace btp {

/// Master seed of an experiment. Every sampling routine is a pure function of
/// its arguments and one of these.
struct Seed {
  std::uint64_t master = 0;

  friend bool operator==(const Seed&, const Seed&) = default;
};

/// SplitMix64 output function.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// Seed of stream `index` below `parent`:
///   mix64(parent.master + 0x9E3779B97F4A7C15 * (index + 1)).
/// Replicates draw from derive(master, replicate) so results do not depend on
/// the order in which replicates are executed.
Seed derive(Seed parent, std::uint64_t index) noexcept;

/// Named sub-streams, so that e.g. the inner and outer processes of one
/// replicate never share random numbers.
enum class Stream : std::uint64_t {
  inner = 0x494e4e4552ULL,
  outer = 0x4f55544552ULL,
  labels = 0x4c4142454cULL,
  bridge = 0x4252494447ULL,
  bootstrap = 0x424f4f54ULL,
};

Seed derive(Seed parent, Stream stream) noexcept;

inline constexpr const char* kGeneratorId = "mt19937_64+boost-ziggurat-normal";

/// Engine plus the distributions used throughout. Boost's distributions are
/// used instead of <random>'s so that draws are identical across standard
/// library implementations.
class Rng {
public:
  explicit Rng(Seed seed) : engine_(seed.master) {}

  double gaussian() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

  /// Uniform integer in [0, k).
  std::uint64_t below(std::uint64_t k) {
    boost::random::uniform_int_distribution<std::uint64_t> d(0, k - 1);
    return d(engine_);
  }

private:
  std::mt19937_64 engine_;
  boost::random::normal_distribution<double> normal_;
  boost::random::uniform_01<double> uniform_;
};

}  // namespace btp
