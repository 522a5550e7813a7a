#pragma once

#include <cstdint>
#include <mutex>
#include <random>
#include <string>
#include <string_view>

namespace intentflow {

/// Produces opaque identifiers like "wf_3f9c0a1b2d4e5f60". Seedable so tests
/// can pin ids; otherwise seeded from std::random_device.
class IdGenerator {
public:
  IdGenerator();
  explicit IdGenerator(std::uint64_t seed);

  std::string next(std::string_view prefix);

private:
  std::mutex mutex_;
  std::mt19937_64 rng_;
};

}  // namespace intentflow
