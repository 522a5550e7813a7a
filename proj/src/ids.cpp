#include "intentflow/ids.hpp"

#include <cstdio>

namespace intentflow {

IdGenerator::IdGenerator() {
  std::random_device rd;
  rng_.seed((static_cast<std::uint64_t>(rd()) << 32) ^ rd());
}

IdGenerator::IdGenerator(std::uint64_t seed) : rng_(seed) {}

std::string IdGenerator::next(std::string_view prefix) {
  std::uint64_t v = 0;
  {
    std::lock_guard lock(mutex_);
    v = rng_();
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  std::string out(prefix);
  out += '_';
  out += buf;
  return out;
}

}  // namespace intentflow
