#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "lrno/linalg.hpp"

namespace lrno {

// Counter-based generator: output k of a stream is splitmix64(key + k*gamma),
// with key = hash(seed, label). Streams with distinct labels are independent
// and every draw is reproducible on any platform.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view label);

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Standard normal via Box-Muller; both variates of a pair are used.
  double normal();
  // +1 or -1 with equal probability.
  double sign();

  Matrix normal_matrix(Index rows, Index cols, double stddev = 1.0);

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

// Label for the i-th member of a family of streams, e.g. "start/17".
std::string indexed_label(std::string_view base, std::uint64_t i);

}  // namespace lrno
