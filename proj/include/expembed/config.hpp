#pragma once

#include <cstdint>

namespace expembed {

// Numerical tolerances shared by validation and the verification layer.
struct Tolerances {
  double mass_accept = 1e-9;  // |total mass - 1| rejected above this
  double mass_exact = 1e-12;  // after renormalisation
  double mean = 1e-9;
  double position = 1e-12;    // atoms closer than this (relative) are merged
};

inline constexpr std::uint64_t kDefaultStepCap = 1'000'000'000ULL;

}  // namespace expembed
