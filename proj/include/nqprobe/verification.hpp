#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace nqprobe {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Three-way bias agreement (exact vs Fourier vs Monte-Carlo) on a grid, the
// sigma -> 0 sawtooth limit, the zero period integral, odd symmetry and the
// clipped/unclipped consistency check.
std::vector<CheckResult> verify_bias_oracles(std::size_t mc_samples = 1000000,
                                             int grid_points = 64,
                                             std::uint64_t seed = 20240607);

}  // namespace nqprobe
