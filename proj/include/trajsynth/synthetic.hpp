#pragma once

#include <cstdint>
#include <string>

#include "trajsynth/trajectory.hpp"

namespace trajsynth {

struct SyntheticSpec {
  std::string scenario = "lane-turn";
  int positives = 20;
  int negatives = 40;
  double noise = 0.1;  // positional jitter standard deviation, meters
  std::size_t min_length = 24;
  std::size_t max_length = 40;
  std::uint64_t seed = 0;
};

// Deterministic per seed. Every trajectory is labeled by the scenario's
// reference query; trajectories are shuffled so both halves of the dataset
// mix labels. Throws UnknownScenario or std::invalid_argument.
Dataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace trajsynth
