#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "epitome/sketch_io.hpp"

namespace epitome {

/// Procedural five-category stroke dataset on an 800 x 800 extent:
///   circle  closed contour first, then 2-3 short tick decorations
///   cross   vertical bar, then horizontal bar
///   zigzag  three connected zigzag pieces, left to right
///   square  one stroke per side
///   star    one stroke per pentagram edge
/// Each sketch gets a random similarity transform plus per-point jitter.
struct SyntheticOptions {
  std::size_t per_category = 40;
  std::uint64_t seed = 7;
  double jitter = 6.0;  // std-dev of per-point noise, extent units
};

const std::vector<std::string>& synthetic_categories();

Dataset generate_synthetic_dataset(const SyntheticOptions& options = {});

}  // namespace epitome
