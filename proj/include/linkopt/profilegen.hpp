#pragma once

#include <cstdint>
#include <vector>

#include "linkopt/grid.hpp"

namespace linkopt {

/// Smooth random test profiles: Gaussian random walk over the channels,
/// smoothed by an all-ones moving-average filter, optionally rescaled to an
/// exact excursion.
struct ProfileGenConfig {
  double sigma_w_db = 1.0;          ///< random-walk step std, dB
  double a0_min_dbm = -14.0;        ///< start level range
  double a0_max_dbm = 0.0;
  int filter_length = 1;            ///< odd, one of {1,3,5,7,9}
  double target_excursion_db = -1;  ///< < 0 means "leave the walk as is"
  uint64_t seed = 0;
};

void validate(const ProfileGenConfig& cfg);

/// One profile in dBm on the given grid. Deterministic given cfg.seed.
PowerProfile random_walk_profile(GridPtr grid, const ProfileGenConfig& cfg);

/// Batch with target excursions uniform in [excursion_min, excursion_max] dB
/// and filter lengths cycling through {1,3,5,7,9}. Per-profile seeds are
/// derived from the batch seed, so generation order does not matter.
std::vector<PowerProfile> generate_batch(GridPtr grid, int n,
                                         double excursion_min_db,
                                         double excursion_max_db,
                                         uint64_t seed);

}  // namespace linkopt
