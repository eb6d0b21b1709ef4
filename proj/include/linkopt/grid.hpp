#pragma once

#include <memory>
#include <vector>

#include "linkopt/error.hpp"

namespace linkopt {

/// Unit of the per-channel values carried by a PowerProfile.
enum class Unit {
  Dbm,       ///< dB-milliwatt
  LogWatts,  ///< natural log of the power in watts (propagation domain)
  Watts,     ///< linear watts
};

/// Uniform frequency grid, ascending. The default C-band grid has 83
/// channels at 50 GHz spacing, 191.5 ... 195.6 THz.
struct FrequencyGrid {
  int n_channels = 0;
  double f_start_thz = 0.0;
  double spacing_thz = 0.0;
  std::vector<double> frequencies_thz;
};

using GridPtr = std::shared_ptr<const FrequencyGrid>;

inline constexpr int kDefaultChannels = 83;
inline constexpr double kDefaultFStartThz = 191.5;
inline constexpr double kDefaultSpacingThz = 0.05;

/// Channels that are nominally off are clamped here instead of -inf so every
/// dB-domain value stays finite and differentiable.
inline constexpr double kPowerFloorDbm = -60.0;

/// The default 83-channel C-band grid (shared instance).
GridPtr build_grid();

/// Arbitrary uniform grid; used for toy fixtures and tests.
GridPtr build_grid(double f_start_thz, double spacing_thz, int n_channels);

/// Per-channel power on a grid, in an explicit unit.
struct PowerProfile {
  GridPtr grid;
  std::vector<double> values;
  Unit unit = Unit::Dbm;
};

PowerProfile make_profile(GridPtr grid, std::vector<double> values, Unit unit);
PowerProfile flat_profile(GridPtr grid, double value, Unit unit = Unit::Dbm);

/// Throws InvalidInput if the profile violates its invariants (length
/// mismatch, non-finite values, negative watts).
void validate(const PowerProfile& p);

// Scalar unit conversions. watts == 0 maps to the -60 dBm floor; negative
// watts throw.
double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);
double dbm_to_log_watts(double dbm);
double log_watts_to_dbm(double log_watts);

/// Converts a whole profile to the target unit.
PowerProfile convert(const PowerProfile& p, Unit target);

/// Total power across channels, in dBm: 10*log10(sum of watts) + 30.
double total_power_dbm(const PowerProfile& p);

/// Shifts a dBm profile so its maximum channel is exactly 0 dBm.
PowerProfile normalized(const PowerProfile& p);

/// max - min of a dBm profile.
double excursion_db(const PowerProfile& p);

}  // namespace linkopt
