#include "linkopt/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace linkopt {

namespace {
constexpr double kLn10 = std::numbers::ln10;

GridPtr make_grid(double f_start, double spacing, int n) {
  require(n >= 1, "grid needs at least one channel");
  require(spacing > 0.0, "grid spacing must be positive");
  auto g = std::make_shared<FrequencyGrid>();
  g->n_channels = n;
  g->f_start_thz = f_start;
  g->spacing_thz = spacing;
  g->frequencies_thz.resize(n);
  for (int k = 0; k < n; ++k) g->frequencies_thz[k] = f_start + k * spacing;
  return g;
}
}  // namespace

GridPtr build_grid() {
  static const GridPtr g =
      make_grid(kDefaultFStartThz, kDefaultSpacingThz, kDefaultChannels);
  return g;
}

GridPtr build_grid(double f_start_thz, double spacing_thz, int n_channels) {
  return make_grid(f_start_thz, spacing_thz, n_channels);
}

PowerProfile make_profile(GridPtr grid, std::vector<double> values, Unit unit) {
  PowerProfile p{std::move(grid), std::move(values), unit};
  validate(p);
  return p;
}

PowerProfile flat_profile(GridPtr grid, double value, Unit unit) {
  const int n = grid->n_channels;
  return PowerProfile{std::move(grid), std::vector<double>(n, value), unit};
}

void validate(const PowerProfile& p) {
  require(p.grid != nullptr, "profile has no grid");
  require(static_cast<int>(p.values.size()) == p.grid->n_channels,
          "profile length does not match grid channel count");
  for (double v : p.values) {
    require(std::isfinite(v), "profile contains a non-finite value");
    if (p.unit == Unit::Watts) {
      require(v >= 0.0, "linear power cannot be negative");
    }
  }
}

double dbm_to_watts(double dbm) {
  return std::exp((dbm - 30.0) * (kLn10 / 10.0));
}

double watts_to_dbm(double watts) {
  require(watts >= 0.0, "linear power cannot be negative");
  if (watts == 0.0) return kPowerFloorDbm;
  return std::log(watts) * (10.0 / kLn10) + 30.0;
}

double dbm_to_log_watts(double dbm) { return (dbm - 30.0) * (kLn10 / 10.0); }

double log_watts_to_dbm(double log_watts) {
  return log_watts * (10.0 / kLn10) + 30.0;
}

PowerProfile convert(const PowerProfile& p, Unit target) {
  validate(p);
  if (p.unit == target) return p;
  PowerProfile out = p;
  out.unit = target;
  for (double& v : out.values) {
    double dbm;
    switch (p.unit) {
      case Unit::Dbm:
        dbm = v;
        break;
      case Unit::LogWatts:
        dbm = log_watts_to_dbm(v);
        break;
      case Unit::Watts:
        dbm = watts_to_dbm(v);
        break;
      default:
        throw InvalidInput("unknown unit");
    }
    switch (target) {
      case Unit::Dbm:
        v = dbm;
        break;
      case Unit::LogWatts:
        v = dbm_to_log_watts(dbm);
        break;
      case Unit::Watts:
        v = dbm_to_watts(dbm);
        break;
      default:
        throw InvalidInput("unknown unit");
    }
  }
  return out;
}

double total_power_dbm(const PowerProfile& p) {
  validate(p);
  double watts = 0.0;
  for (double v : p.values) {
    switch (p.unit) {
      case Unit::Dbm:
        watts += dbm_to_watts(v);
        break;
      case Unit::LogWatts:
        watts += std::exp(v);
        break;
      case Unit::Watts:
        watts += v;
        break;
    }
  }
  // watts > 0 always: dB-domain inputs are finite and watt-domain zeros
  // contribute nothing but cannot make the sum negative.
  return watts_to_dbm(watts);
}

PowerProfile normalized(const PowerProfile& p) {
  validate(p);
  require(p.unit == Unit::Dbm, "normalize expects a dBm profile");
  PowerProfile out = p;
  const double peak = *std::max_element(out.values.begin(), out.values.end());
  for (double& v : out.values) v -= peak;
  return out;
}

double excursion_db(const PowerProfile& p) {
  require(p.unit == Unit::Dbm, "excursion expects a dBm profile");
  const auto [lo, hi] = std::minmax_element(p.values.begin(), p.values.end());
  return *hi - *lo;
}

}  // namespace linkopt
