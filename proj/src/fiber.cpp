#include "linkopt/fiber.hpp"

#include <cmath>
#include <numbers>

namespace linkopt {

double RamanGainModel::efficiency(double df_thz) const {
  const double mag = std::abs(df_thz);
  double tri;
  if (mag <= peak_offset_thz) {
    tri = mag;
  } else if (mag < cutoff_thz) {
    tri = peak_offset_thz * (cutoff_thz - mag) / (cutoff_thz - peak_offset_thz);
  } else {
    tri = 0.0;
  }
  const double g = slope_per_w_m_thz * tri;
  return df_thz < 0.0 ? -g : g;
}

void validate(const FiberSpan& span) {
  require(span.length_km > 0.0, "fiber length must be positive");
  require(span.alpha_db_per_km > 0.0, "fiber loss must be positive");
  require(span.a_eff_m2 > 0.0, "effective area must be positive");
  require(span.step_m > 0.0 && span.step_m <= span.length_km * 1000.0,
          "step size must be in (0, length]");
}

double alpha_np_per_m(double alpha_db_per_km) {
  return alpha_db_per_km * (std::numbers::ln10 / 10.0) / 1000.0;
}

double effective_length_m(double length_m, double alpha_np_per_m,
                          double alpha_factor) {
  require(length_m >= 0.0 && alpha_np_per_m >= 0.0,
          "effective length needs non-negative length and loss");
  const double k = alpha_factor * alpha_np_per_m;
  if (k * length_m < 1e-9) return length_m;
  return (1.0 - std::exp(-k * length_m)) / k;
}

Mat build_srs_coupling(const FrequencyGrid& grid, const RamanGainModel& raman,
                       double a_eff_m2) {
  const int n = grid.n_channels;
  const double area_scale = kAeffRefM2 / a_eff_m2;
  Mat coupling(n, n);
  for (int rx = 0; rx < n; ++rx) {
    for (int m = 0; m < n; ++m) {
      coupling.at(rx, m) =
          raman.efficiency(grid.frequencies_thz[m] - grid.frequencies_thz[rx]) *
          area_scale;
    }
  }
  return coupling;
}

PowerProfile propagate_bulk(const PowerProfile& profile, const FiberSpan& span) {
  validate(profile);
  validate(span);
  const double loss_db = span.alpha_db_per_km * span.length_km;
  PowerProfile out = convert(profile, Unit::Dbm);
  for (double& v : out.values) v -= loss_db;
  return convert(out, profile.unit);
}

namespace detail {
void srs_step_inplace(std::vector<double>& log_watts, const Mat& coupling,
                      double loss_nats, double leff_m,
                      std::vector<double>& scratch) {
  const int n = coupling.rows;
  scratch.resize(2 * static_cast<size_t>(n));
  double* watts = scratch.data();
  double* gain = scratch.data() + n;
  for (int i = 0; i < n; ++i) watts[i] = std::exp(log_watts[i]);
  affine_xwt(watts, 1, n, coupling.data.data(), n, nullptr, gain);
  for (int i = 0; i < n; ++i) {
    log_watts[i] = log_watts[i] + leff_m * gain[i] - loss_nats;
  }
}
}  // namespace detail

PowerProfile srs_step(const PowerProfile& profile, const FiberSpan& span,
                      const RamanGainModel& raman, double leff_alpha_factor) {
  validate(profile);
  validate(span);
  require(profile.unit == Unit::LogWatts, "srs_step expects log-watts");
  const double alpha = alpha_np_per_m(span.alpha_db_per_km);
  const Mat coupling = build_srs_coupling(*profile.grid, raman, span.a_eff_m2);
  PowerProfile out = profile;
  std::vector<double> scratch;
  detail::srs_step_inplace(out.values, coupling, alpha * span.step_m,
                           effective_length_m(span.step_m, alpha, leff_alpha_factor),
                           scratch);
  return out;
}

PowerProfile propagate_srs(const PowerProfile& profile, const FiberSpan& span,
                           const RamanGainModel& raman,
                           double leff_alpha_factor) {
  validate(profile);
  validate(span);
  const double alpha = alpha_np_per_m(span.alpha_db_per_km);
  const double length_m = span.length_km * 1000.0;
  const int n_steps = static_cast<int>(std::ceil(length_m / span.step_m - 1e-12));
  const Mat coupling = build_srs_coupling(*profile.grid, raman, span.a_eff_m2);

  PowerProfile work = convert(profile, Unit::LogWatts);
  std::vector<double> scratch;
  const double leff_full =
      effective_length_m(span.step_m, alpha, leff_alpha_factor);
  for (int s = 0; s < n_steps; ++s) {
    double ls = span.step_m;
    double leff = leff_full;
    if (s == n_steps - 1) {
      const double rem = length_m - span.step_m * (n_steps - 1);
      if (rem < span.step_m) {
        ls = rem;
        leff = effective_length_m(rem, alpha, leff_alpha_factor);
      }
    }
    detail::srs_step_inplace(work.values, coupling, alpha * ls, leff, scratch);
  }
  return convert(work, profile.unit);
}

}  // namespace linkopt
