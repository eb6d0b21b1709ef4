#pragma once

#include "linkopt/grid.hpp"
#include "linkopt/linalg.hpp"

namespace linkopt {

/// Single fiber span, standard single-mode defaults.
struct FiberSpan {
  double length_km = 0.0;
  double alpha_db_per_km = 0.2;
  double a_eff_m2 = 80e-12;
  double step_m = 100.0;
};

/// Reference effective area folded into the default Raman slope. Changing
/// FiberSpan::a_eff_m2 rescales the efficiency by a_eff_ref / a_eff.
inline constexpr double kAeffRefM2 = 80e-12;

/// Raman gain efficiency vs frequency offset, triangular approximation:
/// linear up to the peak offset, linear back to zero at the cutoff,
/// antisymmetric in the offset. Units of slope: 1/(W*m*THz), i.e. the
/// g_R/A_eff efficiency per THz of offset at the reference effective area.
struct RamanGainModel {
  double slope_per_w_m_thz = 3.0e-5;
  double peak_offset_thz = 13.2;
  double cutoff_thz = 15.0;

  /// Efficiency in 1/(W*m) at offset df (THz). Exactly antisymmetric.
  double efficiency(double df_thz) const;
};

void validate(const FiberSpan& span);

/// Effective power interaction length (1 - exp(-k*alpha*L)) / (k*alpha),
/// alpha in nepers per metre. k is the alpha convention factor (2 as
/// published; 1 selectable via config). Series limit L for k*alpha*L -> 0.
double effective_length_m(double length_m, double alpha_np_per_m,
                          double alpha_factor = 2.0);

double alpha_np_per_m(double alpha_db_per_km);

/// 83x83 coupling matrix: row n receives sum_m coupling[n][m] * P_m(W) nats
/// per unit L_eff. coupling[n][m] = efficiency(f_m - f_n) * aeff_ref/aeff.
Mat build_srs_coupling(const FrequencyGrid& grid, const RamanGainModel& raman,
                       double a_eff_m2);

/// Frequency-flat loss: every channel drops alpha * length dB.
PowerProfile propagate_bulk(const PowerProfile& profile, const FiberSpan& span);

/// One explicit-Euler SRS step of span.step_m metres. Profile must be in
/// natural-log-watts; all channel updates use pre-step powers.
PowerProfile srs_step(const PowerProfile& profile, const FiberSpan& span,
                      const RamanGainModel& raman, double leff_alpha_factor = 2.0);

/// Full-span SRS propagation: ceil(length/step) steps, final step covers the
/// remaining length. Accepts any unit and returns the input's unit.
PowerProfile propagate_srs(const PowerProfile& profile, const FiberSpan& span,
                           const RamanGainModel& raman,
                           double leff_alpha_factor = 2.0);

namespace detail {
/// In-place step on log-watt values given a prebuilt coupling matrix.
/// scratch must have grid-size capacity. Shared with the taped cascade path.
void srs_step_inplace(std::vector<double>& log_watts, const Mat& coupling,
                      double loss_nats, double leff_m,
                      std::vector<double>& scratch);
}  // namespace detail

}  // namespace linkopt
