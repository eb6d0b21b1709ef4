#pragma once

#include <optional>
#include <vector>

#include "linkopt/cascade.hpp"

namespace linkopt {

enum class CostKind { MinFlatness, TargetMse };

/// Projected gradient descent configuration. softmin_tau_db = 0 keeps the
/// exact min cost; a positive temperature replaces min/max with the smooth
/// log-sum-exp pair (useful when the piecewise-linear cost stalls).
struct OptimizationConfig {
  CostKind cost_kind = CostKind::MinFlatness;
  std::optional<PowerProfile> target_profile;
  int max_iters = 500;
  double step_size_db = 0.2;
  double stall_tol_db = 1e-4;
  int stall_window = 20;
  double excursion_bound_db = 25.0;
  double softmin_tau_db = 0.0;
  int n_starts = 1;
  double start_jitter_db = 1.0;
  uint64_t seed = 0;
};

struct OptimizationResult {
  PowerProfile input_profile;        ///< optimized launch shape, max = 0 dBm
  std::vector<double> cost_trace;    ///< per iteration, accepted value
  PowerProfile final_output;         ///< modeled output at the optimum, dBm
  bool converged = false;
  int iterations = 0;
};

/// -min(normalize(output)): zero iff flat, invariant to uniform shifts.
double cost_min_flatness(const PowerProfile& output_dbm);

/// Mean squared dB difference across channels; both profiles normalized.
double cost_target_mse(const PowerProfile& output, const PowerProfile& target);

/// Gradient descent on the launch shape: flat start, descent steps on the
/// taped cost gradient, projection to {max = 0, values >= -excursion_bound},
/// rejected steps halve the step size. The accepted-cost trace is monotone.
OptimizationResult optimize_input(const LinkConfig& link,
                                  const OptimizationConfig& cfg);

/// Inverts the modeled response to a flat input: normalize(-response),
/// clamped to the excursion bound.
PowerProfile naive_invert(const LinkConfig& link,
                          double excursion_bound_db = 25.0);

/// The four launch profiles evaluated against the ground truth: optimized on
/// the SRS model, optimized on the bulk model, flat, and naively inverted.
struct BaselineProfiles {
  PowerProfile srs_opt;
  PowerProfile bl_opt;
  PowerProfile flat;
  PowerProfile naive;
  OptimizationResult srs_result;
  OptimizationResult bl_result;
};

BaselineProfiles optimize_baselines(const LinkConfig& link_srs,
                                    const LinkConfig& link_bulk,
                                    const OptimizationConfig& cfg);

/// Shared projection: shift so max = 0, clamp below -bound.
void project_profile(std::vector<double>& values_db, double excursion_bound_db);

}  // namespace linkopt
