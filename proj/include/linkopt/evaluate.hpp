#pragma once

#include <string>
#include <vector>

#include "linkopt/cascade.hpp"
#include "linkopt/optimizer.hpp"

namespace linkopt {

/// Mean squared dB error across channels between raw dBm profiles.
double mse_db2(const PowerProfile& predicted, const PowerProfile& measured);

struct SweepPoint {
  double p_launch_dbm = 0.0;
  FiberModelKind model_kind = FiberModelKind::Srs;
  double mean_mse_db2 = 0.0;
};

struct SweepReport {
  std::string link_id;
  int n_profiles = 0;
  uint64_t seed = 0;
  std::vector<SweepPoint> points;
};

/// Fig-4a style sweep: for every launch power and both fiber model kinds,
/// the mean MSE between the model prediction and the ground-truth oracle
/// over one shared batch of random-walk profiles. Per-profile seeds make the
/// result independent of the worker count.
SweepReport run_power_sweep(const LinkConfig& link,
                            const std::vector<double>& powers_dbm,
                            int n_profiles, uint64_t seed, int workers = 1);

/// Fig-4b style per-channel MSE at one launch power with the SRS model.
std::vector<double> run_channel_mse(const LinkConfig& link, double p_launch_dbm,
                                    int n_profiles, uint64_t seed,
                                    int workers = 1);

struct BaselineRow {
  std::string name;
  double excursion_db = 0.0;
  PowerProfile input;
  PowerProfile gt_output;
};

/// Fig-4c style comparison: ground-truth response to the four baseline
/// launch profiles at the given power.
std::vector<BaselineRow> run_baseline_comparison(const LinkConfig& link_srs,
                                                 const LinkConfig& link_bulk,
                                                 double p_launch_dbm,
                                                 const OptimizationConfig& opt_cfg,
                                                 uint64_t seed);

}  // namespace linkopt
