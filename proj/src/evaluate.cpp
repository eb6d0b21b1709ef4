#include "linkopt/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

#include "linkopt/profilegen.hpp"
#include "linkopt/rng.hpp"

namespace linkopt {

double mse_db2(const PowerProfile& predicted, const PowerProfile& measured) {
  require(predicted.grid == measured.grid ||
              (predicted.grid && measured.grid &&
               predicted.grid->n_channels == measured.grid->n_channels &&
               predicted.grid->f_start_thz == measured.grid->f_start_thz &&
               predicted.grid->spacing_thz == measured.grid->spacing_thz),
          "profiles live on different grids");
  require(predicted.unit == Unit::Dbm && measured.unit == Unit::Dbm,
          "MSE expects dBm profiles");
  double acc = 0.0;
  for (size_t i = 0; i < predicted.values.size(); ++i) {
    const double d = predicted.values[i] - measured.values[i];
    acc += d * d;
  }
  return acc / static_cast<double>(predicted.values.size());
}

namespace {

/// Runs fn(i) for i in [0, n) across the given number of threads. Work is
/// striped by index; each item derives its own seed, so scheduling cannot
/// change any result.
void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

SweepReport run_power_sweep(const LinkConfig& link,
                            const std::vector<double>& powers_dbm,
                            int n_profiles, uint64_t seed, int workers) {
  require(!powers_dbm.empty(), "power sweep needs at least one launch power");
  require(n_profiles >= 1, "power sweep needs at least one profile");

  const std::vector<PowerProfile> batch =
      generate_batch(link.grid, n_profiles, 0.0, 15.0, derive_seed(seed, 1));

  SweepReport report;
  report.link_id = link.id;
  report.n_profiles = n_profiles;
  report.seed = seed;

  for (size_t pi = 0; pi < powers_dbm.size(); ++pi) {
    LinkConfig l = link;
    l.p_launch_dbm = powers_dbm[pi];
    std::vector<double> mse_srs(n_profiles), mse_bulk(n_profiles);
    parallel_for(n_profiles, workers, [&](int i) {
      const uint64_t noise_seed = derive_seed(derive_seed(seed, 100 + pi), i);
      const PowerProfile measured =
          predict_output_ground_truth(l, batch[i], noise_seed);
      mse_srs[i] =
          mse_db2(predict_output(l, batch[i], FiberModelKind::Srs), measured);
      mse_bulk[i] =
          mse_db2(predict_output(l, batch[i], FiberModelKind::Bulk), measured);
    });
    for (FiberModelKind kind : {FiberModelKind::Bulk, FiberModelKind::Srs}) {
      const auto& mses = kind == FiberModelKind::Srs ? mse_srs : mse_bulk;
      double mean = 0.0;
      for (double m : mses) mean += m;
      report.points.push_back(
          SweepPoint{powers_dbm[pi], kind, mean / n_profiles});
    }
  }
  return report;
}

std::vector<double> run_channel_mse(const LinkConfig& link, double p_launch_dbm,
                                    int n_profiles, uint64_t seed, int workers) {
  require(n_profiles >= 1, "channel MSE needs at least one profile");
  const std::vector<PowerProfile> batch =
      generate_batch(link.grid, n_profiles, 0.0, 15.0, derive_seed(seed, 1));
  LinkConfig l = link;
  l.p_launch_dbm = p_launch_dbm;

  const int n = link.grid->n_channels;
  std::vector<std::vector<double>> sq(n_profiles);
  parallel_for(n_profiles, workers, [&](int i) {
    const uint64_t noise_seed = derive_seed(derive_seed(seed, 100), i);
    const PowerProfile measured =
        predict_output_ground_truth(l, batch[i], noise_seed);
    const PowerProfile pred = predict_output(l, batch[i], FiberModelKind::Srs);
    sq[i].resize(n);
    for (int c = 0; c < n; ++c) {
      const double d = pred.values[c] - measured.values[c];
      sq[i][c] = d * d;
    }
  });

  std::vector<double> mse(n, 0.0);
  for (int i = 0; i < n_profiles; ++i) {
    for (int c = 0; c < n; ++c) mse[c] += sq[i][c];
  }
  for (double& v : mse) v /= n_profiles;
  return mse;
}

std::vector<BaselineRow> run_baseline_comparison(const LinkConfig& link_srs,
                                                 const LinkConfig& link_bulk,
                                                 double p_launch_dbm,
                                                 const OptimizationConfig& opt_cfg,
                                                 uint64_t seed) {
  LinkConfig ls = link_srs;
  LinkConfig lb = link_bulk;
  ls.p_launch_dbm = p_launch_dbm;
  lb.p_launch_dbm = p_launch_dbm;

  const BaselineProfiles bp = optimize_baselines(ls, lb, opt_cfg);
  const std::pair<std::string, const PowerProfile*> entries[] = {
      {"SRSopt", &bp.srs_opt},
      {"BLopt", &bp.bl_opt},
      {"naive", &bp.naive},
      {"flat", &bp.flat},
  };

  std::vector<BaselineRow> rows;
  for (size_t i = 0; i < 4; ++i) {
    BaselineRow row;
    row.name = entries[i].first;
    row.input = *entries[i].second;
    row.gt_output = predict_output_ground_truth(ls, row.input,
                                                derive_seed(seed, 200 + i));
    row.excursion_db = excursion_db(row.gt_output);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace linkopt
