#include "linkopt/profilegen.hpp"

#include <algorithm>
#include <cmath>

#include "linkopt/rng.hpp"

namespace linkopt {

void validate(const ProfileGenConfig& cfg) {
  require(cfg.sigma_w_db >= 0.0, "sigma_w must be non-negative");
  require(cfg.filter_length >= 1 && cfg.filter_length % 2 == 1 &&
              cfg.filter_length <= 9,
          "filter length must be odd and in {1,3,5,7,9}");
  require(cfg.a0_min_dbm <= cfg.a0_max_dbm, "empty a0 range");
}

namespace {
// Mirror index for reflective padding: ... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
int reflect(int i, int n) {
  if (i < 0) return -i - 1;
  if (i >= n) return 2 * n - 1 - i;
  return i;
}
}  // namespace

PowerProfile random_walk_profile(GridPtr grid, const ProfileGenConfig& cfg) {
  validate(cfg);
  const int n = grid->n_channels;
  Rng rng(cfg.seed);

  std::vector<double> walk(n);
  walk[0] = rng.uniform(cfg.a0_min_dbm, cfg.a0_max_dbm);
  for (int i = 1; i < n; ++i) {
    walk[i] = walk[i - 1] + rng.normal(0.0, cfg.sigma_w_db);
  }

  std::vector<double> smooth(n);
  if (cfg.filter_length == 1) {
    smooth = walk;
  } else {
    const int half = cfg.filter_length / 2;
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = -half; j <= half; ++j) acc += walk[reflect(i + j, n)];
      smooth[i] = acc / cfg.filter_length;
    }
  }

  if (cfg.target_excursion_db >= 0.0) {
    const auto [lo, hi] = std::minmax_element(smooth.begin(), smooth.end());
    const double span = *hi - *lo;
    double mean = 0.0;
    for (double v : smooth) mean += v;
    mean /= n;
    if (span == 0.0) {
      require(cfg.target_excursion_db == 0.0,
              "cannot rescale a flat walk to a nonzero excursion");
    } else {
      const double k = cfg.target_excursion_db / span;
      for (double& v : smooth) v = mean + (v - mean) * k;
    }
  }

  return PowerProfile{std::move(grid), std::move(smooth), Unit::Dbm};
}

std::vector<PowerProfile> generate_batch(GridPtr grid, int n,
                                         double excursion_min_db,
                                         double excursion_max_db,
                                         uint64_t seed) {
  require(n >= 1, "batch size must be at least 1");
  require(excursion_min_db >= 0.0 && excursion_max_db >= excursion_min_db,
          "bad excursion range");
  static constexpr int kFilterLengths[] = {1, 3, 5, 7, 9};
  std::vector<PowerProfile> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const uint64_t s = derive_seed(seed, static_cast<uint64_t>(i));
    Rng pick(derive_seed(s, 0x5eedULL));
    ProfileGenConfig cfg;
    cfg.sigma_w_db = 1.0;
    cfg.filter_length = kFilterLengths[i % 5];
    cfg.target_excursion_db = pick.uniform(excursion_min_db, excursion_max_db);
    cfg.seed = s;
    out.push_back(random_walk_profile(grid, cfg));
  }
  return out;
}

}  // namespace linkopt
