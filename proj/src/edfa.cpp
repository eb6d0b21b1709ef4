#include "linkopt/edfa.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "linkopt/profilegen.hpp"

namespace linkopt {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

void validate(const EdfaFeatures& feat) {
  require(!feat.normalized_profile_dbm.empty(), "empty feature profile");
  double peak = feat.normalized_profile_dbm[0];
  for (double v : feat.normalized_profile_dbm) {
    require(std::isfinite(v), "non-finite feature value");
    peak = std::max(peak, v);
  }
  require(std::abs(peak) < 1e-9, "feature profile must be normalized to 0 dBm");
  require(std::isfinite(feat.total_in_dbm) && std::isfinite(feat.total_out_dbm),
          "non-finite total power feature");
}

EdfaFeatures features_for(const PowerProfile& input_dbm, double p_out_target_dbm) {
  require(input_dbm.unit == Unit::Dbm, "EDFA features expect a dBm profile");
  EdfaFeatures feat;
  feat.normalized_profile_dbm = normalized(input_dbm).values;
  feat.total_in_dbm = total_power_dbm(input_dbm);
  feat.total_out_dbm = p_out_target_dbm;
  return feat;
}

std::vector<double> virtual_gain(const VirtualEdfaDevice& device,
                                 const EdfaFeatures& feat, Rng* rng) {
  validate(feat);
  const int n = static_cast<int>(feat.normalized_profile_dbm.size());
  const double g_avg = feat.total_out_dbm - feat.total_in_dbm;
  const double deficit = device.g_ref_db - g_avg;

  double mean_p = 0.0;
  for (double v : feat.normalized_profile_dbm) mean_p += v;
  mean_p /= n;

  std::vector<double> gain(n);
  for (int i = 0; i < n; ++i) {
    // x runs -1..1 from low to high frequency; the tilt is applied as -x so
    // the gain drops toward high frequencies when the device runs below its
    // reference gain.
    const double x = n > 1 ? 2.0 * i / (n - 1) - 1.0 : 0.0;
    double g = g_avg;
    g += device.tilt_coeff * deficit * (-x);
    g += device.ripple_amp_db *
         std::sin(kTwoPi * i / device.ripple_period_ch + device.ripple_phase_rad);
    g += device.shb_coeff * (feat.normalized_profile_dbm[i] - mean_p);
    if (rng && device.noise_sigma_db > 0.0) {
      g += rng->normal(0.0, device.noise_sigma_db);
    }
    gain[i] = g;
  }
  return gain;
}

VirtualEdfaDevice perturb_device(const VirtualEdfaDevice& base,
                                 const std::string& new_id, uint64_t seed) {
  Rng rng(seed);
  VirtualEdfaDevice d = base;
  d.id = new_id;
  d.tilt_coeff *= rng.uniform(0.95, 1.05);
  d.ripple_amp_db *= rng.uniform(0.95, 1.05);
  d.ripple_phase_rad += 0.3 * rng.uniform(0.95, 1.05);
  d.shb_coeff *= rng.uniform(0.95, 1.05);
  return d;
}

void validate(const EdfaMlp& model) {
  require(model.w1.rows > 0 && model.w2.rows > 0 && model.w3.rows > 0,
          "model has empty layers");
  require(model.w2.cols == model.w1.rows && model.w3.cols == model.w2.rows,
          "layer dimensions do not chain");
  require(static_cast<int>(model.b1.size()) == model.w1.rows &&
              static_cast<int>(model.b2.size()) == model.w2.rows &&
              static_cast<int>(model.b3.size()) == model.w3.rows,
          "bias lengths do not match layers");
  for (const Mat* w : {&model.w1, &model.w2, &model.w3}) {
    for (double v : w->data) require(std::isfinite(v), "non-finite weight");
  }
  for (const auto* b : {&model.b1, &model.b2, &model.b3}) {
    for (double v : *b) require(std::isfinite(v), "non-finite bias");
  }
}

EdfaMlp init_mlp(int n_channels, int hidden1, int hidden2, uint64_t seed) {
  EdfaMlp m;
  m.seed = seed;
  const int in = n_channels + 2;
  m.w1 = Mat(hidden1, in);
  m.w2 = Mat(hidden2, hidden1);
  m.w3 = Mat(n_channels, hidden2);
  m.b1.assign(hidden1, 0.0);
  m.b2.assign(hidden2, 0.0);
  m.b3.assign(n_channels, 0.0);
  Rng rng(seed);
  for (Mat* w : {&m.w1, &m.w2, &m.w3}) {
    const double a = std::sqrt(6.0 / (w->cols + w->rows));
    for (double& v : w->data) v = rng.uniform(-a, a);
  }
  return m;
}

std::vector<double> assemble_features(const EdfaMlp& model,
                                      const EdfaFeatures& feat) {
  const int n = static_cast<int>(feat.normalized_profile_dbm.size());
  require(n + 2 == model.n_inputs(), "feature width does not match model");
  std::vector<double> x(static_cast<size_t>(n) + 2);
  for (int i = 0; i < n; ++i) {
    x[i] = feat.normalized_profile_dbm[i] * model.profile_feature_scale;
  }
  x[n] = feat.total_in_dbm * model.power_feature_scale;
  x[n + 1] = feat.total_out_dbm * model.power_feature_scale;
  return x;
}

std::vector<double> mlp_forward(const EdfaMlp& model, const EdfaFeatures& feat) {
  const std::vector<double> x = assemble_features(model, feat);
  std::vector<double> h1(model.w1.rows), h2(model.w2.rows), out(model.w3.rows);
  affine_xwt(x.data(), 1, model.w1.cols, model.w1.data.data(), model.w1.rows,
             model.b1.data(), h1.data());
  for (double& v : h1) v = v > 0.0 ? v : 0.0;
  affine_xwt(h1.data(), 1, model.w2.cols, model.w2.data.data(), model.w2.rows,
             model.b2.data(), h2.data());
  for (double& v : h2) v = v > 0.0 ? v : 0.0;
  affine_xwt(h2.data(), 1, model.w3.cols, model.w3.data.data(), model.w3.rows,
             model.b3.data(), out.data());
  return out;
}

ad::Var mlp_forward_on_tape(ad::Tape& tape, ad::Var features,
                            const EdfaMlp& model) {
  ad::Var h1 = tape.relu(tape.linear_const(features, &model.w1, &model.b1));
  ad::Var h2 = tape.relu(tape.linear_const(h1, &model.w2, &model.b2));
  return tape.linear_const(h2, &model.w3, &model.b3);
}

GainDataset generate_training_set(const VirtualEdfaDevice& device,
                                  GridPtr grid, int n_samples, uint64_t seed) {
  require(n_samples >= 1, "training set needs at least one sample");
  static constexpr int kFilterLengths[] = {1, 3, 5, 7, 9};
  const int n = grid->n_channels;
  GainDataset ds;
  ds.n_features = n + 2;
  ds.n_targets = n;
  ds.device_id = device.id;
  ds.seed = seed;
  ds.features.reserve(static_cast<size_t>(n_samples) * ds.n_features);
  ds.targets.reserve(static_cast<size_t>(n_samples) * ds.n_targets);

  for (int i = 0; i < n_samples; ++i) {
    const uint64_t si = derive_seed(seed, static_cast<uint64_t>(i));
    Rng rng(derive_seed(si, 1));

    ProfileGenConfig cfg;
    cfg.filter_length = kFilterLengths[i % 5];
    cfg.target_excursion_db = rng.uniform(0.0, 15.0);
    cfg.seed = derive_seed(si, 2);
    EdfaFeatures feat;
    feat.normalized_profile_dbm = normalized(random_walk_profile(grid, cfg)).values;
    feat.total_in_dbm = rng.uniform(-6.0, 12.0);
    feat.total_out_dbm = rng.uniform(10.0, 21.0);

    const std::vector<double> gain = virtual_gain(device, feat, &rng);
    ds.features.insert(ds.features.end(), feat.normalized_profile_dbm.begin(),
                       feat.normalized_profile_dbm.end());
    ds.features.push_back(feat.total_in_dbm);
    ds.features.push_back(feat.total_out_dbm);
    ds.targets.insert(ds.targets.end(), gain.begin(), gain.end());
  }
  return ds;
}

namespace {
PowerProfile renormalize_to_target(const PowerProfile& input,
                                   const std::vector<double>& gain_db,
                                   double p_out_target_dbm) {
  PowerProfile out = input;
  for (size_t i = 0; i < out.values.size(); ++i) out.values[i] += gain_db[i];
  const double shift = p_out_target_dbm - total_power_dbm(out);
  for (double& v : out.values) v += shift;
  return out;
}
}  // namespace

PowerProfile apply_edfa(const PowerProfile& profile_dbm, const EdfaMlp& model,
                        double p_out_target_dbm) {
  const EdfaFeatures feat = features_for(profile_dbm, p_out_target_dbm);
  return renormalize_to_target(profile_dbm, mlp_forward(model, feat),
                               p_out_target_dbm);
}

PowerProfile apply_virtual_edfa(const PowerProfile& profile_dbm,
                                const VirtualEdfaDevice& device,
                                double p_out_target_dbm, Rng* rng) {
  const EdfaFeatures feat = features_for(profile_dbm, p_out_target_dbm);
  return renormalize_to_target(profile_dbm, virtual_gain(device, feat, rng),
                               p_out_target_dbm);
}

}  // namespace linkopt
