#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "linkopt/autodiff.hpp"
#include "linkopt/grid.hpp"
#include "linkopt/linalg.hpp"
#include "linkopt/rng.hpp"

namespace linkopt {

/// Parametric ground-truth amplifier. Serves as the measurement stand-in:
/// linear gain tilt proportional to the gain deficit (stronger excursion at
/// lower average gain), sinusoidal ripple, a weak profile-dependent term,
/// and measurement noise.
struct VirtualEdfaDevice {
  std::string id = "A1";
  double g_ref_db = 28.0;
  double tilt_coeff = 0.30;       ///< dB of tilt per dB of gain deficit
  double ripple_amp_db = 0.4;
  double ripple_period_ch = 19.0;
  double ripple_phase_rad = 0.0;
  double shb_coeff = 0.05;        ///< dB of gain per dB of centered input
  double noise_sigma_db = 0.02;
};

/// Inputs of the gain model: normalized profile (max = 0 dBm) plus total
/// input and output powers in dBm.
struct EdfaFeatures {
  std::vector<double> normalized_profile_dbm;
  double total_in_dbm = 0.0;
  double total_out_dbm = 0.0;
};

void validate(const EdfaFeatures& feat);

EdfaFeatures features_for(const PowerProfile& input_dbm, double p_out_target_dbm);

/// Per-channel gain in dB of the virtual device. Noise is drawn from rng when
/// provided; pass nullptr for the noise-free expectation.
std::vector<double> virtual_gain(const VirtualEdfaDevice& device,
                                 const EdfaFeatures& feat, Rng* rng);

/// Same-make device spread: tilt, ripple amplitude and shb coefficient each
/// scaled by an independent factor in [0.95, 1.05]; ripple phase advanced by
/// about 0.3 rad. Deterministic given the seed.
VirtualEdfaDevice perturb_device(const VirtualEdfaDevice& base,
                                 const std::string& new_id, uint64_t seed);

/// ReLU MLP predicting per-channel gain in dB from 85 features
/// (n_channels + 2). Hidden widths 256 and 128.
struct EdfaMlp {
  Mat w1, w2, w3;
  std::vector<double> b1, b2, b3;
  double profile_feature_scale = 1.0;
  double power_feature_scale = 0.1;
  uint64_t seed = 0;

  int n_inputs() const { return w1.cols; }
  int n_outputs() const { return w3.rows; }
};

void validate(const EdfaMlp& model);

/// Glorot-uniform initialized model for a grid of n_channels.
EdfaMlp init_mlp(int n_channels, int hidden1, int hidden2, uint64_t seed);

/// Scaled feature vector as fed to the network.
std::vector<double> assemble_features(const EdfaMlp& model,
                                      const EdfaFeatures& feat);

/// Plain forward pass: gains in dB.
std::vector<double> mlp_forward(const EdfaMlp& model, const EdfaFeatures& feat);

/// Taped forward pass over a 1 x (n+2) feature row with constant weights.
/// The model must outlive the tape.
ad::Var mlp_forward_on_tape(ad::Tape& tape, ad::Var features,
                            const EdfaMlp& model);

/// Training pairs synthesized from a virtual device.
struct GainDataset {
  int n_features = 0;
  int n_targets = 0;
  std::vector<double> features;  ///< row-major, n x n_features (raw dBm units)
  std::vector<double> targets;   ///< row-major, n x n_targets (gain dB)
  std::string device_id;
  uint64_t seed = 0;

  int size() const {
    return n_features == 0 ? 0 : static_cast<int>(features.size()) / n_features;
  }
  const double* feature_row(int i) const { return features.data() + static_cast<size_t>(i) * n_features; }
  const double* target_row(int i) const { return targets.data() + static_cast<size_t>(i) * n_targets; }
};

/// Random-walk profiles with excursions 0-15 dB, total input power uniform in
/// [-6, 12] dBm, total output uniform in [10, 21] dBm, noisy labels from the
/// device. Deterministic given the seed.
GainDataset generate_training_set(const VirtualEdfaDevice& device,
                                  GridPtr grid, int n_samples, uint64_t seed);

/// Constant-output-power amplification: gain from the model, then a uniform
/// shift so the total output power equals the target exactly.
PowerProfile apply_edfa(const PowerProfile& profile_dbm, const EdfaMlp& model,
                        double p_out_target_dbm);

/// Ground-truth counterpart of apply_edfa using the virtual device.
PowerProfile apply_virtual_edfa(const PowerProfile& profile_dbm,
                                const VirtualEdfaDevice& device,
                                double p_out_target_dbm, Rng* rng);

}  // namespace linkopt
