#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "linkopt/edfa.hpp"

namespace linkopt {

/// Mini-batch training hyperparameters. Defaults are the reproducible recipe
/// used throughout: batch 64, lr 1e-3 halved on validation plateau, up to 200
/// epochs with early stopping after 20 stale epochs.
struct TrainConfig {
  int batch_size = 64;
  double learning_rate = 1e-3;
  int max_epochs = 200;
  int plateau_epochs = 10;       ///< halve lr after this many stale epochs
  int patience_epochs = 20;      ///< stop after this many stale epochs
  double min_improvement_db2 = 1e-5;
  int hidden1 = 256;
  int hidden2 = 128;
  uint64_t seed = 1;
  bool adam = true;              ///< false selects plain SGD
  bool verbose = false;
};

struct TrainResult {
  EdfaMlp model;
  double train_mse_db2 = 0.0;
  double val_mse_db2 = 0.0;
  int epochs = 0;
  std::vector<double> val_history_db2;
};

/// Minimizes the mean squared gain error (dB^2) with mini-batch gradient
/// descent driven by the tape engine; returns the weights with the best
/// validation MSE. Deterministic given cfg.seed. Throws NumericError if the
/// loss goes non-finite.
TrainResult train_edfa_model(const GainDataset& train, const GainDataset& val,
                             const TrainConfig& cfg);

/// Mean squared prediction error of a model over a dataset, dB^2.
double dataset_mse_db2(const EdfaMlp& model, const GainDataset& ds);

}  // namespace linkopt
