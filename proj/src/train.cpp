#include "linkopt/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "linkopt/autodiff.hpp"
#include "linkopt/rng.hpp"

namespace linkopt {

namespace {

/// Copies dataset features with the model's feature scaling applied.
std::vector<double> scaled_features(const EdfaMlp& model, const GainDataset& ds) {
  std::vector<double> x(ds.features.size());
  const int nf = ds.n_features;
  const int np = nf - 2;
  for (int r = 0; r < ds.size(); ++r) {
    const double* in = ds.feature_row(r);
    double* out = x.data() + static_cast<size_t>(r) * nf;
    for (int i = 0; i < np; ++i) out[i] = in[i] * model.profile_feature_scale;
    out[np] = in[np] * model.power_feature_scale;
    out[np + 1] = in[np + 1] * model.power_feature_scale;
  }
  return x;
}

/// Batched plain forward over pre-scaled features.
void forward_scaled(const EdfaMlp& m, const double* x, int batch, double* out,
                    std::vector<double>& h1, std::vector<double>& h2) {
  h1.resize(static_cast<size_t>(batch) * m.w1.rows);
  h2.resize(static_cast<size_t>(batch) * m.w2.rows);
  affine_xwt(x, batch, m.w1.cols, m.w1.data.data(), m.w1.rows, m.b1.data(),
             h1.data());
  for (double& v : h1) v = v > 0.0 ? v : 0.0;
  affine_xwt(h1.data(), batch, m.w2.cols, m.w2.data.data(), m.w2.rows,
             m.b2.data(), h2.data());
  for (double& v : h2) v = v > 0.0 ? v : 0.0;
  affine_xwt(h2.data(), batch, m.w3.cols, m.w3.data.data(), m.w3.rows,
             m.b3.data(), out);
}

double mse_scaled(const EdfaMlp& m, const std::vector<double>& x,
                  const std::vector<double>& targets, int n, int nt) {
  std::vector<double> pred(static_cast<size_t>(n) * nt), h1, h2;
  forward_scaled(m, x.data(), n, pred.data(), h1, h2);
  double acc = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - targets[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.size());
}

/// Adam or plain-SGD update for one parameter tensor.
struct ParamState {
  std::vector<double> m, v;
  void update(std::span<double> w, std::span<const double> g, double lr,
              bool adam, long long t) {
    if (!adam) {
      for (size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
      return;
    }
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    if (m.empty()) {
      m.assign(w.size(), 0.0);
      v.assign(w.size(), 0.0);
    }
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (size_t i = 0; i < w.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
  }
};

}  // namespace

double dataset_mse_db2(const EdfaMlp& model, const GainDataset& ds) {
  require(ds.size() > 0, "empty dataset");
  require(ds.n_features == model.n_inputs() && ds.n_targets == model.n_outputs(),
          "dataset does not match model dimensions");
  const std::vector<double> x = scaled_features(model, ds);
  return mse_scaled(model, x, ds.targets, ds.size(), ds.n_targets);
}

TrainResult train_edfa_model(const GainDataset& train, const GainDataset& val,
                             const TrainConfig& cfg) {
  require(train.size() > 0, "empty training set");
  require(val.size() > 0, "empty validation set");
  require(train.n_features == val.n_features && train.n_targets == val.n_targets,
          "train/val column mismatch");
  require(cfg.batch_size >= 1 && cfg.max_epochs >= 1, "bad training config");

  const int nf = train.n_features;
  const int nt = train.n_targets;
  EdfaMlp model = init_mlp(nt, cfg.hidden1, cfg.hidden2, derive_seed(cfg.seed, 1));

  const std::vector<double> xtr = scaled_features(model, train);
  const std::vector<double> xva = scaled_features(model, val);

  Rng shuffle_rng(derive_seed(cfg.seed, 2));
  std::vector<int> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  ParamState s_w1, s_b1, s_w2, s_b2, s_w3, s_b3;
  double lr = cfg.learning_rate;
  double best_val = mse_scaled(model, xva, val.targets, val.size(), nt);
  EdfaMlp best = model;
  int stale = 0;
  long long step = 0;
  int epochs_run = 0;

  ad::Tape tape;
  std::vector<double> xb, tb;
  std::vector<double> val_history;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    epochs_run = epoch + 1;
    shuffle_rng.shuffle(order);
    for (int start = 0; start < train.size(); start += cfg.batch_size) {
      const int bs = std::min(cfg.batch_size, train.size() - start);
      xb.resize(static_cast<size_t>(bs) * nf);
      tb.resize(static_cast<size_t>(bs) * nt);
      for (int r = 0; r < bs; ++r) {
        const int src = order[start + r];
        std::copy_n(xtr.data() + static_cast<size_t>(src) * nf, nf,
                    xb.data() + static_cast<size_t>(r) * nf);
        std::copy_n(train.targets.data() + static_cast<size_t>(src) * nt, nt,
                    tb.data() + static_cast<size_t>(r) * nt);
      }

      tape.clear();
      ad::Var x = tape.leaf(xb, bs, nf);
      ad::Var w1 = tape.leaf(model.w1.data, model.w1.rows, model.w1.cols, true);
      ad::Var bb1 = tape.leaf(model.b1, 1, static_cast<int>(model.b1.size()), true);
      ad::Var w2 = tape.leaf(model.w2.data, model.w2.rows, model.w2.cols, true);
      ad::Var bb2 = tape.leaf(model.b2, 1, static_cast<int>(model.b2.size()), true);
      ad::Var w3 = tape.leaf(model.w3.data, model.w3.rows, model.w3.cols, true);
      ad::Var bb3 = tape.leaf(model.b3, 1, static_cast<int>(model.b3.size()), true);

      ad::Var h1 = tape.relu(tape.linear(x, w1, bb1));
      ad::Var h2 = tape.relu(tape.linear(h1, w2, bb2));
      ad::Var pred = tape.linear(h2, w3, bb3);
      ad::Var diff = tape.sub(pred, tape.leaf(tb, bs, nt));
      ad::Var loss =
          tape.scale(tape.sum(tape.mul(diff, diff)), 1.0 / (double(bs) * nt));

      const double loss_val = loss.scalar();
      if (!std::isfinite(loss_val)) {
        throw NumericError("training loss went non-finite (epoch " +
                           std::to_string(epoch) +
                           "); learning rate is likely too high");
      }
      tape.backward(loss);
      ++step;
      s_w1.update(model.w1.data, tape.grad(w1), lr, cfg.adam, step);
      s_b1.update(model.b1, tape.grad(bb1), lr, cfg.adam, step);
      s_w2.update(model.w2.data, tape.grad(w2), lr, cfg.adam, step);
      s_b2.update(model.b2, tape.grad(bb2), lr, cfg.adam, step);
      s_w3.update(model.w3.data, tape.grad(w3), lr, cfg.adam, step);
      s_b3.update(model.b3, tape.grad(bb3), lr, cfg.adam, step);
    }

    const double vmse = mse_scaled(model, xva, val.targets, val.size(), nt);
    if (!std::isfinite(vmse)) {
      throw NumericError("validation loss went non-finite");
    }
    val_history.push_back(vmse);
    if (vmse < best_val - cfg.min_improvement_db2) {
      best_val = vmse;
      best = model;
      stale = 0;
    } else {
      ++stale;
      if (stale >= cfg.patience_epochs) break;
      if (stale % cfg.plateau_epochs == 0) lr *= 0.5;
    }
    if (cfg.verbose) {
      std::fprintf(stderr, "epoch %3d  val mse %.5f dB^2  lr %.2e\n", epoch + 1,
                   vmse, lr);
    }
  }

  TrainResult result;
  result.model = std::move(best);
  result.val_mse_db2 = best_val;
  result.train_mse_db2 =
      mse_scaled(result.model, xtr, train.targets, train.size(), nt);
  result.epochs = epochs_run;
  result.val_history_db2 = std::move(val_history);
  return result;
}

}  // namespace linkopt
