#include "linkopt/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "linkopt/rng.hpp"

namespace linkopt {

double cost_min_flatness(const PowerProfile& output_dbm) {
  const PowerProfile norm = normalized(output_dbm);
  return -*std::min_element(norm.values.begin(), norm.values.end());
}

double cost_target_mse(const PowerProfile& output, const PowerProfile& target) {
  require(output.values.size() == target.values.size(),
          "profile length mismatch in target MSE");
  double acc = 0.0;
  for (size_t i = 0; i < output.values.size(); ++i) {
    const double d = output.values[i] - target.values[i];
    acc += d * d;
  }
  return acc / static_cast<double>(output.values.size());
}

void project_profile(std::vector<double>& values_db, double excursion_bound_db) {
  const double peak = *std::max_element(values_db.begin(), values_db.end());
  for (double& v : values_db) {
    v -= peak;
    if (v < -excursion_bound_db) v = -excursion_bound_db;
  }
}

namespace {

/// Smooth min via shifted log-sum-exp; exact min at tau = 0.
ad::Var softmin_on_tape(ad::Tape& t, ad::Var v, double tau) {
  ad::Var m = t.min(v);
  if (tau <= 0.0) return m;
  ad::Var z = t.sum(t.exp(t.scale(t.sub(v, m), -1.0 / tau)));
  return t.sub(m, t.scale(t.log(z), tau));
}

ad::Var softmax_on_tape(ad::Tape& t, ad::Var v, double tau) {
  ad::Var m = t.max(v);
  if (tau <= 0.0) return m;
  ad::Var z = t.sum(t.exp(t.scale(t.sub(v, m), 1.0 / tau)));
  return t.add(m, t.scale(t.log(z), tau));
}

ad::Var cost_on_tape(ad::Tape& t, ad::Var out_dbm, const OptimizationConfig& cfg,
                     const std::vector<double>& norm_target) {
  if (cfg.cost_kind == CostKind::MinFlatness) {
    if (cfg.softmin_tau_db <= 0.0) {
      // -min(out - max(out))
      return t.neg(t.min(t.sub(out_dbm, t.max(out_dbm))));
    }
    return t.sub(softmax_on_tape(t, out_dbm, cfg.softmin_tau_db),
                 softmin_on_tape(t, out_dbm, cfg.softmin_tau_db));
  }
  ad::Var norm = t.sub(out_dbm, t.max(out_dbm));
  ad::Var diff = t.sub(norm, t.leaf(norm_target, 1,
                                    static_cast<int>(norm_target.size())));
  return t.scale(t.sum(t.mul(diff, diff)),
                 1.0 / static_cast<double>(norm_target.size()));
}

struct DescentOutcome {
  std::vector<double> x;
  std::vector<double> trace;
  double final_cost = 0.0;
  bool converged = false;
  int iterations = 0;
};

DescentOutcome run_descent(const LinkConfig& link, const OptimizationConfig& cfg,
                           std::vector<double> x0,
                           const std::vector<double>& norm_target) {
  const int n = link.grid->n_channels;
  ad::Tape tape;

  const auto eval_with_grad = [&](const std::vector<double>& x,
                                  std::vector<double>& grad) {
    tape.clear();
    const TapedCascade run = predict_on_tape(tape, link, x);
    const ad::Var cost = cost_on_tape(tape, run.output_dbm, cfg, norm_target);
    const double c = cost.scalar();
    if (!std::isfinite(c)) {
      throw NumericError("optimizer cost went non-finite");
    }
    tape.backward(cost);
    auto g = tape.grad(run.input_dbm);
    grad.assign(g.begin(), g.end());
    for (double v : grad) {
      if (!std::isfinite(v)) {
        throw NumericError("optimizer gradient went non-finite");
      }
    }
    return c;
  };
  const auto eval_cost = [&](const std::vector<double>& x) {
    tape.clear();
    const TapedCascade run = predict_on_tape(tape, link, x);
    const double c = cost_on_tape(tape, run.output_dbm, cfg, norm_target).scalar();
    if (!std::isfinite(c)) {
      throw NumericError("optimizer cost went non-finite");
    }
    return c;
  };

  DescentOutcome out;
  out.x = std::move(x0);
  project_profile(out.x, cfg.excursion_bound_db);

  std::vector<double> grad;
  const auto grad_norm_inf = [](const std::vector<double>& g) {
    double m = 0.0;
    for (double v : g) m = std::max(m, std::abs(v));
    return m;
  };
  double cost = eval_with_grad(out.x, grad);
  out.trace.push_back(cost);  // iteration 0: starting point
  std::vector<double> candidate(n);
  constexpr int kMaxHalvings = 30;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    if (grad_norm_inf(grad) == 0.0) {
      // Stationary point (e.g. an already-flat output): nothing to descend.
      out.converged = true;
      break;
    }
    out.iterations = iter + 1;

    // Line search from the base step; a candidate that raises the cost is
    // rejected and the step halved. The base step is restored every
    // iteration so one bad kink cannot stall the whole run.
    double step = cfg.step_size_db;
    bool accepted = false;
    for (int h = 0; h < kMaxHalvings; ++h) {
      for (int i = 0; i < n; ++i) candidate[i] = out.x[i] - step * grad[i];
      project_profile(candidate, cfg.excursion_bound_db);
      const double cand_cost = eval_cost(candidate);
      if (cand_cost <= cost) {
        out.x = candidate;
        cost = cand_cost;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    out.trace.push_back(cost);
    if (!accepted) {
      // No descent at any step length: subgradient local minimum.
      out.converged = true;
      break;
    }
    cost = eval_with_grad(out.x, grad);

    const int w = cfg.stall_window;
    if (static_cast<int>(out.trace.size()) > w &&
        out.trace[out.trace.size() - 1 - w] - out.trace.back() < cfg.stall_tol_db) {
      out.converged = true;
      break;
    }
  }
  out.final_cost = cost;
  return out;
}

}  // namespace

OptimizationResult optimize_input(const LinkConfig& link,
                                  const OptimizationConfig& cfg) {
  require(cfg.max_iters >= 1, "max_iters must be at least 1");
  require(cfg.excursion_bound_db > 0.0, "excursion bound must be positive");
  const int n = link.grid->n_channels;

  std::vector<double> norm_target;
  if (cfg.cost_kind == CostKind::TargetMse) {
    require(cfg.target_profile.has_value(),
            "target-mse cost needs a target profile");
    norm_target = normalized(convert(*cfg.target_profile, Unit::Dbm)).values;
  }

  DescentOutcome best;
  bool have = false;
  for (int s = 0; s < std::max(1, cfg.n_starts); ++s) {
    std::vector<double> x0(n, 0.0);
    if (s > 0) {
      Rng rng(derive_seed(cfg.seed, static_cast<uint64_t>(s)));
      for (double& v : x0) v += rng.normal(0.0, cfg.start_jitter_db);
    }
    DescentOutcome run = run_descent(link, cfg, std::move(x0), norm_target);
    if (!have || run.final_cost < best.final_cost) {
      best = std::move(run);
      have = true;
    }
  }

  OptimizationResult result;
  result.input_profile = PowerProfile{link.grid, best.x, Unit::Dbm};
  result.cost_trace = std::move(best.trace);
  result.final_output = predict_output(link, result.input_profile);
  result.converged = best.converged;
  result.iterations = best.iterations;
  return result;
}

PowerProfile naive_invert(const LinkConfig& link, double excursion_bound_db) {
  const PowerProfile flat = flat_profile(link.grid, 0.0);
  const PowerProfile response = normalized(predict_output(link, flat));
  PowerProfile out = response;
  for (double& v : out.values) v = -v;
  project_profile(out.values, excursion_bound_db);
  return out;
}

BaselineProfiles optimize_baselines(const LinkConfig& link_srs,
                                    const LinkConfig& link_bulk,
                                    const OptimizationConfig& cfg) {
  require(same_topology(link_srs, link_bulk),
          "baseline links must share topology");
  BaselineProfiles bp;
  bp.srs_result = optimize_input(link_srs, cfg);
  bp.bl_result = optimize_input(link_bulk, cfg);
  bp.srs_opt = bp.srs_result.input_profile;
  bp.bl_opt = bp.bl_result.input_profile;
  bp.flat = flat_profile(link_srs.grid, 0.0);
  bp.naive = naive_invert(link_srs, cfg.excursion_bound_db);
  return bp;
}

}  // namespace linkopt
