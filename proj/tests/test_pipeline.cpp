// Slower integration tests: everything that needs a trained gain surrogate.
// One reduced-budget model is trained once and shared across cases.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "linkopt/evaluate.hpp"
#include "linkopt/io.hpp"
#include "linkopt/optimizer.hpp"
#include "linkopt/profilegen.hpp"
#include "linkopt/testbed.hpp"
#include "linkopt/train.hpp"
#include "support.hpp"

using namespace linkopt;

namespace {

std::shared_ptr<const EdfaMlp> quick_model() {
  return linkopt_tests::cached_default_model().model;
}

LinkConfig two_span() { return testbed::two_span_link(build_grid(), quick_model()); }

}  // namespace

TEST_CASE("training on one repeated sample memorizes it") {
  auto grid = build_grid();
  const VirtualEdfaDevice dev;
  GainDataset one = generate_training_set(dev, grid, 1, 9);
  GainDataset rep;
  rep.n_features = one.n_features;
  rep.n_targets = one.n_targets;
  rep.device_id = one.device_id;
  for (int i = 0; i < 64; ++i) {
    rep.features.insert(rep.features.end(), one.features.begin(), one.features.end());
    rep.targets.insert(rep.targets.end(), one.targets.begin(), one.targets.end());
  }
  TrainConfig cfg;
  cfg.max_epochs = 400;
  cfg.patience_epochs = 400;
  cfg.plateau_epochs = 400;
  cfg.hidden1 = 64;
  cfg.hidden2 = 32;
  cfg.seed = 4;
  const TrainResult r = train_edfa_model(rep, rep, cfg);
  CHECK(r.train_mse_db2 < 1e-4);
}

TEST_CASE("training is reproducible given the seed") {
  auto grid = build_grid();
  const VirtualEdfaDevice dev;
  GainDataset train = generate_training_set(dev, grid, 600, 21);
  GainDataset val = generate_training_set(dev, grid, 120, 22);
  TrainConfig cfg;
  cfg.max_epochs = 3;
  cfg.seed = 77;
  const TrainResult a = train_edfa_model(train, val, cfg);
  const TrainResult b = train_edfa_model(train, val, cfg);
  EdfaFeatures feat;
  feat.normalized_profile_dbm.assign(83, -3.0);
  feat.normalized_profile_dbm[0] = 0.0;
  feat.total_in_dbm = 2.0;
  feat.total_out_dbm = 18.0;
  const auto pa = mlp_forward(a.model, feat);
  const auto pb = mlp_forward(b.model, feat);
  for (int i = 0; i < 83; ++i) {
    CHECK(std::abs(pa[i] - pb[i]) < 1e-9);
  }
}

TEST_CASE("diverging training aborts with a diagnostic") {
  auto grid = build_grid();
  const VirtualEdfaDevice dev;
  GainDataset train = generate_training_set(dev, grid, 300, 31);
  GainDataset val = generate_training_set(dev, grid, 60, 32);
  TrainConfig cfg;
  cfg.adam = false;
  cfg.learning_rate = 10.0;  // hopeless for raw SGD on these scales
  cfg.max_epochs = 50;
  CHECK_THROWS_AS(train_edfa_model(train, val, cfg), NumericError);
}

TEST_CASE("single bulk fiber link degenerates to propagate_bulk") {
  LinkConfig link;
  link.grid = build_grid();
  link.p_launch_dbm = 18.0;
  link.elements.push_back(
      LinkFiber{FiberSpan{.length_km = 100.0}, FiberModelKind::Bulk, {}});
  finalize(link);
  const PowerProfile out = predict_output(link, flat_profile(link.grid, 0.0));
  CHECK(excursion_db(out) < 1e-12);
  CHECK(total_power_dbm(out) == doctest::Approx(-2.0).epsilon(1e-9));
}

TEST_CASE("first EDFA sees p_launch minus the span loss") {
  LinkConfig link = two_span();
  std::vector<double> tin;
  predict_output(link, flat_profile(link.grid, 0.0), FiberModelKind::Bulk, &tin);
  REQUIRE(tin.size() == 2);
  CHECK(tin[0] == doctest::Approx(18.0 - 90.0 * 0.2).epsilon(1e-9));
  CHECK(tin[1] == doctest::Approx(18.0 - 70.0 * 0.2).epsilon(1e-9));
}

TEST_CASE("every EDFA stage restores total power to p_launch") {
  LinkConfig link = two_span();
  const PowerProfile out = predict_output(link, flat_profile(link.grid, 0.0));
  CHECK(std::abs(total_power_dbm(out) - 18.0) < 1e-9);
  const PowerProfile gt =
      predict_output_ground_truth(link, flat_profile(link.grid, 0.0), 3);
  CHECK(std::abs(total_power_dbm(gt) - 18.0) < 1e-9);
}

TEST_CASE("2-span flat response shows a strong excursion") {
  LinkConfig link = two_span();
  const PowerProfile out = predict_output(link, flat_profile(link.grid, 0.0));
  CHECK(excursion_db(out) > 8.0);
}

TEST_CASE("taped prediction equals the plain-kernel path on fibers") {
  // Bulk + SRS fiber-only link: the plain propagate functions share the
  // matvec kernels with the tape ops, so values agree bitwise.
  LinkConfig link;
  link.grid = build_grid();
  link.p_launch_dbm = 17.0;
  link.elements.push_back(
      LinkFiber{FiberSpan{.length_km = 3.0}, FiberModelKind::Srs, {}});
  finalize(link);

  Rng rng(64);
  std::vector<double> v(83);
  for (double& x : v) x = rng.uniform(-9.0, 0.0);
  const PowerProfile in{link.grid, v, Unit::Dbm};
  const PowerProfile taped = predict_output(link, in);

  PowerProfile plain = in;
  const double shift = 17.0 - total_power_dbm(plain);
  for (double& x : plain.values) x += shift;
  plain = convert(
      propagate_srs(convert(plain, Unit::LogWatts),
                    std::get<LinkFiber>(link.elements[0]).span, link.raman),
      Unit::Dbm);
  for (int i = 0; i < 83; ++i) {
    CHECK(taped.values[i] == doctest::Approx(plain.values[i]).epsilon(1e-13));
  }
}

TEST_CASE("ground truth path is deterministic per seed") {
  LinkConfig link = two_span();
  const PowerProfile in = flat_profile(link.grid, -3.0);
  const PowerProfile a = predict_output_ground_truth(link, in, 99);
  const PowerProfile b = predict_output_ground_truth(link, in, 99);
  for (int i = 0; i < 83; ++i) CHECK(a.values[i] == b.values[i]);
  const PowerProfile c = predict_output_ground_truth(link, in, 100);
  bool any_diff = false;
  for (int i = 0; i < 83; ++i) any_diff |= a.values[i] != c.values[i];
  CHECK(any_diff);
}

TEST_CASE("model predictions track the ground truth oracle") {
  LinkConfig link = two_span();
  const auto batch = generate_batch(link.grid, 20, 0.0, 15.0, 1234);
  double acc = 0.0;
  for (int i = 0; i < 20; ++i) {
    const PowerProfile pred = predict_output(link, batch[i]);
    const PowerProfile meas =
        predict_output_ground_truth(link, batch[i], derive_seed(9, i));
    acc += mse_db2(pred, meas);
  }
  // Reduced-budget surrogate: bound is loose but far below the flat-input
  // excursion scale.
  CHECK(acc / 20 < 0.6);
}

TEST_CASE("flat-gain EDFAs and bulk fibers preserve any input shape") {
  auto grid = build_grid();
  auto flat_gain = std::make_shared<EdfaMlp>(init_mlp(83, 8, 4, 2));
  for (Mat* w : {&flat_gain->w1, &flat_gain->w2, &flat_gain->w3}) {
    for (double& v : w->data) v = 0.0;
  }
  for (double& v : flat_gain->b3) v = 16.0;

  LinkConfig link;
  link.grid = grid;
  link.p_launch_dbm = 18.0;
  link.elements.push_back(
      LinkFiber{FiberSpan{.length_km = 90.0}, FiberModelKind::Bulk, {}});
  link.elements.push_back(LinkEdfa{"", "", flat_gain, {}});
  link.elements.push_back(
      LinkFiber{FiberSpan{.length_km = 70.0}, FiberModelKind::Bulk, {}});
  link.elements.push_back(LinkEdfa{"", "", flat_gain, {}});
  finalize(link);

  Rng rng(8);
  std::vector<double> v(83);
  for (double& x : v) x = rng.uniform(-10.0, 0.0);
  const PowerProfile in{grid, v, Unit::Dbm};
  const PowerProfile out = predict_output(link, in);
  const double shift = out.values[0] - in.values[0];
  for (int i = 0; i < 83; ++i) {
    CHECK(out.values[i] - in.values[i] == doctest::Approx(shift).epsilon(1e-10));
  }
}

TEST_CASE("cascade gradient matches finite differences") {
  LinkConfig link = two_span();
  Rng rng(4242);
  std::vector<double> x(83);
  for (double& v : x) v = rng.uniform(-6.0, 0.0);

  ad::Tape tape;
  const TapedCascade run = predict_on_tape(tape, link, x);
  const ad::Var cost =
      tape.neg(tape.min(tape.sub(run.output_dbm, tape.max(run.output_dbm))));
  tape.backward(cost);
  const auto grad = tape.grad(run.input_dbm);

  const auto f = [&](const std::vector<double>& xs) {
    ad::Tape t;
    const TapedCascade r = predict_on_tape(t, link, xs);
    return t.neg(t.min(t.sub(r.output_dbm, t.max(r.output_dbm)))).scalar();
  };
  const double h = 1e-4;
  for (int i : {0, 20, 41, 62, 82}) {
    std::vector<double> xs = x;
    xs[i] = x[i] + h;
    const double up = f(xs);
    xs[i] = x[i] - h;
    const double dn = f(xs);
    const double fd = (up - dn) / (2.0 * h);
    if (std::abs(grad[i]) > 1e-8) {
      CHECK(std::abs(grad[i] - fd) / std::abs(grad[i]) < 1e-5);
    }
  }
}

TEST_CASE("bulk/SRS divergence grows with launch power") {
  LinkConfig link = two_span();
  const PowerProfile in = flat_profile(link.grid, 0.0);
  const auto diff_at = [&](double p) {
    LinkConfig l = link;
    l.p_launch_dbm = p;
    const PowerProfile srs = predict_output(l, in, FiberModelKind::Srs);
    const PowerProfile bulk = predict_output(l, in, FiberModelKind::Bulk);
    double acc = 0.0;
    for (int i = 0; i < 83; ++i) acc += std::abs(srs.values[i] - bulk.values[i]);
    return acc / 83;
  };
  CHECK(diff_at(21.0) > diff_at(12.0));
}

TEST_CASE("cost functions: anchors and shift invariance") {
  auto g3 = build_grid(191.5, 0.05, 3);
  const PowerProfile flat{g3, {5.0, 5.0, 5.0}, Unit::Dbm};
  CHECK(cost_min_flatness(flat) == 0.0);
  const PowerProfile tilted{g3, {0.0, -2.0, -7.0}, Unit::Dbm};
  CHECK(cost_min_flatness(tilted) == 7.0);
  PowerProfile shifted = tilted;
  for (double& v : shifted.values) v += 11.25;
  CHECK(cost_min_flatness(shifted) == doctest::Approx(7.0).epsilon(1e-12));

  auto g2 = build_grid(191.5, 0.05, 2);
  const PowerProfile a{g2, {0.0, -2.0}, Unit::Dbm};
  const PowerProfile b{g2, {0.0, 0.0}, Unit::Dbm};
  CHECK(cost_target_mse(a, a) == 0.0);
  CHECK(cost_target_mse(a, b) == doctest::Approx(2.0).epsilon(1e-12));
  const PowerProfile c{g3, {0.0, 0.0, 0.0}, Unit::Dbm};
  CHECK_THROWS_AS(cost_target_mse(a, c), InvalidInput);
}

TEST_CASE("projection is idempotent and bounds the excursion") {
  std::vector<double> x{0.0, -10.0, -30.0, -2.0};
  project_profile(x, 25.0);
  CHECK(x[0] == 0.0);
  CHECK(x[2] == -25.0);
  std::vector<double> y = x;
  project_profile(y, 25.0);
  CHECK(x == y);
}

TEST_CASE("optimizer on a frequency-flat link stops immediately at zero cost") {
  LinkConfig link;
  link.grid = build_grid();
  link.p_launch_dbm = 18.0;
  link.elements.push_back(
      LinkFiber{FiberSpan{.length_km = 100.0}, FiberModelKind::Bulk, {}});
  finalize(link);
  OptimizationConfig cfg;
  const OptimizationResult r = optimize_input(link, cfg);
  CHECK(r.cost_trace.front() == 0.0);
  CHECK(r.cost_trace.back() == 0.0);
  CHECK(r.converged);
  CHECK(r.iterations <= 1);
}

TEST_CASE("optimizer flattens the default 2-span system") {
  LinkConfig link = two_span();
  OptimizationConfig cfg;
  cfg.step_size_db = 1.0;
  const OptimizationResult r = optimize_input(link, cfg);
  CHECK(excursion_db(r.final_output) <= 0.5);
  for (size_t i = 1; i < r.cost_trace.size(); ++i) {
    CHECK(r.cost_trace[i] <= r.cost_trace[i - 1] + 1e-12);
  }
  const auto& x = r.input_profile.values;
  CHECK(*std::max_element(x.begin(), x.end()) == 0.0);
  CHECK(*std::min_element(x.begin(), x.end()) >= -25.0);
}

TEST_CASE("optimizer respects max_iters = 1") {
  LinkConfig link = two_span();
  OptimizationConfig cfg;
  cfg.max_iters = 1;
  const OptimizationResult r = optimize_input(link, cfg);
  CHECK(r.iterations == 1);
}

TEST_CASE("an infeasible excursion bound still yields a feasible profile") {
  LinkConfig link = two_span();
  OptimizationConfig cfg;
  cfg.excursion_bound_db = 0.01;
  cfg.max_iters = 30;
  const OptimizationResult r = optimize_input(link, cfg);
  CHECK(excursion_db(r.input_profile) <= 0.01 + 1e-12);
}

TEST_CASE("target-mse cost drives the output toward an arbitrary shape") {
  LinkConfig link = two_span();
  std::vector<double> shape(83);
  for (int i = 0; i < 83; ++i) shape[i] = -3.0 * std::abs(i - 41.0) / 41.0;
  OptimizationConfig cfg;
  cfg.cost_kind = CostKind::TargetMse;
  cfg.target_profile = PowerProfile{link.grid, shape, Unit::Dbm};
  // The MSE gradient carries a 1/n_channels factor, so the step that suits
  // the min-flatness cost is too timid here.
  cfg.step_size_db = 4.0;
  const OptimizationResult r = optimize_input(link, cfg);
  const PowerProfile norm = normalized(r.final_output);
  const PowerProfile target_norm =
      normalized(PowerProfile{link.grid, shape, Unit::Dbm});
  CHECK(cost_target_mse(norm, target_norm) < 0.05);
}

TEST_CASE("optimizer runs are reproducible") {
  LinkConfig link = two_span();
  OptimizationConfig cfg;
  cfg.step_size_db = 1.0;
  cfg.max_iters = 40;
  const OptimizationResult a = optimize_input(link, cfg);
  const OptimizationResult b = optimize_input(link, cfg);
  CHECK(a.cost_trace == b.cost_trace);
  CHECK(a.input_profile.values == b.input_profile.values);
}

TEST_CASE("naive inversion flips the response tilt") {
  LinkConfig link = two_span();
  const PowerProfile response =
      normalized(predict_output(link, flat_profile(link.grid, 0.0)));
  const PowerProfile naive = naive_invert(link);
  CHECK(std::abs(*std::max_element(naive.values.begin(), naive.values.end())) <
        1e-12);
  // response tilts down with frequency, the inverse tilts up
  CHECK(response.values.front() > response.values.back());
  CHECK(naive.values.front() < naive.values.back());

  // frequency-flat link: naive profile is flat
  LinkConfig flat_link;
  flat_link.grid = link.grid;
  flat_link.p_launch_dbm = 18.0;
  flat_link.elements.push_back(
      LinkFiber{FiberSpan{.length_km = 50.0}, FiberModelKind::Bulk, {}});
  finalize(flat_link);
  const PowerProfile nf = naive_invert(flat_link);
  CHECK(excursion_db(nf) < 1e-9);
}

TEST_CASE("baselines coincide when SRS is disabled") {
  LinkConfig link = two_span();
  link.raman.slope_per_w_m_thz = 0.0;
  finalize(link);
  OptimizationConfig cfg;
  cfg.step_size_db = 1.0;
  cfg.max_iters = 60;
  const BaselineProfiles bp =
      optimize_baselines(link, with_fiber_kind(link, FiberModelKind::Bulk), cfg);
  for (int i = 0; i < 83; ++i) {
    CHECK(std::abs(bp.srs_opt.values[i] - bp.bl_opt.values[i]) < 0.15);
  }
  for (const PowerProfile* p : {&bp.srs_opt, &bp.bl_opt, &bp.flat, &bp.naive}) {
    CHECK(std::abs(*std::max_element(p->values.begin(), p->values.end())) < 1e-12);
    CHECK(*std::min_element(p->values.begin(), p->values.end()) >= -25.0);
  }
}

TEST_CASE("topology mismatch is rejected") {
  LinkConfig a = two_span();
  LinkConfig b = a;
  std::get<LinkFiber>(b.elements[0]).span.length_km = 80.0;
  finalize(b);
  OptimizationConfig cfg;
  CHECK_THROWS_AS(optimize_baselines(a, b, cfg), InvalidInput);
}

TEST_CASE("evaluation: mse anchors") {
  auto g2 = build_grid(191.5, 0.05, 2);
  const PowerProfile a{g2, {0.0, 0.0}, Unit::Dbm};
  const PowerProfile b{g2, {1.0, -1.0}, Unit::Dbm};
  CHECK(mse_db2(a, a) == 0.0);
  CHECK(mse_db2(a, b) == doctest::Approx(1.0).epsilon(1e-12));
  PowerProfile c = a;
  for (double& v : c.values) v += 1.0;
  CHECK(mse_db2(c, a) == doctest::Approx(1.0).epsilon(1e-12));
  const PowerProfile other{build_grid(), std::vector<double>(83, 0.0), Unit::Dbm};
  CHECK_THROWS_AS(mse_db2(a, other), InvalidInput);
}

TEST_CASE("sweep: bulk equals srs when SRS is disabled everywhere") {
  LinkConfig link = two_span();
  link.raman.slope_per_w_m_thz = 0.0;
  finalize(link);
  const SweepReport r = run_power_sweep(link, {15.0, 18.0}, 10, 5);
  REQUIRE(r.points.size() == 4);
  CHECK(r.points[0].mean_mse_db2 ==
        doctest::Approx(r.points[1].mean_mse_db2).epsilon(1e-6));
  CHECK(r.points[2].mean_mse_db2 ==
        doctest::Approx(r.points[3].mean_mse_db2).epsilon(1e-6));
}

TEST_CASE("sweep results do not depend on the worker count") {
  LinkConfig link = two_span();
  const SweepReport w1 = run_power_sweep(link, {18.0}, 12, 5, 1);
  const SweepReport w4 = run_power_sweep(link, {18.0}, 12, 5, 4);
  REQUIRE(w1.points.size() == w4.points.size());
  for (size_t i = 0; i < w1.points.size(); ++i) {
    CHECK(w1.points[i].mean_mse_db2 == w4.points[i].mean_mse_db2);
  }
  const auto c1 = run_channel_mse(link, 18.0, 12, 5, 1);
  const auto c4 = run_channel_mse(link, 18.0, 12, 5, 3);
  CHECK(c1 == c4);
}

TEST_CASE("channel mse: 83 rows, all non-negative, deterministic") {
  LinkConfig link = two_span();
  const auto mse = run_channel_mse(link, 18.0, 8, 17);
  REQUIRE(mse.size() == 83);
  for (double v : mse) CHECK(v >= 0.0);
  CHECK(mse == run_channel_mse(link, 18.0, 8, 17));
}

TEST_CASE("baseline comparison reports four rows ordered as in the paper") {
  LinkConfig link = two_span();
  OptimizationConfig cfg;
  cfg.step_size_db = 1.0;
  const auto rows = run_baseline_comparison(
      link, with_fiber_kind(link, FiberModelKind::Bulk), 18.0, cfg, 2024);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].name == "SRSopt");
  CHECK(rows[3].name == "flat");
  CHECK(rows[0].excursion_db < rows[3].excursion_db);
}
