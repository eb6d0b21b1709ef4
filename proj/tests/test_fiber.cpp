#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "linkopt/fiber.hpp"
#include "linkopt/rng.hpp"

using namespace linkopt;

namespace {

// Quadrature oracle for the effective length: integral of exp(-k*a*z).
double leff_simpson(double length_m, double alpha, double factor) {
  const int n = 2000;
  const double h = length_m / n;
  double acc = std::exp(0.0) + std::exp(-factor * alpha * length_m);
  for (int i = 1; i < n; ++i) {
    acc += (i % 2 ? 4.0 : 2.0) * std::exp(-factor * alpha * i * h);
  }
  return acc * h / 3.0;
}

PowerProfile floor_profile(GridPtr g) { return flat_profile(g, kPowerFloorDbm); }

}  // namespace

TEST_CASE("effective length matches the closed form and the quadrature oracle") {
  const double alpha = alpha_np_per_m(0.2);
  CHECK(alpha == doctest::Approx(4.605e-5).epsilon(1e-3));

  const double leff100 = effective_length_m(100.0, alpha);
  CHECK(std::abs(leff100 - 99.54) < 0.01);
  CHECK(leff100 == doctest::Approx(leff_simpson(100.0, alpha, 2.0)).epsilon(1e-9));

  // alpha -> 0 limit
  CHECK(effective_length_m(12345.0, 0.0) == 12345.0);
  CHECK(effective_length_m(100.0, 1e-15) == doctest::Approx(100.0).epsilon(1e-9));

  // long-length asymptote 1/(2 alpha)
  CHECK(std::abs(effective_length_m(1e9, alpha) - 1.0 / (2.0 * alpha)) < 1.0);

  // factor-1 convention
  CHECK(effective_length_m(100.0, alpha, 1.0) ==
        doctest::Approx(leff_simpson(100.0, alpha, 1.0)).epsilon(1e-9));

  CHECK_THROWS_AS(effective_length_m(-1.0, alpha), InvalidInput);
  CHECK_THROWS_AS(effective_length_m(100.0, -alpha), InvalidInput);
}

TEST_CASE("raman efficiency curve shape") {
  RamanGainModel raman;
  CHECK(raman.efficiency(0.0) == 0.0);
  // antisymmetry is exact
  for (double df : {0.5, 4.1, 13.2, 14.0, 20.0}) {
    CHECK(raman.efficiency(-df) == -raman.efficiency(df));
  }
  // linear up to the peak
  CHECK(raman.efficiency(4.1) == doctest::Approx(3.0e-5 * 4.1).epsilon(1e-12));
  CHECK(raman.efficiency(13.2) == doctest::Approx(3.0e-5 * 13.2).epsilon(1e-12));
  // decays to zero at the cutoff
  CHECK(raman.efficiency(15.0) == 0.0);
  CHECK(raman.efficiency(16.0) == 0.0);
  CHECK(raman.efficiency(14.1) > 0.0);
  CHECK(raman.efficiency(14.1) < raman.efficiency(13.2));
}

TEST_CASE("bulk propagation is a uniform dB shift") {
  auto g = build_grid();
  FiberSpan span{.length_km = 100.0};
  const PowerProfile flat = flat_profile(g, 0.0);
  const PowerProfile out = propagate_bulk(flat, span);
  for (double v : out.values) CHECK(v == doctest::Approx(-20.0).epsilon(1e-12));

  Rng rng(3);
  std::vector<double> v(83);
  for (double& x : v) x = rng.uniform(-15.0, 0.0);
  const PowerProfile p{g, v, Unit::Dbm};
  const PowerProfile o = propagate_bulk(p, span);
  for (int i = 0; i < 83; ++i) {
    CHECK(o.values[i] - p.values[i] == doctest::Approx(-20.0).epsilon(1e-12));
  }
  CHECK(total_power_dbm(o) == doctest::Approx(total_power_dbm(p) - 20.0).epsilon(1e-9));
}

TEST_CASE("srs step: single channel above floor reduces to pure loss") {
  auto g = build_grid();
  FiberSpan span{.length_km = 1.0};
  RamanGainModel raman;
  PowerProfile p = floor_profile(g);
  p.values[40] = 10.0;
  const PowerProfile in = convert(p, Unit::LogWatts);
  const PowerProfile out = srs_step(in, span, raman);
  const double alpha = alpha_np_per_m(span.alpha_db_per_km);
  const double expected = in.values[40] - alpha * span.step_m;
  CHECK(std::abs(out.values[40] - expected) < 1e-9);
}

TEST_CASE("srs step: two equal channels exchange hand-computed increments") {
  auto g = build_grid();
  FiberSpan span{.length_km = 1.0};
  RamanGainModel raman;
  PowerProfile p = floor_profile(g);
  p.values[0] = 10.0;   // 191.5 THz
  p.values[82] = 10.0;  // 195.6 THz, offset 4.1 THz
  const PowerProfile in = convert(p, Unit::LogWatts);
  const PowerProfile out = srs_step(in, span, raman);

  const double alpha = alpha_np_per_m(span.alpha_db_per_km);
  const double loss = alpha * span.step_m;
  // Oracle from the step formula: c_r * df * L_eff(100 m) * P(W).
  const double expected_nats =
      3.0e-5 * 4.1 * effective_length_m(100.0, alpha) * dbm_to_watts(10.0);
  const double gained = out.values[0] - (in.values[0] - loss);
  const double lost = out.values[82] - (in.values[82] - loss);
  CHECK(gained == doctest::Approx(expected_nats).epsilon(0.05));
  CHECK(gained == doctest::Approx(1.22e-4).epsilon(0.05));
  // dB view of the same increment
  CHECK(gained * 10.0 / std::log(10.0) == doctest::Approx(5.3e-4).epsilon(0.05));

  // equal-and-opposite to machine precision
  CHECK(lost == -gained);
}

TEST_CASE("srs step at alpha ~ 0 conserves total linear power to first order") {
  auto g = build_grid();
  FiberSpan span{.length_km = 1.0, .alpha_db_per_km = 1e-30};
  RamanGainModel raman;
  const PowerProfile flat = flat_profile(g, 0.0);
  const PowerProfile in = convert(flat, Unit::LogWatts);
  const PowerProfile out = srs_step(in, span, raman);

  double before = 0.0, after = 0.0;
  for (int i = 0; i < 83; ++i) {
    before += std::exp(in.values[i]);
    after += std::exp(out.values[i]);
  }
  CHECK(std::abs(after - before) / before < 1e-6);

  // Oracle: summing pairwise exchange terms directly cancels exactly at
  // equal powers; allow only accumulation rounding relative to the term
  // magnitudes.
  double pairwise = 0.0, magnitude = 0.0;
  const double leff = effective_length_m(span.step_m, alpha_np_per_m(1e-30));
  const double watts = dbm_to_watts(0.0);
  for (int n = 0; n < 83; ++n) {
    for (int m = 0; m < 83; ++m) {
      const double term =
          raman.efficiency(g->frequencies_thz[m] - g->frequencies_thz[n]) *
          leff * watts;
      pairwise += term;
      magnitude += std::abs(term);
    }
  }
  CHECK(std::abs(pairwise) < 1e-12 * magnitude);
}

TEST_CASE("full span: single active channel equals bulk, floor equals bulk") {
  auto g = build_grid();
  FiberSpan span{.length_km = 100.0};
  RamanGainModel raman;

  PowerProfile p = floor_profile(g);
  p.values[20] = 5.0;
  const PowerProfile srs = propagate_srs(p, span, raman);
  const PowerProfile bulk = propagate_bulk(p, span);
  CHECK(std::abs(srs.values[20] - bulk.values[20]) < 1e-6);

  const PowerProfile fl = floor_profile(g);
  const PowerProfile srs_f = propagate_srs(fl, span, raman);
  const PowerProfile bulk_f = propagate_bulk(fl, span);
  for (int i = 0; i < 83; ++i) {
    CHECK(std::abs(srs_f.values[i] - bulk_f.values[i]) < 1e-6);
  }
}

TEST_CASE("full span: tilt direction and zero-slope reduction") {
  auto g = build_grid();
  FiberSpan span{.length_km = 80.0};
  RamanGainModel raman;
  const PowerProfile flat = flat_profile(g, 0.0);  // 19.2 dBm total
  const PowerProfile srs = propagate_srs(flat, span, raman);
  const PowerProfile bulk = propagate_bulk(flat, span);
  CHECK(srs.values[0] >= bulk.values[0]);
  CHECK(srs.values[82] <= bulk.values[82]);
  CHECK(srs.values[0] > srs.values[82]);

  RamanGainModel off;
  off.slope_per_w_m_thz = 0.0;
  const PowerProfile srs_off = propagate_srs(flat, span, off);
  for (int i = 0; i < 83; ++i) {
    CHECK(std::abs(srs_off.values[i] - bulk.values[i]) < 1e-6);
  }
}

TEST_CASE("step halving changes the output by < 0.01 dB at 21 dBm launch") {
  auto g = build_grid();
  RamanGainModel raman;
  // flat at 21 dBm total
  const double per_ch = 21.0 - 10.0 * std::log10(83.0);
  const PowerProfile launch = flat_profile(g, per_ch);

  FiberSpan s100{.length_km = 90.0, .step_m = 100.0};
  FiberSpan s50{.length_km = 90.0, .step_m = 50.0};
  const PowerProfile a = propagate_srs(launch, s100, raman);
  const PowerProfile b = propagate_srs(launch, s50, raman);
  for (int i = 0; i < 83; ++i) {
    CHECK(std::abs(a.values[i] - b.values[i]) < 0.01);
  }
}

TEST_CASE("srs propagation is deterministic and unit-preserving") {
  auto g = build_grid();
  FiberSpan span{.length_km = 70.0};
  RamanGainModel raman;
  Rng rng(11);
  std::vector<double> v(83);
  for (double& x : v) x = rng.uniform(-10.0, 0.0);
  const PowerProfile p{g, v, Unit::Dbm};
  const PowerProfile o1 = propagate_srs(p, span, raman);
  const PowerProfile o2 = propagate_srs(p, span, raman);
  CHECK(o1.unit == Unit::Dbm);
  for (int i = 0; i < 83; ++i) CHECK(o1.values[i] == o2.values[i]);
}

TEST_CASE("partial final step covers the remaining length") {
  auto g = build_grid();
  RamanGainModel raman;
  FiberSpan span{.length_km = 0.25, .step_m = 100.0};  // 250 m -> 100+100+50
  const PowerProfile flat = flat_profile(g, 0.0);
  const PowerProfile out = propagate_srs(flat, span, raman);
  const PowerProfile bulk = propagate_bulk(flat, span);
  // Total loss must correspond to exactly 250 m.
  CHECK(total_power_dbm(out) == doctest::Approx(total_power_dbm(bulk)).epsilon(1e-6));
}

TEST_CASE("fiber span validation") {
  FiberSpan bad{.length_km = -1.0};
  CHECK_THROWS_AS(validate(bad), InvalidInput);
  FiberSpan bad_step{.length_km = 1.0, .step_m = 2000.0};
  CHECK_THROWS_AS(validate(bad_step), InvalidInput);
}
