#include "linkopt/cascade.hpp"

#include <cmath>
#include <numbers>

#include "linkopt/rng.hpp"

namespace linkopt {

namespace {
constexpr double kLn10 = std::numbers::ln10;

struct FiberSteps {
  int n_steps;
  double ls_full, ls_last;
  double leff_full, leff_last;
  double loss_full_nats, loss_last_nats;
};

FiberSteps plan_steps(const FiberSpan& span, double leff_alpha_factor) {
  const double alpha = alpha_np_per_m(span.alpha_db_per_km);
  const double length_m = span.length_km * 1000.0;
  FiberSteps st;
  st.n_steps = static_cast<int>(std::ceil(length_m / span.step_m - 1e-12));
  st.ls_full = span.step_m;
  st.ls_last = length_m - span.step_m * (st.n_steps - 1);
  if (st.ls_last >= span.step_m) st.ls_last = span.step_m;
  st.leff_full = effective_length_m(st.ls_full, alpha, leff_alpha_factor);
  st.leff_last = effective_length_m(st.ls_last, alpha, leff_alpha_factor);
  st.loss_full_nats = alpha * st.ls_full;
  st.loss_last_nats = alpha * st.ls_last;
  return st;
}
}  // namespace

void finalize(LinkConfig& link) {
  require(link.grid != nullptr, "link has no frequency grid");
  require(!link.elements.empty(), "link needs at least one element");
  require(link.leff_alpha_factor == 1.0 || link.leff_alpha_factor == 2.0,
          "leff_alpha_factor must be 1 or 2");
  for (LinkElement& el : link.elements) {
    if (auto* fiber = std::get_if<LinkFiber>(&el)) {
      validate(fiber->span);
      fiber->coupling =
          build_srs_coupling(*link.grid, link.raman, fiber->span.a_eff_m2);
    }
  }
}

LinkConfig with_fiber_kind(const LinkConfig& link, FiberModelKind kind) {
  LinkConfig out = link;
  for (LinkElement& el : out.elements) {
    if (auto* fiber = std::get_if<LinkFiber>(&el)) fiber->kind = kind;
  }
  return out;
}

int count_fibers(const LinkConfig& link) {
  int n = 0;
  for (const LinkElement& el : link.elements) {
    if (std::holds_alternative<LinkFiber>(el)) ++n;
  }
  return n;
}

int count_edfas(const LinkConfig& link) {
  int n = 0;
  for (const LinkElement& el : link.elements) {
    if (std::holds_alternative<LinkEdfa>(el)) ++n;
  }
  return n;
}

bool same_topology(const LinkConfig& a, const LinkConfig& b) {
  if (a.elements.size() != b.elements.size()) return false;
  if (a.p_launch_dbm != b.p_launch_dbm) return false;
  for (size_t i = 0; i < a.elements.size(); ++i) {
    const auto* fa = std::get_if<LinkFiber>(&a.elements[i]);
    const auto* fb = std::get_if<LinkFiber>(&b.elements[i]);
    if ((fa == nullptr) != (fb == nullptr)) return false;
    if (fa && fb) {
      if (fa->span.length_km != fb->span.length_km ||
          fa->span.alpha_db_per_km != fb->span.alpha_db_per_km ||
          fa->span.step_m != fb->span.step_m) {
        return false;
      }
    }
  }
  return true;
}

ad::Var total_power_dbm_on_tape(ad::Tape& tape, ad::Var profile_dbm) {
  ad::Var lnw = tape.add_const(tape.scale(profile_dbm, kLn10 / 10.0), -3.0 * kLn10);
  ad::Var total_lnw = tape.log(tape.sum(tape.exp(lnw)));
  return tape.add_const(tape.scale(total_lnw, 10.0 / kLn10), 30.0);
}

namespace {

ad::Var fiber_on_tape(ad::Tape& tape, ad::Var p_dbm, const LinkFiber& fiber,
                      double leff_alpha_factor, FiberModelKind kind) {
  if (kind == FiberModelKind::Bulk) {
    return tape.add_const(p_dbm,
                          -fiber.span.alpha_db_per_km * fiber.span.length_km);
  }
  const FiberSteps st = plan_steps(fiber.span, leff_alpha_factor);
  ad::Var p_ln = tape.add_const(tape.scale(p_dbm, kLn10 / 10.0), -3.0 * kLn10);
  for (int s = 0; s < st.n_steps; ++s) {
    const bool last = s == st.n_steps - 1;
    ad::Var gain = tape.linear_const(tape.exp(p_ln), &fiber.coupling, nullptr);
    p_ln = tape.add_const(
        tape.add(p_ln, tape.scale(gain, last ? st.leff_last : st.leff_full)),
        -(last ? st.loss_last_nats : st.loss_full_nats));
  }
  return tape.add_const(tape.scale(p_ln, 10.0 / kLn10), 30.0);
}

ad::Var edfa_on_tape(ad::Tape& tape, ad::Var p_dbm, const EdfaMlp& model,
                     double p_out_target_dbm) {
  ad::Var peak = tape.max(p_dbm);
  ad::Var norm = tape.sub(p_dbm, peak);
  ad::Var total_in = total_power_dbm_on_tape(tape, p_dbm);
  ad::Var features = tape.concat(
      {tape.scale(norm, model.profile_feature_scale),
       tape.scale(total_in, model.power_feature_scale),
       tape.leaf(p_out_target_dbm * model.power_feature_scale)});
  ad::Var gain = mlp_forward_on_tape(tape, features, model);
  ad::Var raw = tape.add(p_dbm, gain);
  ad::Var shift =
      tape.sub(tape.leaf(p_out_target_dbm), total_power_dbm_on_tape(tape, raw));
  return tape.add(raw, shift);
}

}  // namespace

TapedCascade predict_on_tape(ad::Tape& tape, const LinkConfig& link,
                             std::span<const double> input_dbm,
                             std::optional<FiberModelKind> kind_override) {
  require(static_cast<int>(input_dbm.size()) == link.grid->n_channels,
          "input profile does not match the link grid");
  ad::Var x = tape.leaf(input_dbm, 1, link.grid->n_channels, true);

  // Launch stage: uniform shift to total p_launch (booster folded into the
  // profile preparation).
  ad::Var launch_shift = tape.sub(tape.leaf(link.p_launch_dbm),
                                  total_power_dbm_on_tape(tape, x));
  ad::Var p = tape.add(x, launch_shift);

  for (const LinkElement& el : link.elements) {
    if (const auto* fiber = std::get_if<LinkFiber>(&el)) {
      p = fiber_on_tape(tape, p, *fiber, link.leff_alpha_factor,
                        kind_override.value_or(fiber->kind));
    } else {
      const auto& edfa = std::get<LinkEdfa>(el);
      if (!edfa.model) {
        throw InvalidInput("link EDFA '" + edfa.model_path +
                           "' has no trained model loaded");
      }
      p = edfa_on_tape(tape, p, *edfa.model, link.p_launch_dbm);
    }
  }
  return TapedCascade{x, p};
}

PowerProfile predict_output(const LinkConfig& link, const PowerProfile& input,
                            std::optional<FiberModelKind> kind_override,
                            std::vector<double>* edfa_total_in_dbm) {
  const PowerProfile in_dbm = convert(input, Unit::Dbm);
  ad::Tape tape;
  const TapedCascade run = predict_on_tape(tape, link, in_dbm.values, kind_override);

  if (edfa_total_in_dbm) {
    // Recover per-EDFA input totals by replaying the plain path.
    edfa_total_in_dbm->clear();
    PowerProfile p = in_dbm;
    const double shift = link.p_launch_dbm - total_power_dbm(p);
    for (double& v : p.values) v += shift;
    for (const LinkElement& el : link.elements) {
      if (const auto* fiber = std::get_if<LinkFiber>(&el)) {
        const FiberModelKind kind = kind_override.value_or(fiber->kind);
        p = kind == FiberModelKind::Bulk
                ? propagate_bulk(p, fiber->span)
                : propagate_srs(p, fiber->span, link.raman, link.leff_alpha_factor);
      } else {
        const auto& edfa = std::get<LinkEdfa>(el);
        edfa_total_in_dbm->push_back(total_power_dbm(p));
        p = apply_edfa(p, *edfa.model, link.p_launch_dbm);
      }
    }
  }

  auto out = run.output_dbm.value();
  return PowerProfile{link.grid, {out.begin(), out.end()}, Unit::Dbm};
}

PowerProfile predict_output_ground_truth(const LinkConfig& link,
                                         const PowerProfile& input,
                                         uint64_t noise_seed,
                                         std::vector<double>* edfa_total_in_dbm) {
  Rng rng(noise_seed);
  if (edfa_total_in_dbm) edfa_total_in_dbm->clear();
  PowerProfile p = convert(input, Unit::Dbm);
  const double shift = link.p_launch_dbm - total_power_dbm(p);
  for (double& v : p.values) v += shift;

  for (const LinkElement& el : link.elements) {
    if (const auto* fiber = std::get_if<LinkFiber>(&el)) {
      // The measurement stand-in always carries the SRS physics.
      p = propagate_srs(p, fiber->span, link.raman, link.leff_alpha_factor);
    } else {
      const auto& edfa = std::get<LinkEdfa>(el);
      if (!edfa.device) {
        throw InvalidInput("link EDFA '" + edfa.device_path +
                           "' has no ground-truth device");
      }
      if (edfa_total_in_dbm) edfa_total_in_dbm->push_back(total_power_dbm(p));
      p = apply_virtual_edfa(p, *edfa.device, link.p_launch_dbm, &rng);
    }
  }
  return p;
}

}  // namespace linkopt
