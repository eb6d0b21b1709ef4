#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "linkopt/autodiff.hpp"
#include "linkopt/edfa.hpp"
#include "linkopt/fiber.hpp"
#include "linkopt/grid.hpp"

namespace linkopt {

enum class FiberModelKind { Bulk, Srs };

struct LinkFiber {
  FiberSpan span;
  FiberModelKind kind = FiberModelKind::Srs;
  /// SRS coupling matrix for the link's grid; built by finalize().
  Mat coupling;
};

struct LinkEdfa {
  std::string model_path;
  std::string device_path;
  std::shared_ptr<const EdfaMlp> model;   ///< surrogate used by predict_output
  std::optional<VirtualEdfaDevice> device;  ///< ground-truth stand-in
};

using LinkElement = std::variant<LinkFiber, LinkEdfa>;

/// Ordered cascade of fibers and EDFAs plus the launch power. The input
/// profile is shifted to total p_launch before the first element, and every
/// EDFA re-amplifies to total p_launch (constant output power mode).
struct LinkConfig {
  std::string id = "link";
  GridPtr grid;
  double p_launch_dbm = 18.0;
  RamanGainModel raman;
  double leff_alpha_factor = 2.0;
  std::vector<LinkElement> elements;
};

/// Validates the config and builds per-fiber coupling matrices. Must be
/// called after assembling elements and before any prediction.
void finalize(LinkConfig& link);

/// Copy of the link with every fiber forced to the given model kind.
LinkConfig with_fiber_kind(const LinkConfig& link, FiberModelKind kind);

int count_fibers(const LinkConfig& link);
int count_edfas(const LinkConfig& link);

/// True when both links have the same element sequence, span geometry and
/// devices, so they differ at most in fiber model kind.
bool same_topology(const LinkConfig& a, const LinkConfig& b);

/// Taped end-to-end forward pass. input_dbm holds per-channel dBm values;
/// the returned input leaf carries gradients after Tape::backward on any
/// scalar derived from output_dbm. The link must outlive the tape.
struct TapedCascade {
  ad::Var input_dbm;
  ad::Var output_dbm;
};
TapedCascade predict_on_tape(ad::Tape& tape, const LinkConfig& link,
                             std::span<const double> input_dbm,
                             std::optional<FiberModelKind> kind_override = {});

/// Model-path prediction (MLP EDFAs + configured fiber kind).
/// edfa_total_in_dbm, when given, receives each EDFA's total input power.
PowerProfile predict_output(const LinkConfig& link, const PowerProfile& input,
                            std::optional<FiberModelKind> kind_override = {},
                            std::vector<double>* edfa_total_in_dbm = nullptr);

/// Measurement oracle: virtual devices with noise, SRS physics in every
/// fiber regardless of the configured model kind. Deterministic per seed.
PowerProfile predict_output_ground_truth(const LinkConfig& link,
                                         const PowerProfile& input,
                                         uint64_t noise_seed,
                                         std::vector<double>* edfa_total_in_dbm = nullptr);

/// Total power in dBm of a taped dBm profile.
ad::Var total_power_dbm_on_tape(ad::Tape& tape, ad::Var profile_dbm);

}  // namespace linkopt
