#pragma once

#include <memory>

#include "linkopt/cascade.hpp"
#include "linkopt/edfa.hpp"
#include "linkopt/train.hpp"

namespace linkopt::testbed {

/// Seeds of the default virtual testbed. A2/A3 are same-make perturbations
/// of A1; the tilt factors land slightly below 1 so the trained-on-A1 model
/// over-predicts the tilt a little, which is the regime where the four
/// baseline responses separate cleanly.
inline constexpr uint64_t kA2PerturbSeed = 1021;
inline constexpr uint64_t kA3PerturbSeed = 1024;
inline constexpr uint64_t kTrainSetSeed = 111;
inline constexpr uint64_t kValSetSeed = 222;
inline constexpr uint64_t kTrainSeed = 7;
inline constexpr int kTrainSamples = 20000;
inline constexpr int kValSamples = 2000;

struct Devices {
  VirtualEdfaDevice a1, a2, a3;
};

Devices default_devices();

/// Trains the A1 gain surrogate with the default recipe (Adam, batch 64,
/// lr 1e-3, 20k/2k samples). Takes minutes; deterministic.
std::shared_ptr<const EdfaMlp> train_default_model(GridPtr grid);

/// Default 2-span system: 90 km -> A2 -> 70 km -> A3 at 18 dBm, SRS fibers.
LinkConfig two_span_link(GridPtr grid, std::shared_ptr<const EdfaMlp> model);

/// Default 3-span system: the 2-span chain followed by 80 km -> A1.
LinkConfig three_span_link(GridPtr grid, std::shared_ptr<const EdfaMlp> model);

}  // namespace linkopt::testbed
