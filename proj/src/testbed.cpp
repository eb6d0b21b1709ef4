#include "linkopt/testbed.hpp"

namespace linkopt::testbed {

Devices default_devices() {
  Devices d;
  d.a1 = VirtualEdfaDevice{};
  d.a2 = perturb_device(d.a1, "A2", kA2PerturbSeed);
  d.a3 = perturb_device(d.a1, "A3", kA3PerturbSeed);
  return d;
}

std::shared_ptr<const EdfaMlp> train_default_model(GridPtr grid) {
  const Devices dev = default_devices();
  const GainDataset train =
      generate_training_set(dev.a1, grid, kTrainSamples, kTrainSetSeed);
  const GainDataset val = generate_training_set(dev.a1, grid, kValSamples, kValSetSeed);
  TrainConfig cfg;
  cfg.seed = kTrainSeed;
  return std::make_shared<EdfaMlp>(train_edfa_model(train, val, cfg).model);
}

namespace {
LinkConfig base_link(GridPtr grid, std::shared_ptr<const EdfaMlp> model,
                     const Devices& dev) {
  LinkConfig link;
  link.grid = std::move(grid);
  link.id = "A2-90km-A3-70km";
  link.p_launch_dbm = 18.0;
  link.elements.push_back(
      LinkFiber{FiberSpan{.length_km = 90.0}, FiberModelKind::Srs, {}});
  link.elements.push_back(LinkEdfa{"a1.model.json", "a2.device.json", model, dev.a2});
  link.elements.push_back(
      LinkFiber{FiberSpan{.length_km = 70.0}, FiberModelKind::Srs, {}});
  link.elements.push_back(LinkEdfa{"a1.model.json", "a3.device.json", model, dev.a3});
  return link;
}
}  // namespace

LinkConfig two_span_link(GridPtr grid, std::shared_ptr<const EdfaMlp> model) {
  const Devices dev = default_devices();
  LinkConfig link = base_link(std::move(grid), std::move(model), dev);
  finalize(link);
  return link;
}

LinkConfig three_span_link(GridPtr grid, std::shared_ptr<const EdfaMlp> model) {
  const Devices dev = default_devices();
  LinkConfig link = base_link(grid, model, dev);
  link.id = "A2-90km-A3-70km-A1-80km";
  link.elements.push_back(
      LinkFiber{FiberSpan{.length_km = 80.0}, FiberModelKind::Srs, {}});
  link.elements.push_back(
      LinkEdfa{"a1.model.json", "a1.device.json", std::move(model), dev.a1});
  finalize(link);
  return link;
}

}  // namespace linkopt::testbed
