#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "linkopt/cascade.hpp"
#include "linkopt/edfa.hpp"
#include "linkopt/grid.hpp"

namespace linkopt::io {

// Profile CSV: header `freq_thz,power_dbm`, one row per channel, ascending
// frequency. Values are written with 17 significant digits so a read/write
// round trip is exact.
void write_profile_csv(const std::filesystem::path& path, const PowerProfile& p);
PowerProfile read_profile_csv(const std::filesystem::path& path, GridPtr grid);

void write_device_json(const std::filesystem::path& path,
                       const VirtualEdfaDevice& device);
VirtualEdfaDevice read_device_json(const std::filesystem::path& path);

void write_model_json(const std::filesystem::path& path, const EdfaMlp& model);
EdfaMlp read_model_json(const std::filesystem::path& path);

// Dataset file: small binary header followed by row-major doubles
// (n_features columns of features, then n_targets of targets per row).
void write_dataset(const std::filesystem::path& path, const GainDataset& ds);
GainDataset read_dataset(const std::filesystem::path& path);

/// Link config JSON. Referenced model/device files are loaded relative to
/// the config's directory; missing files raise InvalidInput.
LinkConfig read_link_json(const std::filesystem::path& path, GridPtr grid);
void write_link_json(const std::filesystem::path& path, const LinkConfig& link);

/// Run manifest: command, config snapshot, seeds, outputs, duration.
struct RunManifest {
  std::string command;
  std::string config_json;  ///< echo of the effective configuration
  std::vector<std::string> outputs;
  double duration_s = 0.0;
};
void write_manifest(const std::filesystem::path& path, const RunManifest& m);

std::string format_double(double v);

}  // namespace linkopt::io
