#include "linkopt/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace linkopt::io {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << content;
  if (!out) throw InvalidInput("failed writing " + path.string());
}

json parse_json_file(const fs::path& path) {
  try {
    return json::parse(slurp(path));
  } catch (const json::parse_error& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

std::vector<double> json_doubles(const json& j, const char* key, size_t expect) {
  if (!j.contains(key)) throw InvalidInput(std::string("missing field ") + key);
  std::vector<double> v = j.at(key).get<std::vector<double>>();
  if (expect != 0 && v.size() != expect) {
    throw InvalidInput(std::string("field ") + key + " has wrong length");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_profile_csv(const fs::path& path, const PowerProfile& p) {
  validate(p);
  require(p.unit == Unit::Dbm, "profile CSV stores dBm values");
  std::ostringstream ss;
  ss << "freq_thz,power_dbm\n";
  for (int i = 0; i < p.grid->n_channels; ++i) {
    ss << format_double(p.grid->frequencies_thz[i]) << ','
       << format_double(p.values[i]) << '\n';
  }
  spit(path, ss.str());
}

PowerProfile read_profile_csv(const fs::path& path, GridPtr grid) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw InvalidInput(path.string() + ": empty file");
  }
  if (line.find("freq_thz") == std::string::npos) {
    throw InvalidInput(path.string() + " line 1: expected header freq_thz,power_dbm");
  }
  std::vector<double> freqs, powers;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    double f = 0.0, pw = 0.0;
    char trailing = 0;
    const int got = std::sscanf(line.c_str(), "%lf,%lf%c", &f, &pw, &trailing);
    if (got < 2 || (got == 3 && trailing != '\r')) {
      throw InvalidInput(path.string() + " line " + std::to_string(lineno) +
                         ": malformed row '" + line + "'");
    }
    if (!freqs.empty() && f <= freqs.back()) {
      throw InvalidInput(path.string() + " line " + std::to_string(lineno) +
                         ": frequencies must be strictly ascending");
    }
    freqs.push_back(f);
    powers.push_back(pw);
  }
  if (static_cast<int>(powers.size()) != grid->n_channels) {
    throw InvalidInput(path.string() + ": expected " +
                       std::to_string(grid->n_channels) + " data rows, found " +
                       std::to_string(powers.size()));
  }
  for (int i = 0; i < grid->n_channels; ++i) {
    if (std::abs(freqs[i] - grid->frequencies_thz[i]) > 1e-6) {
      throw InvalidInput(path.string() + " line " + std::to_string(i + 2) +
                         ": frequency does not match the grid");
    }
  }
  return make_profile(std::move(grid), std::move(powers), Unit::Dbm);
}

void write_device_json(const fs::path& path, const VirtualEdfaDevice& d) {
  json j{{"id", d.id},
         {"g_ref_db", d.g_ref_db},
         {"tilt_coeff", d.tilt_coeff},
         {"ripple_amp_db", d.ripple_amp_db},
         {"ripple_period_ch", d.ripple_period_ch},
         {"ripple_phase_rad", d.ripple_phase_rad},
         {"shb_coeff", d.shb_coeff},
         {"noise_sigma_db", d.noise_sigma_db}};
  spit(path, j.dump(2) + "\n");
}

VirtualEdfaDevice read_device_json(const fs::path& path) {
  const json j = parse_json_file(path);
  VirtualEdfaDevice d;
  try {
    d.id = j.value("id", d.id);
    d.g_ref_db = j.value("g_ref_db", d.g_ref_db);
    d.tilt_coeff = j.value("tilt_coeff", d.tilt_coeff);
    d.ripple_amp_db = j.value("ripple_amp_db", d.ripple_amp_db);
    d.ripple_period_ch = j.value("ripple_period_ch", d.ripple_period_ch);
    d.ripple_phase_rad = j.value("ripple_phase_rad", d.ripple_phase_rad);
    d.shb_coeff = j.value("shb_coeff", d.shb_coeff);
    d.noise_sigma_db = j.value("noise_sigma_db", d.noise_sigma_db);
  } catch (const json::exception& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
  require(d.ripple_period_ch > 0.0,
          path.string() + ": field ripple_period_ch must be positive");
  require(d.noise_sigma_db >= 0.0,
          path.string() + ": field noise_sigma_db must be non-negative");
  return d;
}

void write_model_json(const fs::path& path, const EdfaMlp& m) {
  validate(m);
  json j{{"dims", {m.w1.cols, m.w1.rows, m.w2.rows, m.w3.rows}},
         {"profile_feature_scale", m.profile_feature_scale},
         {"power_feature_scale", m.power_feature_scale},
         {"seed", m.seed},
         {"w1", m.w1.data},
         {"b1", m.b1},
         {"w2", m.w2.data},
         {"b2", m.b2},
         {"w3", m.w3.data},
         {"b3", m.b3}};
  spit(path, j.dump() + "\n");
}

EdfaMlp read_model_json(const fs::path& path) {
  const json j = parse_json_file(path);
  EdfaMlp m;
  try {
    const auto dims = j.at("dims").get<std::vector<int>>();
    if (dims.size() != 4) throw InvalidInput(path.string() + ": dims must have 4 entries");
    const int in = dims[0], h1 = dims[1], h2 = dims[2], out = dims[3];
    m.w1 = Mat(h1, in);
    m.w2 = Mat(h2, h1);
    m.w3 = Mat(out, h2);
    m.w1.data = json_doubles(j, "w1", m.w1.size());
    m.w2.data = json_doubles(j, "w2", m.w2.size());
    m.w3.data = json_doubles(j, "w3", m.w3.size());
    m.b1 = json_doubles(j, "b1", static_cast<size_t>(h1));
    m.b2 = json_doubles(j, "b2", static_cast<size_t>(h2));
    m.b3 = json_doubles(j, "b3", static_cast<size_t>(out));
    m.profile_feature_scale = j.value("profile_feature_scale", 1.0);
    m.power_feature_scale = j.value("power_feature_scale", 0.1);
    m.seed = j.value("seed", uint64_t{0});
  } catch (const json::exception& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
  validate(m);
  return m;
}

namespace {
constexpr char kDatasetMagic[8] = {'L', 'K', 'D', 'S', '0', '0', '0', '1'};
}

void write_dataset(const fs::path& path, const GainDataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  const uint64_t n = static_cast<uint64_t>(ds.size());
  const uint64_t nf = static_cast<uint64_t>(ds.n_features);
  const uint64_t nt = static_cast<uint64_t>(ds.n_targets);
  const uint64_t seed = ds.seed;
  const uint64_t id_len = ds.device_id.size();
  out.write(kDatasetMagic, sizeof kDatasetMagic);
  for (uint64_t v : {n, nf, nt, seed, id_len}) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  out.write(ds.device_id.data(), static_cast<std::streamsize>(id_len));
  out.write(reinterpret_cast<const char*>(ds.features.data()),
            static_cast<std::streamsize>(ds.features.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(ds.targets.data()),
            static_cast<std::streamsize>(ds.targets.size() * sizeof(double)));
  if (!out) throw InvalidInput("failed writing " + path.string());
}

GainDataset read_dataset(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kDatasetMagic, sizeof magic) != 0) {
    throw InvalidInput(path.string() + ": not a linkopt dataset file");
  }
  uint64_t n = 0, nf = 0, nt = 0, seed = 0, id_len = 0;
  for (uint64_t* v : {&n, &nf, &nt, &seed, &id_len}) {
    in.read(reinterpret_cast<char*>(v), sizeof *v);
  }
  if (!in || nf == 0 || nt == 0 || id_len > 4096) {
    throw InvalidInput(path.string() + ": corrupt dataset header");
  }
  GainDataset ds;
  ds.n_features = static_cast<int>(nf);
  ds.n_targets = static_cast<int>(nt);
  ds.seed = seed;
  ds.device_id.resize(id_len);
  in.read(ds.device_id.data(), static_cast<std::streamsize>(id_len));
  ds.features.resize(n * nf);
  ds.targets.resize(n * nt);
  in.read(reinterpret_cast<char*>(ds.features.data()),
          static_cast<std::streamsize>(ds.features.size() * sizeof(double)));
  in.read(reinterpret_cast<char*>(ds.targets.data()),
          static_cast<std::streamsize>(ds.targets.size() * sizeof(double)));
  if (!in) throw InvalidInput(path.string() + ": truncated dataset file");
  return ds;
}

LinkConfig read_link_json(const fs::path& path, GridPtr grid) {
  const json j = parse_json_file(path);
  const fs::path base = path.parent_path();
  LinkConfig link;
  link.grid = std::move(grid);
  link.id = j.value("id", path.stem().string());
  try {
    link.p_launch_dbm = j.value("p_launch_dbm", 18.0);
    link.leff_alpha_factor = j.value("leff_alpha_factor", 2.0);

    FiberSpan defaults;
    if (j.contains("fiber_defaults")) {
      const json& fd = j.at("fiber_defaults");
      defaults.alpha_db_per_km = fd.value("alpha_db_per_km", defaults.alpha_db_per_km);
      defaults.a_eff_m2 = fd.value("aeff_um2", defaults.a_eff_m2 * 1e12) * 1e-12;
      defaults.step_m = fd.value("step_m", defaults.step_m);
    }
    if (j.contains("raman")) {
      const json& r = j.at("raman");
      link.raman.slope_per_w_m_thz = r.value("cr_per_w_m_thz", link.raman.slope_per_w_m_thz);
      link.raman.peak_offset_thz = r.value("peak_offset_thz", link.raman.peak_offset_thz);
      link.raman.cutoff_thz = r.value("cutoff_thz", link.raman.cutoff_thz);
    }

    if (!j.contains("elements") || !j.at("elements").is_array() ||
        j.at("elements").empty()) {
      throw InvalidInput(path.string() + ": link needs a non-empty elements array");
    }
    for (const json& el : j.at("elements")) {
      if (el.contains("fiber")) {
        const json& f = el.at("fiber");
        LinkFiber fiber;
        fiber.span = defaults;
        if (!f.contains("length_km")) {
          throw InvalidInput(path.string() + ": fiber element needs length_km");
        }
        fiber.span.length_km = f.at("length_km").get<double>();
        fiber.span.alpha_db_per_km = f.value("alpha_db_per_km", fiber.span.alpha_db_per_km);
        fiber.span.a_eff_m2 = f.value("aeff_um2", fiber.span.a_eff_m2 * 1e12) * 1e-12;
        fiber.span.step_m = f.value("step_m", fiber.span.step_m);
        const std::string kind = f.value("model", "srs");
        if (kind == "srs") {
          fiber.kind = FiberModelKind::Srs;
        } else if (kind == "bulk") {
          fiber.kind = FiberModelKind::Bulk;
        } else {
          throw InvalidInput(path.string() + ": fiber model must be srs or bulk");
        }
        link.elements.emplace_back(std::move(fiber));
      } else if (el.contains("edfa")) {
        const json& e = el.at("edfa");
        LinkEdfa edfa;
        edfa.model_path = e.value("model", "");
        edfa.device_path = e.value("device", "");
        if (!edfa.model_path.empty()) {
          const fs::path mp = fs::path(edfa.model_path).is_absolute()
                                  ? fs::path(edfa.model_path)
                                  : base / edfa.model_path;
          if (!fs::exists(mp)) {
            throw InvalidInput(path.string() + ": EDFA model file not found: " +
                               mp.string());
          }
          edfa.model = std::make_shared<EdfaMlp>(read_model_json(mp));
        }
        if (!edfa.device_path.empty()) {
          const fs::path dp = fs::path(edfa.device_path).is_absolute()
                                  ? fs::path(edfa.device_path)
                                  : base / edfa.device_path;
          if (!fs::exists(dp)) {
            throw InvalidInput(path.string() + ": EDFA device file not found: " +
                               dp.string());
          }
          edfa.device = read_device_json(dp);
        }
        link.elements.emplace_back(std::move(edfa));
      } else {
        throw InvalidInput(path.string() + ": element must be fiber or edfa");
      }
    }
  } catch (const json::exception& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
  finalize(link);
  return link;
}

void write_link_json(const fs::path& path, const LinkConfig& link) {
  json elements = json::array();
  for (const LinkElement& el : link.elements) {
    if (const auto* fiber = std::get_if<LinkFiber>(&el)) {
      elements.push_back(
          {{"fiber",
            {{"length_km", fiber->span.length_km},
             {"alpha_db_per_km", fiber->span.alpha_db_per_km},
             {"aeff_um2", fiber->span.a_eff_m2 * 1e12},
             {"step_m", fiber->span.step_m},
             {"model", fiber->kind == FiberModelKind::Srs ? "srs" : "bulk"}}}});
    } else {
      const auto& edfa = std::get<LinkEdfa>(el);
      elements.push_back(
          {{"edfa",
            {{"model", edfa.model_path}, {"device", edfa.device_path}}}});
    }
  }
  json j{{"id", link.id},
         {"p_launch_dbm", link.p_launch_dbm},
         {"leff_alpha_factor", link.leff_alpha_factor},
         {"raman",
          {{"cr_per_w_m_thz", link.raman.slope_per_w_m_thz},
           {"peak_offset_thz", link.raman.peak_offset_thz},
           {"cutoff_thz", link.raman.cutoff_thz}}},
         {"elements", elements}};
  spit(path, j.dump(2) + "\n");
}

void write_manifest(const fs::path& path, const RunManifest& m) {
  json j{{"command", m.command},
         {"config", json::parse(m.config_json.empty() ? "{}" : m.config_json)},
         {"outputs", m.outputs},
         {"duration_s", m.duration_s}};
  spit(path, j.dump(2) + "\n");
}

}  // namespace linkopt::io
