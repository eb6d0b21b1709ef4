// linkopt: predict and optimize per-channel power profiles of multi-span
// optical links built from SRS fiber spans and ML-modeled EDFAs.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "linkopt/evaluate.hpp"
#include "linkopt/io.hpp"
#include "linkopt/optimizer.hpp"
#include "linkopt/profilegen.hpp"
#include "linkopt/testbed.hpp"
#include "linkopt/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace linkopt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

using Clock = std::chrono::steady_clock;

/// Writes <command>.manifest.json next to the outputs.
struct ManifestWriter {
  ManifestWriter(std::string cmd, fs::path directory)
      : command(std::move(cmd)), dir(std::move(directory)) {}

  std::string command;
  fs::path dir;
  json config = json::object();
  std::vector<std::string> outputs;
  Clock::time_point start = Clock::now();

  void add(const fs::path& p) { outputs.push_back(p.string()); }

  ~ManifestWriter() {
    try {
      io::RunManifest m;
      m.command = command;
      m.config_json = config.dump();
      m.outputs = outputs;
      m.duration_s = std::chrono::duration<double>(Clock::now() - start).count();
      io::write_manifest(dir / (command + ".manifest.json"), m);
    } catch (...) {
      // manifest failure must not mask the command's own status
    }
  }
};

fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

LinkConfig load_link(const std::string& path, const std::string& model_kind,
                     std::optional<double> leff_factor) {
  LinkConfig link = io::read_link_json(path, build_grid());
  if (leff_factor) {
    link.leff_alpha_factor = *leff_factor;
    finalize(link);
  }
  if (model_kind == "bulk") return with_fiber_kind(link, FiberModelKind::Bulk);
  if (model_kind == "srs") return with_fiber_kind(link, FiberModelKind::Srs);
  return link;  // "config": as written in the file
}

int cmd_gen_device(const std::string& params_file, const std::string& id,
                   std::optional<uint64_t> perturb_seed, const std::string& out_dir,
                   const std::string& out_name) {
  VirtualEdfaDevice dev;
  if (!params_file.empty()) dev = io::read_device_json(params_file);
  if (perturb_seed) dev = perturb_device(dev, id.empty() ? dev.id : id, *perturb_seed);
  else if (!id.empty()) dev.id = id;

  const fs::path dir = ensure_dir(out_dir);
  const fs::path out = dir / (out_name.empty() ? dev.id + ".device.json" : out_name);
  ManifestWriter mw{"gen-device", dir};
  mw.config = {{"params_file", params_file},
               {"id", dev.id},
               {"perturb_seed", perturb_seed ? json(*perturb_seed) : json()},
               {"g_ref_db", dev.g_ref_db},
               {"tilt_coeff", dev.tilt_coeff},
               {"ripple_amp_db", dev.ripple_amp_db},
               {"shb_coeff", dev.shb_coeff},
               {"noise_sigma_db", dev.noise_sigma_db}};
  io::write_device_json(out, dev);
  mw.add(out);
  std::printf("wrote %s (g_ref %.2f dB, tilt %.4f)\n", out.string().c_str(),
              dev.g_ref_db, dev.tilt_coeff);
  return kExitOk;
}

int cmd_gen_profiles(int n, double exc_min, double exc_max, uint64_t seed,
                     const std::string& out_dir) {
  const fs::path dir = ensure_dir(out_dir);
  ManifestWriter mw{"gen-profiles", dir};
  mw.config = {{"n", n}, {"excursion_min_db", exc_min},
               {"excursion_max_db", exc_max}, {"seed", seed}};
  auto grid = build_grid();
  const auto batch = generate_batch(grid, n, exc_min, exc_max, seed);

  std::string manifest_csv = "index,seed,excursion_db,filter_length\n";
  static constexpr int kFilterLengths[] = {1, 3, 5, 7, 9};
  for (int i = 0; i < n; ++i) {
    char name[40];
    std::snprintf(name, sizeof name, "profile_%04d.csv", i);
    const fs::path p = dir / name;
    io::write_profile_csv(p, batch[i]);
    mw.add(p);
    manifest_csv += std::to_string(i) + ',' +
                    std::to_string(derive_seed(seed, i)) + ',' +
                    io::format_double(excursion_db(batch[i])) + ',' +
                    std::to_string(kFilterLengths[i % 5]) + '\n';
  }
  const fs::path index = dir / "profiles.csv";
  {
    std::FILE* f = std::fopen(index.string().c_str(), "wb");
    if (!f) throw InvalidInput("cannot write " + index.string());
    std::fwrite(manifest_csv.data(), 1, manifest_csv.size(), f);
    std::fclose(f);
  }
  mw.add(index);
  std::printf("wrote %d profiles under %s\n", n, dir.string().c_str());
  return kExitOk;
}

int cmd_gen_dataset(const std::string& device_file, int n, uint64_t seed,
                    const std::string& out_dir, const std::string& out_name) {
  const VirtualEdfaDevice dev = io::read_device_json(device_file);
  const fs::path dir = ensure_dir(out_dir);
  const fs::path out = dir / (out_name.empty() ? dev.id + ".dataset.bin" : out_name);
  ManifestWriter mw{"gen-dataset", dir};
  mw.config = {{"device", device_file}, {"n", n}, {"seed", seed}};
  const GainDataset ds = generate_training_set(dev, build_grid(), n, seed);
  io::write_dataset(out, ds);
  mw.add(out);
  std::printf("wrote %s (%d samples from %s)\n", out.string().c_str(), ds.size(),
              dev.id.c_str());
  return kExitOk;
}

int cmd_train(const std::string& train_file, const std::string& val_file,
              const std::string& out_dir, const std::string& out_name,
              TrainConfig cfg) {
  const GainDataset train = io::read_dataset(train_file);
  const GainDataset val = io::read_dataset(val_file);
  const fs::path dir = ensure_dir(out_dir);
  const fs::path out =
      dir / (out_name.empty() ? train.device_id + ".model.json" : out_name);
  ManifestWriter mw{"train", dir};
  mw.config = {{"train", train_file},     {"val", val_file},
               {"batch_size", cfg.batch_size}, {"learning_rate", cfg.learning_rate},
               {"max_epochs", cfg.max_epochs}, {"seed", cfg.seed},
               {"adam", cfg.adam},        {"hidden1", cfg.hidden1},
               {"hidden2", cfg.hidden2}};
  const TrainResult r = train_edfa_model(train, val, cfg);
  io::write_model_json(out, r.model);
  mw.add(out);
  std::printf("trained %d epochs: train MSE %.5f dB^2, val MSE %.5f dB^2\n",
              r.epochs, r.train_mse_db2, r.val_mse_db2);
  std::printf("wrote %s\n", out.string().c_str());
  return kExitOk;
}

int cmd_simulate(const std::string& link_file, const std::string& profile_file,
                 const std::string& model_kind, std::optional<double> leff_factor,
                 bool ground_truth, uint64_t seed, const std::string& out_dir,
                 const std::string& out_name) {
  const LinkConfig link = load_link(link_file, model_kind, leff_factor);
  const PowerProfile input = io::read_profile_csv(profile_file, link.grid);
  const fs::path dir = ensure_dir(out_dir);
  const fs::path out = dir / (out_name.empty() ? "output_profile.csv" : out_name);
  ManifestWriter mw{"simulate", dir};
  mw.config = {{"link", link_file},   {"profile", profile_file},
               {"model", model_kind}, {"ground_truth", ground_truth},
               {"seed", seed},
               {"leff_alpha_factor", leff_factor ? json(*leff_factor) : json()},
               {"p_launch_dbm", link.p_launch_dbm}};

  std::vector<double> edfa_in;
  const PowerProfile output =
      ground_truth ? predict_output_ground_truth(link, input, seed, &edfa_in)
                   : predict_output(link, input, {}, &edfa_in);
  io::write_profile_csv(out, output);
  mw.add(out);
  std::printf("output: total %.3f dBm, excursion %.3f dB", total_power_dbm(output),
              excursion_db(output));
  for (size_t i = 0; i < edfa_in.size(); ++i) {
    std::printf("%s EDFA%zu in %.2f dBm", i ? "," : " |", i + 1, edfa_in[i]);
  }
  std::printf("\nwrote %s\n", out.string().c_str());
  return kExitOk;
}

int cmd_optimize(const std::string& link_file, const std::string& model_kind,
                 std::optional<double> leff_factor, OptimizationConfig cfg,
                 const std::string& target_file, const std::string& out_dir) {
  const LinkConfig link = load_link(link_file, model_kind, leff_factor);
  if (!target_file.empty()) {
    cfg.target_profile = io::read_profile_csv(target_file, link.grid);
  }
  const fs::path dir = ensure_dir(out_dir);
  ManifestWriter mw{"optimize", dir};
  mw.config = {{"link", link_file},
               {"cost", cfg.cost_kind == CostKind::MinFlatness ? "min-flatness"
                                                               : "target-mse"},
               {"target", target_file},
               {"max_iters", cfg.max_iters},
               {"step_size_db", cfg.step_size_db},
               {"stall_tol_db", cfg.stall_tol_db},
               {"stall_window", cfg.stall_window},
               {"excursion_bound_db", cfg.excursion_bound_db},
               {"softmin_tau_db", cfg.softmin_tau_db},
               {"n_starts", cfg.n_starts},
               {"seed", cfg.seed},
               {"model", model_kind}};

  const OptimizationResult r = optimize_input(link, cfg);

  const fs::path prof = dir / "optimized_profile.csv";
  io::write_profile_csv(prof, r.input_profile);
  mw.add(prof);
  const fs::path sim = dir / "simulated_output.csv";
  io::write_profile_csv(sim, r.final_output);
  mw.add(sim);
  const fs::path trace = dir / "cost_trace.csv";
  {
    std::string csv = "iter,cost_db\n";
    for (size_t i = 0; i < r.cost_trace.size(); ++i) {
      csv += std::to_string(i) + ',' + io::format_double(r.cost_trace[i]) + '\n';
    }
    std::FILE* f = std::fopen(trace.string().c_str(), "wb");
    if (!f) throw InvalidInput("cannot write " + trace.string());
    std::fwrite(csv.data(), 1, csv.size(), f);
    std::fclose(f);
  }
  mw.add(trace);

  std::printf("%s after %d iterations: cost %.6f, simulated output excursion "
              "%.4f dB\n",
              r.converged ? "converged" : "stopped", r.iterations,
              r.cost_trace.back(), excursion_db(r.final_output));
  std::printf("wrote %s\n", prof.string().c_str());
  return kExitOk;
}

int cmd_evaluate(const std::string& link_file, std::optional<double> leff_factor,
                 double p_min, double p_max, double p_step, double p_fixed,
                 int n_profiles, uint64_t seed, int workers, double opt_step,
                 bool skip_baselines, const std::string& out_dir) {
  const LinkConfig link_cfg = load_link(link_file, "config", leff_factor);
  const LinkConfig link_srs = with_fiber_kind(link_cfg, FiberModelKind::Srs);
  const LinkConfig link_bulk = with_fiber_kind(link_cfg, FiberModelKind::Bulk);
  const fs::path dir = ensure_dir(out_dir);
  ManifestWriter mw{"evaluate", dir};
  mw.config = {{"link", link_file},   {"power_min_dbm", p_min},
               {"power_max_dbm", p_max}, {"power_step_db", p_step},
               {"p_launch_dbm", p_fixed}, {"n_profiles", n_profiles},
               {"seed", seed},        {"workers", workers},
               {"opt_step_size_db", opt_step},
               {"baselines", !skip_baselines}};

  std::vector<double> powers;
  for (double p = p_min; p <= p_max + 1e-9; p += p_step) powers.push_back(p);
  const SweepReport sweep = run_power_sweep(link_cfg, powers, n_profiles, seed, workers);
  const fs::path sweep_csv = dir / "sweep_mse.csv";
  {
    std::string csv = "p_launch_dbm,model_kind,mean_mse_db2\n";
    for (const auto& pt : sweep.points) {
      csv += io::format_double(pt.p_launch_dbm);
      csv += pt.model_kind == FiberModelKind::Srs ? ",srs," : ",bulk,";
      csv += io::format_double(pt.mean_mse_db2) + "\n";
    }
    std::FILE* f = std::fopen(sweep_csv.string().c_str(), "wb");
    if (!f) throw InvalidInput("cannot write " + sweep_csv.string());
    std::fwrite(csv.data(), 1, csv.size(), f);
    std::fclose(f);
  }
  mw.add(sweep_csv);
  std::printf("sweep over %zu powers x %d profiles done\n", powers.size(),
              n_profiles);

  const auto channel = run_channel_mse(link_cfg, p_fixed, n_profiles, seed, workers);
  const fs::path chan_csv = dir / "channel_mse.csv";
  {
    std::string csv = "channel,freq_thz,mse_db2\n";
    for (int c = 0; c < link_cfg.grid->n_channels; ++c) {
      csv += std::to_string(c) + ',' +
             io::format_double(link_cfg.grid->frequencies_thz[c]) + ',' +
             io::format_double(channel[c]) + '\n';
    }
    std::FILE* f = std::fopen(chan_csv.string().c_str(), "wb");
    if (!f) throw InvalidInput("cannot write " + chan_csv.string());
    std::fwrite(csv.data(), 1, csv.size(), f);
    std::fclose(f);
  }
  mw.add(chan_csv);

  if (!skip_baselines) {
    OptimizationConfig ocfg;
    ocfg.step_size_db = opt_step;
    ocfg.seed = seed;
    const auto rows =
        run_baseline_comparison(link_srs, link_bulk, p_fixed, ocfg, seed);
    std::string csv = "baseline,excursion_db\n";
    for (const auto& row : rows) {
      csv += row.name + ',' + io::format_double(row.excursion_db) + '\n';
      const fs::path out_csv = dir / ("baseline_" + row.name + "_output.csv");
      io::write_profile_csv(out_csv, row.gt_output);
      mw.add(out_csv);
      const fs::path in_csv = dir / ("baseline_" + row.name + "_input.csv");
      io::write_profile_csv(in_csv, row.input);
      mw.add(in_csv);
      std::printf("  %-7s ground-truth excursion %7.3f dB\n", row.name.c_str(),
                  row.excursion_db);
    }
    const fs::path base_csv = dir / "baselines.csv";
    std::FILE* f = std::fopen(base_csv.string().c_str(), "wb");
    if (!f) throw InvalidInput("cannot write " + base_csv.string());
    std::fwrite(csv.data(), 1, csv.size(), f);
    std::fclose(f);
    mw.add(base_csv);
  }
  std::printf("reports under %s\n", dir.string().c_str());
  return kExitOk;
}

int cmd_demo(const std::string& out_dir, bool quick, uint64_t seed, int workers) {
  const fs::path dir = ensure_dir(out_dir);
  ManifestWriter mw{"demo", dir};
  mw.config = {{"quick", quick}, {"seed", seed}, {"workers", workers}};
  auto grid = build_grid();

  std::printf("[1/5] devices A1, A2, A3\n");
  const testbed::Devices dev = testbed::default_devices();
  for (const auto* d : {&dev.a1, &dev.a2, &dev.a3}) {
    const fs::path p = dir / (std::string(1, std::tolower(d->id[0])) +
                              d->id.substr(1) + ".device.json");
    io::write_device_json(p, *d);
    mw.add(p);
  }

  const int n_train = quick ? 10000 : testbed::kTrainSamples;
  const int n_val = quick ? 1000 : testbed::kValSamples;
  std::printf("[2/5] dataset: %d train / %d val samples from A1\n", n_train, n_val);
  const GainDataset train =
      generate_training_set(dev.a1, grid, n_train, testbed::kTrainSetSeed);
  const GainDataset val =
      generate_training_set(dev.a1, grid, n_val, testbed::kValSetSeed);
  const fs::path train_bin = dir / "a1.train.bin";
  const fs::path val_bin = dir / "a1.val.bin";
  io::write_dataset(train_bin, train);
  io::write_dataset(val_bin, val);
  mw.add(train_bin);
  mw.add(val_bin);

  std::printf("[3/5] training the gain surrogate%s\n",
              quick ? " (reduced budget)" : "");
  TrainConfig tcfg;
  tcfg.seed = testbed::kTrainSeed;
  if (quick) tcfg.max_epochs = 150;
  const TrainResult tr = train_edfa_model(train, val, tcfg);
  std::printf("      %d epochs, train MSE %.5f, val MSE %.5f dB^2\n", tr.epochs,
              tr.train_mse_db2, tr.val_mse_db2);
  const fs::path model_path = dir / "a1.model.json";
  io::write_model_json(model_path, tr.model);
  mw.add(model_path);

  auto model = std::make_shared<const EdfaMlp>(tr.model);
  const LinkConfig link = testbed::two_span_link(grid, model);
  const fs::path link_path = dir / "two_span.link.json";
  io::write_link_json(link_path, link);
  mw.add(link_path);

  std::printf("[4/5] optimizing the launch profile (%s)\n", link.id.c_str());
  OptimizationConfig ocfg;
  ocfg.step_size_db = 1.0;
  ocfg.seed = seed;
  const OptimizationResult opt = optimize_input(link, ocfg);
  std::printf("      %d iterations, simulated output excursion %.3f dB\n",
              opt.iterations, excursion_db(opt.final_output));
  const fs::path opt_prof = dir / "optimized_profile.csv";
  io::write_profile_csv(opt_prof, opt.input_profile);
  mw.add(opt_prof);

  std::printf("[5/5] evaluation sweep + baselines\n");
  const int n_profiles = quick ? 40 : 200;
  const SweepReport sweep = run_power_sweep(link, {12, 15, 18, 21}, n_profiles,
                                            seed, workers);
  for (const auto& pt : sweep.points) {
    std::printf("      p=%4.1f dBm %-4s mean MSE %.4f dB^2\n", pt.p_launch_dbm,
                pt.model_kind == FiberModelKind::Srs ? "srs" : "bulk",
                pt.mean_mse_db2);
  }
  const auto rows = run_baseline_comparison(
      link, with_fiber_kind(link, FiberModelKind::Bulk), 18.0, ocfg, seed);
  for (const auto& row : rows) {
    std::printf("      %-7s ground-truth excursion %7.3f dB\n", row.name.c_str(),
                row.excursion_db);
  }
  std::printf("demo artifacts under %s\n", dir.string().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"power-profile prediction and optimization for multi-span "
               "optical links"};
  app.require_subcommand(1);

  // gen-device
  auto* gd = app.add_subcommand("gen-device", "write a virtual EDFA device file");
  std::string gd_params, gd_id, gd_out_dir = ".", gd_out_name;
  std::optional<uint64_t> gd_perturb;
  gd->add_option("--params", gd_params, "base device JSON (defaults otherwise)");
  gd->add_option("--id", gd_id, "device id (A1, A2, ...)");
  gd->add_option("--perturb-seed", gd_perturb,
                 "derive a same-make device by +/-5% perturbation");
  gd->add_option("--out-dir", gd_out_dir, "output directory");
  gd->add_option("--out", gd_out_name, "output file name");

  // gen-profiles
  auto* gp = app.add_subcommand("gen-profiles", "write random smooth test profiles");
  int gp_n = 100;
  double gp_min = 0.0, gp_max = 15.0;
  uint64_t gp_seed = 1;
  std::string gp_out_dir = ".";
  gp->add_option("--n", gp_n, "number of profiles");
  gp->add_option("--excursion-min", gp_min, "minimum target excursion, dB");
  gp->add_option("--excursion-max", gp_max, "maximum target excursion, dB");
  gp->add_option("--seed", gp_seed, "batch seed");
  gp->add_option("--out-dir", gp_out_dir, "output directory");

  // gen-dataset
  auto* gs = app.add_subcommand("gen-dataset", "synthesize a gain dataset from a device");
  std::string gs_device, gs_out_dir = ".", gs_out_name;
  int gs_n = 20000;
  uint64_t gs_seed = 1;
  gs->add_option("--device", gs_device, "device JSON file")->required();
  gs->add_option("--n", gs_n, "number of samples");
  gs->add_option("--seed", gs_seed, "dataset seed");
  gs->add_option("--out-dir", gs_out_dir, "output directory");
  gs->add_option("--out", gs_out_name, "output file name");

  // train
  auto* tr = app.add_subcommand("train", "train the EDFA gain surrogate");
  std::string tr_train, tr_val, tr_out_dir = ".", tr_out_name;
  TrainConfig tr_cfg;
  bool tr_sgd = false;
  tr->add_option("--train", tr_train, "training dataset (.bin)")->required();
  tr->add_option("--val", tr_val, "validation dataset (.bin)")->required();
  tr->add_option("--batch", tr_cfg.batch_size, "mini-batch size");
  tr->add_option("--lr", tr_cfg.learning_rate, "learning rate");
  tr->add_option("--epochs", tr_cfg.max_epochs, "epoch budget");
  tr->add_option("--seed", tr_cfg.seed, "training seed");
  tr->add_flag("--sgd", tr_sgd, "plain SGD instead of Adam");
  tr->add_flag("--verbose", tr_cfg.verbose, "per-epoch progress");
  tr->add_option("--out-dir", tr_out_dir, "output directory");
  tr->add_option("--out", tr_out_name, "output file name");

  // simulate
  auto* sim = app.add_subcommand("simulate", "propagate a profile through a link");
  std::string sim_link, sim_profile, sim_model = "config", sim_out_dir = ".",
              sim_out_name;
  std::optional<double> sim_leff;
  bool sim_gt = false;
  uint64_t sim_seed = 1;
  sim->add_option("--link", sim_link, "link config JSON")->required();
  sim->add_option("--profile", sim_profile, "input profile CSV")->required();
  sim->add_option("--model", sim_model, "fiber model: srs, bulk or config")
      ->check(CLI::IsMember({"srs", "bulk", "config"}));
  sim->add_option("--leff-alpha-factor", sim_leff, "1 or 2")
      ->check(CLI::IsMember({1.0, 2.0}));
  sim->add_flag("--ground-truth", sim_gt, "use the virtual devices with noise");
  sim->add_option("--seed", sim_seed, "ground-truth noise seed");
  sim->add_option("--out-dir", sim_out_dir, "output directory");
  sim->add_option("--out", sim_out_name, "output file name");

  // optimize
  auto* opt = app.add_subcommand("optimize", "optimize the launch power profile");
  std::string opt_link, opt_model = "config", opt_cost = "min-flatness",
              opt_target, opt_out_dir = ".";
  std::optional<double> opt_leff;
  OptimizationConfig opt_cfg;
  opt->add_option("--link", opt_link, "link config JSON")->required();
  opt->add_option("--model", opt_model, "fiber model: srs, bulk or config")
      ->check(CLI::IsMember({"srs", "bulk", "config"}));
  opt->add_option("--cost", opt_cost, "cost kind")
      ->check(CLI::IsMember({"min-flatness", "target-mse"}));
  opt->add_option("--target", opt_target, "target profile CSV (target-mse)");
  opt->add_option("--max-iters", opt_cfg.max_iters, "iteration budget");
  opt->add_option("--step", opt_cfg.step_size_db, "base step size, dB");
  opt->add_option("--stall-tol", opt_cfg.stall_tol_db, "stall tolerance, dB");
  opt->add_option("--stall-window", opt_cfg.stall_window, "stall window, iters");
  opt->add_option("--excursion-bound", opt_cfg.excursion_bound_db,
                  "input excursion bound, dB");
  opt->add_option("--softmin-tau", opt_cfg.softmin_tau_db,
                  "softmin temperature, dB (0 = exact min)");
  opt->add_option("--starts", opt_cfg.n_starts, "multi-start count");
  opt->add_option("--seed", opt_cfg.seed, "seed for jittered restarts");
  opt->add_option("--leff-alpha-factor", opt_leff, "1 or 2")
      ->check(CLI::IsMember({1.0, 2.0}));
  opt->add_option("--out-dir", opt_out_dir, "output directory");

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "accuracy sweep and baseline comparison");
  std::string ev_link, ev_out_dir = ".";
  std::optional<double> ev_leff;
  double ev_pmin = 12.0, ev_pmax = 21.0, ev_pstep = 1.0, ev_pfixed = 18.0;
  int ev_n = 200, ev_workers = 1;
  uint64_t ev_seed = 1;
  double ev_opt_step = 1.0;
  bool ev_skip_baselines = false;
  ev->add_option("--link", ev_link, "link config JSON")->required();
  ev->add_option("--power-min", ev_pmin, "sweep start, dBm");
  ev->add_option("--power-max", ev_pmax, "sweep end, dBm");
  ev->add_option("--power-step", ev_pstep, "sweep step, dB");
  ev->add_option("--p-launch", ev_pfixed, "launch power for channel/baseline reports");
  ev->add_option("--n-profiles", ev_n, "profiles per sweep point");
  ev->add_option("--seed", ev_seed, "batch and noise seed");
  ev->add_option("--workers", ev_workers, "parallel workers");
  ev->add_option("--opt-step", ev_opt_step, "optimizer step for the baselines");
  ev->add_flag("--skip-baselines", ev_skip_baselines, "sweep and channel MSE only");
  ev->add_option("--leff-alpha-factor", ev_leff, "1 or 2")
      ->check(CLI::IsMember({1.0, 2.0}));
  ev->add_option("--out-dir", ev_out_dir, "output directory");

  // demo
  auto* dm = app.add_subcommand("demo", "end-to-end run on the default 2-span system");
  std::string dm_out_dir = "demo_out";
  bool dm_quick = false;
  uint64_t dm_seed = 1;
  int dm_workers = 1;
  dm->add_option("--out-dir", dm_out_dir, "output directory");
  dm->add_flag("--quick", dm_quick, "reduced budgets (minutes instead of tens)");
  dm->add_option("--seed", dm_seed, "seed");
  dm->add_option("--workers", dm_workers, "parallel workers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (gd->parsed()) {
      return cmd_gen_device(gd_params, gd_id, gd_perturb, gd_out_dir, gd_out_name);
    }
    if (gp->parsed()) {
      return cmd_gen_profiles(gp_n, gp_min, gp_max, gp_seed, gp_out_dir);
    }
    if (gs->parsed()) {
      return cmd_gen_dataset(gs_device, gs_n, gs_seed, gs_out_dir, gs_out_name);
    }
    if (tr->parsed()) {
      tr_cfg.adam = !tr_sgd;
      return cmd_train(tr_train, tr_val, tr_out_dir, tr_out_name, tr_cfg);
    }
    if (sim->parsed()) {
      return cmd_simulate(sim_link, sim_profile, sim_model, sim_leff, sim_gt,
                          sim_seed, sim_out_dir, sim_out_name);
    }
    if (opt->parsed()) {
      opt_cfg.cost_kind = opt_cost == "target-mse" ? CostKind::TargetMse
                                                   : CostKind::MinFlatness;
      return cmd_optimize(opt_link, opt_model, opt_leff, opt_cfg, opt_target,
                          opt_out_dir);
    }
    if (ev->parsed()) {
      return cmd_evaluate(ev_link, ev_leff, ev_pmin, ev_pmax, ev_pstep, ev_pfixed,
                          ev_n, ev_seed, ev_workers, ev_opt_step,
                          ev_skip_baselines, ev_out_dir);
    }
    if (dm->parsed()) {
      return cmd_demo(dm_out_dir, dm_quick, dm_seed, dm_workers);
    }
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumeric;
  } catch (const InvalidInput& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitOk;
}
