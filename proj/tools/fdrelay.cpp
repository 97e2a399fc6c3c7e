// Command-line experiment runner.

#include "fdrelay/harness.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string out;
  bool paper_scale = false;
  std::optional<double> rho_r_db;
  std::optional<double> eta_r_db;
  std::optional<double> kappa_db;
  std::optional<double> beta_db;
  std::optional<int> nt;
  std::optional<int> mr;
  std::optional<int> train_len;
  std::optional<int> workers;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "key=value or JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "root seed");
  cmd->add_option("--trials", f.trials, "channel realizations per sweep value");
  cmd->add_option("--out", f.out, "output CSV path");
  cmd->add_flag("--paper-scale", f.paper_scale, "full trial counts and time-share grid");
  cmd->add_option("--rho-r-db", f.rho_r_db, "relay SNR [dB]");
  cmd->add_option("--eta-r-db", f.eta_r_db, "relay self-interference INR [dB]");
  cmd->add_option("--kappa-db", f.kappa_db, "transmitter dynamic range [dB]");
  cmd->add_option("--beta-db", f.beta_db, "receiver dynamic range [dB]");
  cmd->add_option("--nt", f.nt, "transmit antennas per node");
  cmd->add_option("--mr", f.mr, "receive antennas per node");
  cmd->add_option("--train-len", f.train_len, "pilot blocks per training period");
  cmd->add_option("--workers", f.workers, "worker threads (0: all cores)");
}

fdrelay::ExperimentConfig resolve(fdrelay::Experiment e, const Flags& f) {
  using fdrelay::apply_setting;
  fdrelay::ExperimentConfig cfg = f.config.empty() ? fdrelay::default_config(e, f.paper_scale)
                                                   : fdrelay::parse_config(f.config, e, f.paper_scale);
  auto set = [&](const char* key, const auto& v) {
    if (v) apply_setting(cfg, key, std::to_string(*v));
  };
  set("seed", f.seed);
  set("trials", f.trials);
  set("rho_r_db", f.rho_r_db);
  set("eta_r_db", f.eta_r_db);
  set("kappa_db", f.kappa_db);
  set("beta_db", f.beta_db);
  set("n", f.nt);
  set("m", f.mr);
  set("train_len", f.train_len);
  set("workers", f.workers);
  if (!f.out.empty()) cfg.out_path = f.out;
  if (cfg.out_path.empty()) cfg.out_path = std::string(fdrelay::to_string(e)) + ".csv";
  cfg.validate();
  return cfg;
}

int run(fdrelay::Experiment e, const Flags& f) {
  const fdrelay::ExperimentConfig cfg = resolve(e, f);
  const auto start = std::chrono::steady_clock::now();
  const auto records = fdrelay::run_experiment(cfg);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  fdrelay::emit_csv(records, cfg.out_path);
  fdrelay::write_metadata(cfg, records, elapsed, cfg.out_path + ".meta.json");
  if (e == fdrelay::Experiment::kContour || e == fdrelay::Experiment::kApproxContour) {
    fdrelay::emit_contour_csv(fdrelay::contour_from_records(cfg, records),
                              cfg.out_path + ".grid.csv");
  }

  std::printf("%-12s %-10s %6s %12s %12s\n", "sweep", "scheme", "n", "mean_lower", "mean_upper");
  for (const auto& s : fdrelay::summarize(records)) {
    std::string sweep = std::to_string(s.sweep_value);
    if (e == fdrelay::Experiment::kContour || e == fdrelay::Experiment::kApproxContour) {
      sweep += "/" + std::to_string(s.sweep_value_2);
    }
    std::printf("%-12s %-10s %6d %12.4f %12.4f\n", sweep.c_str(), s.scheme.c_str(), s.count,
                s.mean_lower, s.mean_upper);
  }
  std::printf("wrote %s (%zu records, %.1f s)\n", cfg.out_path.c_str(), records.size(), elapsed);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-duplex MIMO relay rate experiments"};
  app.require_subcommand(1);

  Flags flags;
  const std::pair<const char*, fdrelay::Experiment> commands[] = {
      {"sweep-training", fdrelay::Experiment::kTrainingSweep},
      {"sweep-inr", fdrelay::Experiment::kInrSweep},
      {"sweep-snr", fdrelay::Experiment::kSnrSweep},
      {"contour", fdrelay::Experiment::kContour},
      {"approx-contour", fdrelay::Experiment::kApproxContour},
      {"sweep-antennas", fdrelay::Experiment::kAntennaSweep},
  };
  for (const auto& [name, e] : commands) {
    auto* cmd = app.add_subcommand(name, std::string("run the ") +
                                             std::string(fdrelay::to_string(e)) + " experiment");
    add_flags(cmd, flags);
  }
  CLI11_PARSE(app, argc, argv);

  for (const auto& [name, e] : commands) {
    if (app.got_subcommand(name)) {
      try {
        return run(e, flags);
      } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << '\n';
        return 1;
      }
    }
  }
  return 1;
}
