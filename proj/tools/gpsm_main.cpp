#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gpsm/gpsm.hpp"

namespace {

// Exit code categories: 2 configuration, 3 numeric, 4 I/O.
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct RunFlags {
  std::string preset;
  std::string config_path;
  int users = 0;
  int tx_antennas = 0;
  int rx_antennas = 0;
  int iba = 0;
  int modulation = 0;
  std::vector<std::string> snr_db;
  int realizations = 0;
  int vectors_per_frame = 0;
  std::string pattern_policy;
  std::uint64_t fixed_set_index = 0;
  int repetitions = 0;
  std::string timing;
  std::vector<double> eps;
  std::uint64_t seed = 0;
  std::uint64_t enumeration_cap = 0;
  int workers = 0;
  std::string format;
  std::string output;
};

void add_run_options(CLI::App& cmd, RunFlags& f) {
  cmd.add_option("--preset", f.preset,
                 "start from a canned setup: fig1a | fig1b | fig2 | fig3 | fig4");
  cmd.add_option("--config", f.config_path, "start from a JSON config file");
  cmd.add_option("--users", f.users, "number of downlink users");
  cmd.add_option("--tx-antennas", f.tx_antennas, "transmit antennas");
  cmd.add_option("--rx-antennas", f.rx_antennas, "receive antennas per user");
  cmd.add_option("--iba", f.iba, "information-bearing antennas per user");
  cmd.add_option("--modulation", f.modulation, "constellation order (2 or 4)");
  cmd.add_option("--snr-db", f.snr_db,
                 "SNR grid in dB; 'inf' runs the noise-free check");
  cmd.add_option("--realizations", f.realizations, "independent channel draws");
  cmd.add_option("--vectors-per-frame", f.vectors_per_frame,
                 "channel uses per frame");
  cmd.add_option("--pattern-policy", f.pattern_policy,
                 "fixed | random | optimized | optimized_notified");
  cmd.add_option("--fixed-set-index", f.fixed_set_index,
                 "candidate set used by the fixed policy");
  cmd.add_option("--repetitions", f.repetitions, "notification copies F");
  cmd.add_option("--timing", f.timing, "same_frame | pipelined");
  cmd.add_option("--eps", f.eps, "per-user energy fractions");
  cmd.add_option("--seed", f.seed, "master seed");
  cmd.add_option("--enumeration-cap", f.enumeration_cap,
                 "largest candidate-set count enumerable");
  cmd.add_option("--workers", f.workers, "worker threads (0 = all cores)");
  cmd.add_option("--format", f.format, "output format: csv | json");
  cmd.add_option("--output", f.output, "result file path");
}

nlohmann::json merge_flags(const CLI::App& cmd, const RunFlags& f) {
  nlohmann::json j;
  if (!f.preset.empty() && !f.config_path.empty())
    throw gpsm::ConfigError("pass either --preset or --config, not both");
  if (!f.preset.empty()) j = gpsm::preset_config(f.preset).to_json();
  if (!f.config_path.empty()) j = gpsm::RunConfig::from_file(f.config_path).to_json();

  auto set_if = [&](const char* flag, const char* key, const auto& value) {
    if (cmd.count(flag)) j[key] = value;
  };
  set_if("--users", "users", f.users);
  set_if("--tx-antennas", "tx_antennas", f.tx_antennas);
  set_if("--rx-antennas", "rx_antennas", f.rx_antennas);
  set_if("--iba", "iba", f.iba);
  set_if("--modulation", "modulation", f.modulation);
  if (cmd.count("--snr-db")) {
    nlohmann::json grid = nlohmann::json::array();
    for (const std::string& s : f.snr_db)
      grid.push_back(gpsm::detail::snr_to_json(gpsm::detail::parse_double(s)));
    j["snr_db"] = grid;
  }
  set_if("--realizations", "realizations", f.realizations);
  set_if("--vectors-per-frame", "vectors_per_frame", f.vectors_per_frame);
  set_if("--pattern-policy", "pattern_policy", f.pattern_policy);
  set_if("--fixed-set-index", "fixed_set_index", f.fixed_set_index);
  set_if("--repetitions", "repetitions", f.repetitions);
  set_if("--timing", "timing", f.timing);
  set_if("--eps", "eps", f.eps);
  set_if("--seed", "seed", f.seed);
  set_if("--enumeration-cap", "enumeration_cap", f.enumeration_cap);
  set_if("--workers", "workers", f.workers);
  set_if("--format", "format", f.format);
  set_if("--output", "output", f.output);
  return j;
}

int do_run(const CLI::App& cmd, const RunFlags& flags) {
  const gpsm::RunConfig cfg = gpsm::RunConfig::from_json(merge_flags(cmd, flags));
  gpsm::RunMetadata meta;
  meta.config_echo = cfg.to_json();
  meta.seed = cfg.scenario.master_seed;

  std::cout << "# gpsm " << gpsm::kVersion << "\n";
  std::cout << "# config: " << meta.config_echo.dump() << "\n";

  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<gpsm::BerRecord> records =
      gpsm::snr_sweep(cfg.scenario, cfg.workers);
  const auto t1 = std::chrono::steady_clock::now();
  const double wall = std::chrono::duration<double>(t1 - t0).count();

  for (const gpsm::BerRecord& r : records) {
    std::cout << "snr_db=" << gpsm::detail::format_double(r.snr_db)
              << " ber=" << gpsm::detail::format_double(r.ber)
              << " stderr=" << gpsm::detail::format_double(r.ber_stderr)
              << " bits=" << r.bits_sent << " errors=" << r.bit_errors
              << " notification_failures=" << r.notification_failures
              << " rejected_channels=" << r.rejected_channels << "\n";
  }
  if (!cfg.output.empty()) {
    gpsm::emit_results(records, cfg.format, cfg.output, meta);
    std::cout << "# wrote " << cfg.output << "\n";
  }
  std::printf("# wall_time_s=%.3f\n", wall);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Link-level BER simulator for precoded receive-antenna-pattern "
               "modulation downlinks"};
  app.set_version_flag("--version", gpsm::kVersion);
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "simulate an SNR sweep");
  RunFlags flags;
  add_run_options(*run_cmd, flags);

  auto* table_cmd =
      app.add_subcommand("table", "print pattern-space characteristics per iba");
  int table_n_r = 0;
  int table_m = 4;
  table_cmd->add_option("--rx-antennas", table_n_r, "receive antennas per user")
      ->required();
  table_cmd->add_option("--modulation", table_m, "constellation order (2 or 4)");

  auto* compare_cmd =
      app.add_subcommand("compare", "SNR gap between two stored curves");
  std::string path_a, path_b;
  double target_ber = 1e-3;
  compare_cmd->add_option("--a", path_a, "baseline curve file")->required();
  compare_cmd->add_option("--b", path_b, "comparison curve file")->required();
  compare_cmd->add_option("--target-ber", target_ber, "BER level for the gap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (run_cmd->parsed()) return do_run(*run_cmd, flags);
    if (table_cmd->parsed()) {
      std::cout << gpsm::render_characteristics(table_n_r, table_m);
      return 0;
    }
    if (compare_cmd->parsed()) {
      const double gap = gpsm::compare_curves(path_a, path_b, target_ber);
      std::cout << gpsm::detail::format_double(gap) << "\n";
      return 0;
    }
  } catch (const gpsm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const gpsm::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const gpsm::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
