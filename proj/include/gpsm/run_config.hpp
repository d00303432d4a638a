#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpsm/errors.hpp"
#include "gpsm/montecarlo.hpp"
#include "gpsm/results_io.hpp"

namespace gpsm {

/// Full description of one simulation run: the scenario plus output plumbing.
/// Serializes to a flat JSON object with one named key per parameter; the
/// echoed config in result files is exactly this serialization, so
/// parse -> emit -> parse is a fixed point.
struct RunConfig {
  SimScenario scenario;
  std::string output;  // result file path; empty = stdout summary only
  OutputFormat format = OutputFormat::csv;
  int workers = 1;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["users"] = scenario.k_users;
    j["tx_antennas"] = scenario.n_t;
    j["rx_antennas"] = scenario.n_r;
    j["iba"] = scenario.n_iba;
    j["modulation"] = scenario.m;
    nlohmann::json grid = nlohmann::json::array();
    for (double s : scenario.snr_grid_db) grid.push_back(detail::snr_to_json(s));
    j["snr_db"] = grid;
    j["realizations"] = scenario.channel_realizations;
    j["vectors_per_frame"] = scenario.vectors_per_frame;
    j["pattern_policy"] = to_string(scenario.policy.kind);
    j["fixed_set_index"] = scenario.policy.fixed_set_index;
    j["repetitions"] = scenario.policy.repetitions;
    j["timing"] = to_string(scenario.timing);
    j["eps"] = scenario.eps_or_default();
    j["seed"] = scenario.master_seed;
    j["enumeration_cap"] = scenario.enumeration_cap;
    j["workers"] = workers;
    j["format"] = format == OutputFormat::csv ? "csv" : "json";
    j["output"] = output;
    return j;
  }

  static RunConfig from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    static const std::set<std::string> known = {
        "users",        "tx_antennas",     "rx_antennas",
        "iba",          "modulation",      "snr_db",
        "realizations", "vectors_per_frame", "pattern_policy",
        "fixed_set_index", "repetitions",  "timing",
        "eps",          "seed",            "enumeration_cap",
        "workers",      "format",          "output"};
    for (const auto& [key, value] : j.items())
      if (!known.count(key)) throw ConfigError("config: unknown key '" + key + "'");

    auto require = [&](const char* key) -> const nlohmann::json& {
      if (!j.contains(key))
        throw ConfigError("config: missing mandatory key '" + std::string(key) + "'");
      return j.at(key);
    };

    RunConfig c;
    try {
      c.scenario.k_users = require("users").get<int>();
      c.scenario.n_t = require("tx_antennas").get<int>();
      c.scenario.n_r = require("rx_antennas").get<int>();
      c.scenario.n_iba = require("iba").get<int>();
      c.scenario.m = require("modulation").get<int>();
      c.scenario.snr_grid_db.clear();
      for (const nlohmann::json& s : require("snr_db"))
        c.scenario.snr_grid_db.push_back(detail::snr_from_json(s));
      c.scenario.channel_realizations = require("realizations").get<int>();
      c.scenario.vectors_per_frame = require("vectors_per_frame").get<int>();
      c.scenario.policy.kind =
          pattern_selection_from_string(require("pattern_policy").get<std::string>());
      c.scenario.master_seed = require("seed").get<std::uint64_t>();
      if (j.contains("fixed_set_index"))
        c.scenario.policy.fixed_set_index = j.at("fixed_set_index").get<std::uint64_t>();
      if (j.contains("repetitions"))
        c.scenario.policy.repetitions = j.at("repetitions").get<int>();
      if (j.contains("timing"))
        c.scenario.timing =
            notification_timing_from_string(j.at("timing").get<std::string>());
      if (j.contains("eps"))
        c.scenario.eps = j.at("eps").get<std::vector<double>>();
      if (j.contains("enumeration_cap"))
        c.scenario.enumeration_cap = j.at("enumeration_cap").get<std::uint64_t>();
      if (j.contains("workers")) c.workers = j.at("workers").get<int>();
      if (j.contains("format"))
        c.format = output_format_from_string(j.at("format").get<std::string>());
      if (j.contains("output")) c.output = j.at("output").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
    if (c.workers < 0) throw ConfigError("config: workers must be >= 0");
    c.scenario.validate();
    return c;
  }

  static RunConfig from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
      f >> j;
    } catch (const nlohmann::json::exception& e) {
      throw IoError("'" + path + "': JSON parse error: " + e.what());
    }
    return from_json(j);
  }
};

}  // namespace gpsm
