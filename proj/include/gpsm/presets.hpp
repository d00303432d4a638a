#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "gpsm/errors.hpp"
#include "gpsm/pattern_space.hpp"
#include "gpsm/run_config.hpp"

namespace gpsm {

/// Canned configurations matching the reference study setups. Flags can
/// override individual fields afterwards.
inline RunConfig preset_config(const std::string& name) {
  RunConfig c;
  SimScenario& sc = c.scenario;
  sc.m = 4;
  sc.n_iba = 2;
  sc.channel_realizations = 1000;
  sc.vectors_per_frame = 3200;
  sc.master_seed = 1;
  sc.snr_grid_db.clear();
  for (int s = 0; s <= 24; s += 2) sc.snr_grid_db.push_back(static_cast<double>(s));

  if (name == "fig1a") {
    sc.k_users = 1;
    sc.n_t = 8;
    sc.n_r = 4;
    sc.policy.kind = PatternSelection::random;
  } else if (name == "fig1b") {
    sc.k_users = 1;
    sc.n_t = 10;
    sc.n_r = 5;
    sc.policy.kind = PatternSelection::random;
  } else if (name == "fig2") {
    sc.k_users = 1;
    sc.n_t = 8;
    sc.n_r = 4;
    sc.policy.kind = PatternSelection::optimized;
  } else if (name == "fig3") {
    sc.k_users = 2;
    sc.n_t = 8;
    sc.n_r = 4;
    sc.policy.kind = PatternSelection::optimized;
  } else if (name == "fig4") {
    sc.k_users = 2;
    sc.n_t = 8;
    sc.n_r = 4;
    sc.policy.kind = PatternSelection::optimized_notified;
    sc.policy.repetitions = 10;
  } else {
    throw ConfigError("unknown preset '" + name +
                      "' (expected fig1a | fig1b | fig2 | fig3 | fig4)");
  }
  return c;
}

struct CharacteristicsRow {
  int n_iba = 0;
  std::uint64_t c_t = 0;
  std::uint64_t n_c = 0;
  std::uint64_t bits_per_use = 0;  // per-user spatial + symbol bits
  std::uint64_t l = 0;
};

/// One row per n_iba in [1, n_r]: pattern count, used patterns, per-user
/// throughput, and candidate set count.
inline std::vector<CharacteristicsRow> characteristics_table(int n_r, int m) {
  std::vector<CharacteristicsRow> rows;
  rows.reserve(static_cast<std::size_t>(n_r));
  for (int iba = 1; iba <= n_r; ++iba) {
    const PatternSpaceSpec spec(n_r, iba);
    CharacteristicsRow row;
    row.n_iba = iba;
    row.c_t = spec.c_t;
    row.n_c = spec.n_c;
    row.bits_per_use = throughput(1, spec.k_ssk, iba, m);
    row.l = spec.l;
    rows.push_back(row);
  }
  return rows;
}

inline std::string render_characteristics(int n_r, int m) {
  const std::vector<CharacteristicsRow> rows = characteristics_table(n_r, m);
  std::ostringstream out;
  out << "n_iba,c_t,n_c,bits_per_use,l\n";
  for (const CharacteristicsRow& r : rows)
    out << r.n_iba << ',' << r.c_t << ',' << r.n_c << ',' << r.bits_per_use << ','
        << r.l << "\n";
  return out.str();
}

}  // namespace gpsm
