#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpsm/errors.hpp"
#include "gpsm/montecarlo.hpp"
#include "gpsm/version.hpp"

namespace gpsm {

enum class OutputFormat { csv, json };

inline OutputFormat output_format_from_string(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw ConfigError("unknown output format '" + s + "' (expected csv | json)");
}

/// Provenance carried with every result file. Wall time is intentionally not
/// part of it: files must be byte-identical across repeated runs of the same
/// configuration, so timing goes to the console instead.
struct RunMetadata {
  nlohmann::json config_echo;
  std::uint64_t seed = 0;
  std::string version = kVersion;
};

namespace detail {

/// Shortest decimal form that parses back to the same double; infinities
/// print as "inf" (JSON has no literal for them).
/// Shortest decimal string that parses back to exactly v. Candidates at every
/// precision are compared by length, not precision: %g switches to scientific
/// notation at low precision, where "1e+01" round-trips but "10" is shorter.
inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char best[40];
  std::snprintf(best, sizeof(best), "%.17g", v);
  for (int prec = 1; prec <= 17; ++prec) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v && std::strlen(buf) < std::strlen(best)) std::strcpy(best, buf);
  }
  return best;
}

inline double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw IoError("malformed number '" + s + "'");
  return v;
}

inline nlohmann::json snr_to_json(double snr_db) {
  if (std::isinf(snr_db)) return snr_db > 0 ? "inf" : "-inf";
  return snr_db;
}

inline double snr_from_json(const nlohmann::json& j) {
  if (j.is_string()) return parse_double(j.get<std::string>());
  return j.get<double>();
}

}  // namespace detail

inline constexpr const char* kCsvHeader =
    "snr_db,ber,bits_sent,bit_errors,spatial_bit_errors,symbol_bit_errors,"
    "per_user_ber,notification_failures,rejected_channels";

inline nlohmann::json record_to_json(const BerRecord& r) {
  nlohmann::json j;
  j["snr_db"] = detail::snr_to_json(r.snr_db);
  j["ber"] = r.ber;
  j["bits_sent"] = r.bits_sent;
  j["bit_errors"] = r.bit_errors;
  j["spatial_bit_errors"] = r.spatial_bit_errors;
  j["symbol_bit_errors"] = r.symbol_bit_errors;
  j["per_user_ber"] = r.per_user_ber;
  j["notification_failures"] = r.notification_failures;
  j["rejected_channels"] = r.rejected_channels;
  return j;
}

inline BerRecord record_from_json(const nlohmann::json& j) {
  BerRecord r;
  r.snr_db = detail::snr_from_json(j.at("snr_db"));
  r.ber = j.at("ber").get<double>();
  r.bits_sent = j.at("bits_sent").get<std::uint64_t>();
  r.bit_errors = j.at("bit_errors").get<std::uint64_t>();
  r.spatial_bit_errors = j.at("spatial_bit_errors").get<std::uint64_t>();
  r.symbol_bit_errors = j.at("symbol_bit_errors").get<std::uint64_t>();
  r.per_user_ber = j.at("per_user_ber").get<std::vector<double>>();
  r.notification_failures = j.at("notification_failures").get<std::uint64_t>();
  r.rejected_channels = j.at("rejected_channels").get<std::uint64_t>();
  return r;
}

/// Serializes a curve. CSV carries the metadata as '#' comment lines before
/// the header; JSON nests it under "metadata".
inline std::string render_results(const std::vector<BerRecord>& records,
                                  OutputFormat format, const RunMetadata& meta) {
  if (records.empty()) throw ConfigError("render_results: no records");
  if (format == OutputFormat::json) {
    nlohmann::json j;
    j["metadata"] = {{"config", meta.config_echo},
                     {"seed", meta.seed},
                     {"version", meta.version}};
    nlohmann::json arr = nlohmann::json::array();
    for (const BerRecord& r : records) arr.push_back(record_to_json(r));
    j["records"] = arr;
    return j.dump(2) + "\n";
  }
  std::ostringstream out;
  out << "# config: " << meta.config_echo.dump() << "\n";
  out << "# seed: " << meta.seed << "\n";
  out << "# version: " << meta.version << "\n";
  out << kCsvHeader << "\n";
  for (const BerRecord& r : records) {
    out << detail::format_double(r.snr_db) << ',' << detail::format_double(r.ber)
        << ',' << r.bits_sent << ',' << r.bit_errors << ',' << r.spatial_bit_errors
        << ',' << r.symbol_bit_errors << ',';
    for (std::size_t k = 0; k < r.per_user_ber.size(); ++k) {
      if (k) out << ';';
      out << detail::format_double(r.per_user_ber[k]);
    }
    out << ',' << r.notification_failures << ',' << r.rejected_channels << "\n";
  }
  return out.str();
}

inline void emit_results(const std::vector<BerRecord>& records, OutputFormat format,
                         const std::string& path, const RunMetadata& meta) {
  const std::string body = render_results(records, format, meta);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << body;
  if (!f) throw IoError("write failed for '" + path + "'");
}

struct ParsedResults {
  RunMetadata metadata;
  std::vector<BerRecord> records;
};

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline ParsedResults parse_csv(const std::string& text, const std::string& path) {
  ParsedResults out;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') continue;  // metadata lines, handled by the caller
    if (!header_seen) {
      if (line != kCsvHeader)
        throw IoError("'" + path + "': unexpected CSV header '" + line + "'");
      header_seen = true;
      continue;
    }
    const std::vector<std::string> f = split(line, ',');
    if (f.size() != 9)
      throw IoError("'" + path + "': expected 9 CSV fields, got " +
                    std::to_string(f.size()));
    BerRecord r;
    r.snr_db = parse_double(f[0]);
    r.ber = parse_double(f[1]);
    r.bits_sent = std::stoull(f[2]);
    r.bit_errors = std::stoull(f[3]);
    r.spatial_bit_errors = std::stoull(f[4]);
    r.symbol_bit_errors = std::stoull(f[5]);
    for (const std::string& p : split(f[6], ';'))
      r.per_user_ber.push_back(parse_double(p));
    r.notification_failures = std::stoull(f[7]);
    r.rejected_channels = std::stoull(f[8]);
    out.records.push_back(std::move(r));
  }
  if (!header_seen) throw IoError("'" + path + "': missing CSV header");
  return out;
}

}  // namespace detail

/// Reads a result file in either format (detected from the content).
inline ParsedResults parse_results(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << f.rdbuf();
  const std::string text = buf.str();
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) throw IoError("'" + path + "' is empty");

  if (text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw IoError("'" + path + "': JSON parse error: " + e.what());
    }
    ParsedResults out;
    try {
      if (j.contains("metadata")) {
        const nlohmann::json& m = j.at("metadata");
        out.metadata.config_echo = m.value("config", nlohmann::json{});
        out.metadata.seed = m.value("seed", std::uint64_t{0});
        out.metadata.version = m.value("version", std::string{});
      }
      for (const nlohmann::json& rj : j.at("records"))
        out.records.push_back(record_from_json(rj));
    } catch (const nlohmann::json::exception& e) {
      throw IoError("'" + path + "': malformed results JSON: " + e.what());
    }
    return out;
  }

  ParsedResults out = detail::parse_csv(text, path);
  // Recover the metadata comment lines.
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# config: ", 0) == 0)
      out.metadata.config_echo = nlohmann::json::parse(line.substr(10));
    else if (line.rfind("# seed: ", 0) == 0)
      out.metadata.seed = std::stoull(line.substr(8));
    else if (line.rfind("# version: ", 0) == 0)
      out.metadata.version = line.substr(11);
  }
  return out;
}

/// SNR gap between two stored curves at target_ber: SNR(b) - SNR(a).
inline double compare_curves(const std::string& path_a, const std::string& path_b,
                             double target_ber) {
  const ParsedResults a = parse_results(path_a);
  const ParsedResults b = parse_results(path_b);
  return snr_at_ber(b.records, target_ber) - snr_at_ber(a.records, target_ber);
}

}  // namespace gpsm
