#pragma once

// Output formats. Every run produces a JSON envelope
//   { version, experiment, seed, timestamp, config, payload }
// and some experiments additionally produce a flat CSV table. The
// timestamp is null unless explicitly requested, so that identical
// configurations yield byte-identical output.

#include <cstdio>
#include <ctime>
#include <string>
#include <vector>

#include <json.hpp>

#include "qst/config.hpp"
#include "qst/linalg.hpp"
#include "qst/version.hpp"

namespace qst {

// Shortest exact decimal form that round-trips a double.
inline std::string format_double(double v) {
  char buf[44];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string iso8601_utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Complex matrix as nested arrays of [re, im] pairs.
template <std::size_t N>
inline nlohmann::json matrix_to_json(const SquareMatrix<N>& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < N; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < N; ++c)
      row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::json make_envelope(const ScenarioConfig& cfg, nlohmann::json payload) {
  nlohmann::json env;
  env["version"] = std::string(kVersion);
  env["experiment"] = to_string(cfg.experiment);
  env["seed"] = cfg.seed;
  env["timestamp"] = cfg.timestamp ? nlohmann::json(iso8601_utc_now()) : nlohmann::json(nullptr);
  env["config"] = config_to_json(cfg);
  env["payload"] = std::move(payload);
  return env;
}

// ---------------------------------------------------------------------------
// CSV tables. Labels never contain commas, so no quoting is needed.

struct HomScanRow {
  double delta_x_mm = 0.0;
  std::string basis_a;
  std::string basis_b;
  double probability = 0.0;
};

inline std::string hom_scan_csv(const std::vector<HomScanRow>& rows) {
  std::string out = "delta_x_mm,basis_a,basis_b,probability\n";
  for (const auto& r : rows) {
    out += format_double(r.delta_x_mm);
    out += ',';
    out += r.basis_a;
    out += ',';
    out += r.basis_b;
    out += ',';
    out += format_double(r.probability);
    out += '\n';
  }
  return out;
}

struct PortRow {
  std::string port;
  double theory_pct = 0.0;
  double observed_pct = 0.0;
  double stderr_pct = 0.0;
};

inline std::string port_table_csv(const std::vector<PortRow>& rows) {
  std::string out = "port,theory_pct,observed_pct,stderr_pct\n";
  for (const auto& r : rows) {
    out += r.port;
    out += ',';
    out += format_double(r.theory_pct);
    out += ',';
    out += format_double(r.observed_pct);
    out += ',';
    out += format_double(r.stderr_pct);
    out += '\n';
  }
  return out;
}

struct TomoRow {
  std::string state;
  double fidelity = 0.0;
  double stderr = 0.0;
};

inline std::string tomo_table_csv(const std::vector<TomoRow>& rows) {
  std::string out = "state,F,stderr\n";
  for (const auto& r : rows) {
    out += r.state;
    out += ',';
    out += format_double(r.fidelity);
    out += ',';
    out += format_double(r.stderr);
    out += '\n';
  }
  return out;
}

}  // namespace qst
