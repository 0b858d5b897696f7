#pragma once

// Scenario configuration: one struct describing any of the six runnable
// experiments, parsed from JSON with strict unknown-key rejection so a
// typo'd knob fails loudly instead of silently running defaults.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qst/hom.hpp"
#include "qst/teleport.hpp"
#include "qst/tomography.hpp"

namespace qst {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ExperimentKind { HomScan, SourceVerify, BsmVerify, Teleport, Tomo, Calibrate };

inline const char* to_string(ExperimentKind e) {
  switch (e) {
    case ExperimentKind::HomScan: return "hom-scan";
    case ExperimentKind::SourceVerify: return "source-verify";
    case ExperimentKind::BsmVerify: return "bsm-verify";
    case ExperimentKind::Teleport: return "teleport";
    case ExperimentKind::Tomo: return "tomo";
    case ExperimentKind::Calibrate: return "calibrate";
  }
  return "?";
}

inline ExperimentKind experiment_from_string(const std::string& s) {
  for (ExperimentKind e :
       {ExperimentKind::HomScan, ExperimentKind::SourceVerify, ExperimentKind::BsmVerify,
        ExperimentKind::Teleport, ExperimentKind::Tomo, ExperimentKind::Calibrate})
    if (s == to_string(e)) return e;
  throw ConfigError("unknown experiment: \"" + s + "\"");
}

inline OamProjection oam_projection_from_string(const std::string& s) {
  for (OamProjection b : {OamProjection::Plus, OamProjection::Minus, OamProjection::D,
                          OamProjection::A, OamProjection::R, OamProjection::L})
    if (s == to_string(b)) return b;
  throw ConfigError("unknown analysis state: \"" + s +
                    "\" (expected plus, minus, D, A, R or L)");
}

inline PoleLabel pole_from_string(const std::string& s) {
  for (PoleLabel p : six_pole_alphabet())
    if (s == to_string(p)) return p;
  throw ConfigError("unknown input pole: \"" + s + "\" (expected H, V, D, A, R or L)");
}

inline CountingScheme counting_scheme_from_string(const std::string& s) {
  if (s == "poisson") return CountingScheme::PoissonPerProjector;
  if (s == "binomial") return CountingScheme::BinomialPerBasis;
  throw ConfigError("unknown counting scheme: \"" + s + "\" (expected poisson or binomial)");
}

inline const char* to_string(CountingScheme s) {
  return s == CountingScheme::PoissonPerProjector ? "poisson" : "binomial";
}

using BasisPair = std::pair<OamProjection, OamProjection>;

inline std::vector<BasisPair> default_scan_bases() {
  using B = OamProjection;
  return {{B::D, B::D}, {B::D, B::A}, {B::A, B::D}, {B::A, B::A},
          {B::R, B::R}, {B::R, B::L}, {B::L, B::R}, {B::L, B::L}};
}

struct ScanConfig {
  double min_mm = -0.6;
  double max_mm = 0.6;
  int points = 121;
  std::vector<BasisPair> bases = default_scan_bases();
};

struct TomoConfig {
  std::uint64_t shots_per_projector = 10000;
  bool exact = false;
  CountingScheme scheme = CountingScheme::PoissonPerProjector;
  int bootstrap_resamples = 200;
};

struct CalibrateConfig {
  double source_fidelity = 0.9255;
  double average_fidelity = 0.918;
};

inline constexpr std::uint64_t kDefaultSeed = 12345;

struct ScenarioConfig {
  ExperimentKind experiment = ExperimentKind::Teleport;
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t shots = 100000;
  bool exact = false;  // teleport: closed-form statistics instead of sampling
  double delta_x_mm = 0.0;
  double sigma_mm = default_hom_sigma_mm();
  int ell0 = 1;
  NoiseConfig noise{};
  std::string input = "D";  // pole label, or "all" for the six-pole alphabet
  ScanConfig scan{};
  TomoConfig tomo{};
  CalibrateConfig calibrate{};
  bool timestamp = false;  // emit wall-clock time in the envelope

  void validate() const {
    noise.validate();
    if (!(sigma_mm > 0.0)) throw ConfigError("sigma_mm must be positive");
    if (ell0 < 1) throw ConfigError("ell0 must be >= 1");
    if (shots == 0) throw ConfigError("shots must be positive");
    if (!(scan.max_mm > scan.min_mm)) throw ConfigError("scan.max_mm must exceed scan.min_mm");
    if (scan.points < 2) throw ConfigError("scan.points must be >= 2");
    if (scan.bases.empty()) throw ConfigError("scan.bases must not be empty");
    if (tomo.shots_per_projector == 0) throw ConfigError("tomo.shots_per_projector must be positive");
    if (tomo.bootstrap_resamples < 0) throw ConfigError("tomo.bootstrap_resamples must be >= 0");
    if (input != "all") pole_from_string(input);  // throws on bad label
    if (!(calibrate.source_fidelity > 0.25 && calibrate.source_fidelity <= 1.0))
      throw ConfigError("calibrate.source_fidelity must lie in (0.25, 1]");
    if (!(calibrate.average_fidelity > 2.0 / 3.0 && calibrate.average_fidelity <= 1.0))
      throw ConfigError("calibrate.average_fidelity must lie in (2/3, 1]");
  }
};

namespace detail {

inline void require_keys(const nlohmann::json& j, const std::string& path,
                         std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError("config node \"" + path + "\" must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || (key == a);
    if (!ok) throw ConfigError("unknown config key: \"" + (path.empty() ? key : path + "." + key) +
                               "\"");
  }
}

template <typename T>
inline void read_number(const nlohmann::json& j, const std::string& path, const char* key,
                        T& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError("config key \"" + path + key + "\" must be a number");
  out = v.get<T>();
}

inline void read_unsigned(const nlohmann::json& j, const std::string& path, const char* key,
                          std::uint64_t& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw ConfigError("config key \"" + path + key + "\" must be a non-negative integer");
  out = v.get<std::uint64_t>();
}

inline void read_bool(const nlohmann::json& j, const std::string& path, const char* key,
                      bool& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError("config key \"" + path + key + "\" must be a boolean");
  out = v.get<bool>();
}

inline void read_string(const nlohmann::json& j, const std::string& path, const char* key,
                        std::string& out) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_string()) throw ConfigError("config key \"" + path + key + "\" must be a string");
  out = v.get<std::string>();
}

}  // namespace detail

// Overlays `j` onto `base` (defaults or values accumulated so far). Unknown
// keys anywhere in the tree are rejected with their full path.
inline ScenarioConfig parse_config(const nlohmann::json& j, ScenarioConfig base = {}) {
  using detail::read_bool;
  using detail::read_number;
  using detail::read_string;
  using detail::read_unsigned;

  detail::require_keys(j, "",
                       {"experiment", "seed", "shots", "exact", "delta_x_mm", "sigma_mm", "ell0",
                        "noise", "input", "scan", "tomo", "calibrate", "timestamp"});

  if (j.contains("experiment")) {
    if (!j.at("experiment").is_string())
      throw ConfigError("config key \"experiment\" must be a string");
    base.experiment = experiment_from_string(j.at("experiment").get<std::string>());
  }
  read_unsigned(j, "", "seed", base.seed);
  read_unsigned(j, "", "shots", base.shots);
  read_bool(j, "", "exact", base.exact);
  read_number(j, "", "delta_x_mm", base.delta_x_mm);
  read_number(j, "", "sigma_mm", base.sigma_mm);
  read_number(j, "", "ell0", base.ell0);
  read_string(j, "", "input", base.input);
  read_bool(j, "", "timestamp", base.timestamp);

  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    detail::require_keys(n, "noise", {"depolarizing_p", "feedforward_flip_prob"});
    read_number(n, "noise.", "depolarizing_p", base.noise.depolarizing_p);
    read_number(n, "noise.", "feedforward_flip_prob", base.noise.feedforward_flip_prob);
  }
  if (j.contains("scan")) {
    const auto& s = j.at("scan");
    detail::require_keys(s, "scan", {"min_mm", "max_mm", "points", "bases"});
    read_number(s, "scan.", "min_mm", base.scan.min_mm);
    read_number(s, "scan.", "max_mm", base.scan.max_mm);
    read_number(s, "scan.", "points", base.scan.points);
    if (s.contains("bases")) {
      const auto& bs = s.at("bases");
      if (!bs.is_array()) throw ConfigError("config key \"scan.bases\" must be an array");
      std::vector<BasisPair> pairs;
      for (const auto& item : bs) {
        if (!item.is_array() || item.size() != 2 || !item[0].is_string() || !item[1].is_string())
          throw ConfigError("config key \"scan.bases\" must hold pairs of analysis-state names");
        pairs.emplace_back(oam_projection_from_string(item[0].get<std::string>()),
                           oam_projection_from_string(item[1].get<std::string>()));
      }
      base.scan.bases = std::move(pairs);
    }
  }
  if (j.contains("tomo")) {
    const auto& t = j.at("tomo");
    detail::require_keys(t, "tomo",
                         {"shots_per_projector", "exact", "scheme", "bootstrap_resamples"});
    read_unsigned(t, "tomo.", "shots_per_projector", base.tomo.shots_per_projector);
    read_bool(t, "tomo.", "exact", base.tomo.exact);
    if (t.contains("scheme")) {
      if (!t.at("scheme").is_string())
        throw ConfigError("config key \"tomo.scheme\" must be a string");
      base.tomo.scheme = counting_scheme_from_string(t.at("scheme").get<std::string>());
    }
    read_number(t, "tomo.", "bootstrap_resamples", base.tomo.bootstrap_resamples);
  }
  if (j.contains("calibrate")) {
    const auto& c = j.at("calibrate");
    detail::require_keys(c, "calibrate", {"source_fidelity", "average_fidelity"});
    read_number(c, "calibrate.", "source_fidelity", base.calibrate.source_fidelity);
    read_number(c, "calibrate.", "average_fidelity", base.calibrate.average_fidelity);
  }

  base.validate();
  return base;
}

// Echo of the effective configuration, embedded in every result envelope.
inline nlohmann::json config_to_json(const ScenarioConfig& c) {
  nlohmann::json bases = nlohmann::json::array();
  for (const auto& [a, b] : c.scan.bases) bases.push_back({to_string(a), to_string(b)});
  return nlohmann::json{
      {"experiment", to_string(c.experiment)},
      {"seed", c.seed},
      {"shots", c.shots},
      {"exact", c.exact},
      {"delta_x_mm", c.delta_x_mm},
      {"sigma_mm", c.sigma_mm},
      {"ell0", c.ell0},
      {"noise",
       {{"depolarizing_p", c.noise.depolarizing_p},
        {"feedforward_flip_prob", c.noise.feedforward_flip_prob}}},
      {"input", c.input},
      {"scan",
       {{"min_mm", c.scan.min_mm},
        {"max_mm", c.scan.max_mm},
        {"points", c.scan.points},
        {"bases", bases}}},
      {"tomo",
       {{"shots_per_projector", c.tomo.shots_per_projector},
        {"exact", c.tomo.exact},
        {"scheme", to_string(c.tomo.scheme)},
        {"bootstrap_resamples", c.tomo.bootstrap_resamples}}},
      {"calibrate",
       {{"source_fidelity", c.calibrate.source_fidelity},
        {"average_fidelity", c.calibrate.average_fidelity}}},
      {"timestamp", c.timestamp}};
}

}  // namespace qst
