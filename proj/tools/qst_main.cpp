// Command-line front end: six experiment subcommands sharing one
// configuration schema. Precedence: built-in defaults (seed may come from
// QST_SEED), then --config JSON, then explicit flags.
//
// Exit codes: 0 success, 1 invalid configuration or arguments, 2 runtime
// failure (I/O and unexpected errors), 3 iterative procedure did not
// converge.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qst/config.hpp"
#include "qst/errors.hpp"
#include "qst/runner.hpp"
#include "qst/serialize.hpp"

namespace {

std::uint64_t parse_env_seed(const char* text) {
  std::string s(text);
  if (s.empty()) throw qst::ConfigError("QST_SEED is set but empty");
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used, 10);
  } catch (const std::exception&) {
    throw qst::ConfigError("QST_SEED must be an unsigned integer, got \"" + s + "\"");
  }
  if (used != s.size())
    throw qst::ConfigError("QST_SEED must be an unsigned integer, got \"" + s + "\"");
  return static_cast<std::uint64_t>(v);
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qst::ConfigError("cannot open config file: " + path);
  return nlohmann::json::parse(in);
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << body;
  if (!out) throw std::runtime_error("failed writing output file: " + path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"linear-optical simulation of polarization-to-OAM quantum state transfer"};
  app.require_subcommand(1);

  std::string config_path, out_json, out_csv, input;
  std::uint64_t seed = 0, shots = 0, tomo_shots = 0;
  double delta_x = 0.0, sigma = 0.0, depol_p = 0.0, flip_p = 0.0;
  double target_source_f = 0.0, target_avg_f = 0.0;
  int ell0 = 1;
  bool exact = false, timestamp = false, tomo_exact = false;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--seed", seed, "master RNG seed (default: QST_SEED env var or 12345)");
    sub->add_option("--out-json", out_json, "write the JSON envelope to this file");
    sub->add_option("--out-csv", out_csv, "write the CSV table to this file");
    sub->add_flag("--timestamp", timestamp, "embed wall-clock time in the envelope");
    sub->add_option("--delta-x", delta_x, "relative path delay in mm");
    sub->add_option("--sigma", sigma, "wavepacket overlap scale in mm");
    sub->add_option("--ell0", ell0, "magnitude of the OAM quantum number");
    sub->add_option("--depol-p", depol_p, "depolarizing admixture on the source, in [0,1]");
    sub->add_option("--flip-p", flip_p, "per-bit feed-forward flip probability, in [0,0.5]");
    return sub;
  };

  add_common(app.add_subcommand("hom-scan", "coincidence curves vs path delay"));
  add_common(app.add_subcommand("source-verify", "entangled source channel and fidelity"));
  add_common(app.add_subcommand("bsm-verify", "Bell sorter: closed form vs optical network"));
  CLI::App* tele = add_common(app.add_subcommand("teleport", "run the state-transfer protocol"));
  tele->add_option("--shots", shots, "protocol shots");
  tele->add_flag("--exact", exact, "closed-form statistics instead of sampling");
  tele->add_option("--input", input, "input pole: H, V, D, A, R, L, or all");
  CLI::App* tomo =
      add_common(app.add_subcommand("tomo", "state transfer plus output tomography"));
  tomo->add_option("--input", input, "input pole: H, V, D, A, R, L, or all");
  tomo->add_option("--tomo-shots", tomo_shots, "shots per tomography projector");
  tomo->add_flag("--tomo-exact", tomo_exact, "use expected counts instead of sampling");
  CLI::App* cal =
      add_common(app.add_subcommand("calibrate", "fit noise knobs to target fidelities"));
  cal->add_option("--target-source-f", target_source_f, "target source fidelity");
  cal->add_option("--target-avg-f", target_avg_f, "target six-pole average fidelity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();

    qst::ScenarioConfig cfg;
    if (const char* env = std::getenv("QST_SEED")) cfg.seed = parse_env_seed(env);
    if (sub->count("--config") > 0) cfg = qst::parse_config(load_json_file(config_path), cfg);

    if (sub->count("--seed") > 0) cfg.seed = seed;
    if (sub->count("--delta-x") > 0) cfg.delta_x_mm = delta_x;
    if (sub->count("--sigma") > 0) cfg.sigma_mm = sigma;
    if (sub->count("--ell0") > 0) cfg.ell0 = ell0;
    if (sub->count("--depol-p") > 0) cfg.noise.depolarizing_p = depol_p;
    if (sub->count("--flip-p") > 0) cfg.noise.feedforward_flip_prob = flip_p;
    if (sub->count("--timestamp") > 0) cfg.timestamp = true;
    if (sub->get_option_no_throw("--shots") && sub->count("--shots") > 0) cfg.shots = shots;
    if (sub->get_option_no_throw("--exact") && sub->count("--exact") > 0) cfg.exact = true;
    if (sub->get_option_no_throw("--input") && sub->count("--input") > 0) cfg.input = input;
    if (sub->get_option_no_throw("--tomo-shots") && sub->count("--tomo-shots") > 0)
      cfg.tomo.shots_per_projector = tomo_shots;
    if (sub->get_option_no_throw("--tomo-exact") && sub->count("--tomo-exact") > 0)
      cfg.tomo.exact = true;
    if (sub->get_option_no_throw("--target-source-f") && sub->count("--target-source-f") > 0)
      cfg.calibrate.source_fidelity = target_source_f;
    if (sub->get_option_no_throw("--target-avg-f") && sub->count("--target-avg-f") > 0)
      cfg.calibrate.average_fidelity = target_avg_f;

    cfg.experiment = qst::experiment_from_string(sub->get_name());
    cfg.validate();

    const qst::RunOutput out = qst::run(cfg);
    if (!out_csv.empty() && !out.has_csv)
      throw qst::ConfigError("experiment \"" + sub->get_name() + "\" produces no CSV table");

    const std::string body = out.envelope.dump(2) + "\n";
    if (out_json.empty()) {
      std::cout << body;
    } else {
      write_file(out_json, body);
    }
    if (!out_csv.empty()) write_file(out_csv, out.csv);
    return 0;
  } catch (const qst::NonConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const qst::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::parse_error& e) {
    std::cerr << "error: invalid JSON: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
