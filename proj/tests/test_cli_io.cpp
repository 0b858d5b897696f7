// Configuration parsing, serialization formats, and run-level determinism.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <functional>
#include <string>

#include <json.hpp>
#include <qst/config.hpp>
#include <qst/runner.hpp>
#include <qst/serialize.hpp>
#include <qst/version.hpp>

using namespace qst;
using nlohmann::json;
using Catch::Approx;

namespace {

bool message_contains(const std::function<void()>& f, const std::string& needle) {
  try {
    f();
  } catch (const std::exception& e) {
    return std::string(e.what()).find(needle) != std::string::npos;
  }
  return false;
}

}  // namespace

TEST_CASE("an empty config yields the documented defaults") {
  const ScenarioConfig c = parse_config(json::object());
  REQUIRE(c.experiment == ExperimentKind::Teleport);
  REQUIRE(c.seed == kDefaultSeed);
  REQUIRE(c.shots == 100000);
  REQUIRE_FALSE(c.exact);
  REQUIRE(c.delta_x_mm == 0.0);
  REQUIRE(c.sigma_mm == Approx(default_hom_sigma_mm()));
  REQUIRE(c.ell0 == 1);
  REQUIRE(c.input == "D");
  REQUIRE(c.scan.points == 121);
  REQUIRE(c.scan.bases.size() == 8);
  REQUIRE(c.tomo.shots_per_projector == 10000);
  REQUIRE(c.tomo.bootstrap_resamples == 200);
  REQUIRE(c.calibrate.source_fidelity == Approx(0.9255));
  REQUIRE(c.calibrate.average_fidelity == Approx(0.918));
  REQUIRE_FALSE(c.timestamp);
}

TEST_CASE("config files overlay an existing base without erasing it") {
  ScenarioConfig base = parse_config(json{{"seed", 5}, {"input", "R"}});
  const ScenarioConfig c = parse_config(json{{"shots", 42}}, base);
  REQUIRE(c.seed == 5);
  REQUIRE(c.input == "R");
  REQUIRE(c.shots == 42);
}

TEST_CASE("unknown keys are rejected with their full path") {
  REQUIRE(message_contains([] { parse_config(json{{"no_such_knob", 1}}); }, "no_such_knob"));
  REQUIRE(message_contains([] { parse_config(json{{"noise", json{{"oops", 1}}}}); },
                           "noise.oops"));
  REQUIRE(message_contains([] { parse_config(json{{"tomo", json{{"shots", 1}}}}); },
                           "tomo.shots"));
  REQUIRE(message_contains([] { parse_config(json{{"scan", json{{"step", 0.1}}}}); },
                           "scan.step"));
  REQUIRE(message_contains(
      [] { parse_config(json{{"calibrate", json{{"target", 0.9}}}}); }, "calibrate.target"));
}

TEST_CASE("malformed values are rejected as configuration errors") {
  REQUIRE_THROWS_AS(parse_config(json{{"seed", "abc"}}), ConfigError);
  REQUIRE_THROWS_AS(parse_config(json{{"seed", -3}}), ConfigError);
  REQUIRE_THROWS_AS(parse_config(json{{"experiment", 3}}), ConfigError);
  REQUIRE_THROWS_AS(parse_config(json{{"experiment", "warp"}}), ConfigError);
  REQUIRE_THROWS_AS(parse_config(json{{"timestamp", "yes"}}), ConfigError);
  REQUIRE_THROWS_AS(parse_config(json{{"input", "Q"}}), ConfigError);
  REQUIRE_THROWS_AS(parse_config(json{{"scan", json{{"bases", "DD"}}}}), ConfigError);
  REQUIRE_THROWS_AS(parse_config(json{{"scan", json{{"bases", json::array({json::array({"D"})})}}}}),
                    ConfigError);
  REQUIRE_THROWS_AS(parse_config(json{{"scan", json{{"bases", json::array({json::array({"D", "Q"})})}}}}),
                    ConfigError);
  REQUIRE_THROWS_AS(parse_config(json{{"tomo", json{{"scheme", "gaussian"}}}}), ConfigError);
  REQUIRE_THROWS_AS(parse_config(json(7)), ConfigError);
}

TEST_CASE("semantic validation enforces physical ranges") {
  REQUIRE_THROWS_AS(parse_config(json{{"sigma_mm", -1.0}}), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_config(json{{"ell0", 0}}), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_config(json{{"shots", 0}}), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_config(json{{"scan", json{{"points", 1}}}}), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_config(json{{"scan", json{{"min_mm", 1.0}, {"max_mm", -1.0}}}}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(parse_config(json{{"noise", json{{"depolarizing_p", 2.0}}}}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(parse_config(json{{"noise", json{{"feedforward_flip_prob", 0.7}}}}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(parse_config(json{{"calibrate", json{{"average_fidelity", 0.5}}}}),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(parse_config(json{{"tomo", json{{"shots_per_projector", 0}}}}),
                    std::invalid_argument);
}

TEST_CASE("configs survive a serialize-parse round trip") {
  const json in = {
      {"experiment", "hom-scan"},
      {"seed", 777},
      {"delta_x_mm", 0.25},
      {"sigma_mm", 0.2},
      {"noise", {{"depolarizing_p", 0.05}, {"feedforward_flip_prob", 0.02}}},
      {"input", "L"},
      {"scan", {{"min_mm", -0.4}, {"max_mm", 0.4}, {"points", 17},
                {"bases", json::array({json::array({"D", "D"}), json::array({"R", "L"})})}}},
      {"tomo", {{"shots_per_projector", 2000}, {"scheme", "binomial"}}},
  };
  const ScenarioConfig c = parse_config(in);
  REQUIRE(c.experiment == ExperimentKind::HomScan);
  REQUIRE(c.scan.bases.size() == 2);
  REQUIRE(c.tomo.scheme == CountingScheme::BinomialPerBasis);

  const ScenarioConfig c2 = parse_config(config_to_json(c));
  REQUIRE(config_to_json(c) == config_to_json(c2));
}

TEST_CASE("floating-point fields are written losslessly") {
  for (double v : {0.1, 1.0 / 3.0, 2.0 / 3.0, 1e-17, 12345.6789, 0.0, -0.75,
                   0.12345678901234567}) {
    const std::string s = format_double(v);
    REQUIRE(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("tables carry fixed headers") {
  const std::string hom = hom_scan_csv({{0.1, "D", "A", 0.25}});
  REQUIRE(hom.rfind("delta_x_mm,basis_a,basis_b,probability\n", 0) == 0);
  const std::string row = format_double(0.1) + ",D,A," + format_double(0.25);
  REQUIRE(hom.find(row) != std::string::npos);

  const std::string ports = port_table_csv({{"A", 25.0, 24.9, 0.1}});
  REQUIRE(ports.rfind("port,theory_pct,observed_pct,stderr_pct\n", 0) == 0);

  const std::string tomo = tomo_table_csv({{"D", 0.918, 0.003}});
  REQUIRE(tomo.rfind("state,F,stderr\n", 0) == 0);
}

TEST_CASE("envelopes carry version, seed, config echo, and a null timestamp") {
  ScenarioConfig cfg;
  const json env = make_envelope(cfg, json{{"answer", 42}});
  REQUIRE(env.at("version").get<std::string>() == std::string(kVersion));
  REQUIRE(env.at("experiment").get<std::string>() == "teleport");
  REQUIRE(env.at("seed").get<std::uint64_t>() == kDefaultSeed);
  REQUIRE(env.at("timestamp").is_null());
  REQUIRE(env.at("config") == config_to_json(cfg));
  REQUIRE(env.at("payload").at("answer").get<int>() == 42);

  cfg.timestamp = true;
  REQUIRE(make_envelope(cfg, json::object()).at("timestamp").is_string());
}

TEST_CASE("identical configurations produce byte-identical outputs") {
  // Sampled transfer.
  ScenarioConfig tele = parse_config(json{{"experiment", "teleport"}, {"shots", 400},
                                          {"seed", 31}, {"input", "all"},
                                          {"noise", json{{"depolarizing_p", 0.08},
                                                         {"feedforward_flip_prob", 0.03}}}});
  const RunOutput t1 = run(tele);
  const RunOutput t2 = run(tele);
  REQUIRE(t1.envelope.dump(2) == t2.envelope.dump(2));
  REQUIRE(t1.csv == t2.csv);
  REQUIRE(t1.has_csv);

  // Sampled tomography with bootstrap error bars.
  ScenarioConfig tomo = parse_config(json{{"experiment", "tomo"}, {"seed", 8}, {"input", "D"},
                                          {"tomo", json{{"shots_per_projector", 500},
                                                        {"bootstrap_resamples", 12}}}});
  const RunOutput m1 = run(tomo);
  const RunOutput m2 = run(tomo);
  REQUIRE(m1.envelope.dump(2) == m2.envelope.dump(2));
  REQUIRE(m1.csv == m2.csv);

  // Interference scan (deterministic closed form).
  ScenarioConfig hom = parse_config(json{{"experiment", "hom-scan"},
                                         {"scan", json{{"points", 11}}}});
  const RunOutput h1 = run(hom);
  const RunOutput h2 = run(hom);
  REQUIRE(h1.envelope.dump(2) == h2.envelope.dump(2));
  REQUIRE(h1.csv == h2.csv);
}

TEST_CASE("the seed changes sampled counts but not the physics") {
  ScenarioConfig a = parse_config(json{{"experiment", "teleport"}, {"shots", 2000},
                                       {"seed", 1}, {"input", "D"}});
  ScenarioConfig b = parse_config(json{{"experiment", "teleport"}, {"shots", 2000},
                                       {"seed", 2}, {"input", "D"}});
  const json pa = run(a).envelope.at("payload");
  const json pb = run(b).envelope.at("payload");
  REQUIRE(pa.at("poles")[0].at("counts") != pb.at("poles")[0].at("counts"));
  REQUIRE(pa.at("poles")[0].at("outcome_probabilities") ==
          pb.at("poles")[0].at("outcome_probabilities"));
}

TEST_CASE("exact transfer mode reports the ideal identity channel") {
  ScenarioConfig cfg = parse_config(json{{"experiment", "teleport"}, {"exact", true},
                                         {"input", "all"}});
  const RunOutput out = run(cfg);
  const json& p = out.envelope.at("payload");
  REQUIRE(p.at("mode").get<std::string>() == "exact");
  REQUIRE(p.at("average_fidelity").get<double>() == Approx(1.0).margin(1e-12));
  REQUIRE(p.at("classical_bound").get<double>() == Approx(2.0 / 3.0).margin(1e-15));
  for (const auto& port : p.at("ports")) {
    REQUIRE(port.at("theory_pct").get<double>() == Approx(25.0).margin(1e-9));
    REQUIRE(port.at("observed_pct").get<double>() == Approx(25.0).margin(1e-9));
    REQUIRE(port.at("stderr_pct").get<double>() == 0.0);
  }
}

TEST_CASE("verification experiments expose their acceptance quantities") {
  ScenarioConfig src = parse_config(json{{"experiment", "source-verify"}});
  const json sp = run(src).envelope.at("payload");
  REQUIRE(sp.at("fidelity_phi_minus").get<double>() == Approx(1.0).margin(1e-9));
  REQUIRE(sp.at("post_select_probability").get<double>() == Approx(0.5).margin(1e-12));
  REQUIRE_FALSE(run(src).has_csv);

  ScenarioConfig bsm = parse_config(json{{"experiment", "bsm-verify"}});
  const json bp = run(bsm).envelope.at("payload");
  REQUIRE(bp.at("max_amplitude_deviation").get<double>() < 1e-9);
  REQUIRE(bp.at("cases").size() == 24);  // 4 basis states + 20 random draws

  ScenarioConfig cal = parse_config(json{{"experiment", "calibrate"}});
  const json cp = run(cal).envelope.at("payload");
  REQUIRE(cp.at("achieved_source_fidelity").get<double>() == Approx(0.9255).margin(1e-4));
  REQUIRE(cp.at("achieved_average_fidelity").get<double>() == Approx(0.918).margin(1e-4));
  REQUIRE(cp.at("per_pole_fidelity").size() == 6);
}
