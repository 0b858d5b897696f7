#pragma once

// Experiment dispatch: turns a validated ScenarioConfig into a result
// envelope (JSON) plus, for table-shaped experiments, a CSV body.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "qst/bsm.hpp"
#include "qst/config.hpp"
#include "qst/hom.hpp"
#include "qst/serialize.hpp"
#include "qst/teleport.hpp"
#include "qst/tomography.hpp"

namespace qst {

struct RunOutput {
  nlohmann::json envelope;
  std::string csv;  // empty when the experiment has no CSV table
  bool has_csv = false;
};

namespace detail {

inline std::vector<PoleLabel> resolve_poles(const std::string& input) {
  if (input == "all") {
    const auto a = six_pole_alphabet();
    return std::vector<PoleLabel>(a.begin(), a.end());
  }
  return {pole_from_string(input)};
}

// Haar-ish random single-photon hybrid state: i.i.d. complex Gaussian
// components (Box-Muller), normalized.
inline Vec4 random_hybrid_state(RngStream& rng) {
  Vec4 v{};
  double nrm = 0.0;
  for (auto& c : v) {
    const double u1 = rng.uniform(), u2 = rng.uniform();
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    c = cplx{r * std::cos(2.0 * std::numbers::pi * u2),
             r * std::sin(2.0 * std::numbers::pi * u2)};
    nrm += std::norm(c);
  }
  if (nrm < 1e-18) {
    v = Vec4{};
    v[0] = 1.0;
    return v;
  }
  return scaled(v, cplx{1.0 / std::sqrt(nrm), 0.0});
}

// Largest |got_k - e^{i phi} ref_k| after aligning the global phase on the
// largest reference amplitude.
inline double amplitude_deviation(const std::array<cplx, 4>& ref,
                                  const std::array<cplx, 4>& got) {
  std::size_t j = 0;
  for (std::size_t k = 1; k < 4; ++k)
    if (std::abs(ref[k]) > std::abs(ref[j])) j = k;
  cplx phase{1.0, 0.0};
  if (std::abs(ref[j]) > 1e-14 && std::abs(got[j]) > 1e-14)
    phase = (got[j] / ref[j]) / std::abs(got[j] / ref[j]);
  double dev = 0.0;
  for (std::size_t k = 0; k < 4; ++k) dev = std::max(dev, std::abs(got[k] - phase * ref[k]));
  return dev;
}

inline nlohmann::json probabilities_json(const std::array<double, 4>& p) {
  return nlohmann::json{p[0], p[1], p[2], p[3]};
}

inline RunOutput run_hom_scan(const ScenarioConfig& cfg) {
  const DelayModel delay(cfg.sigma_mm);
  const auto xs = default_scan_positions(cfg.scan.min_mm, cfg.scan.max_mm, cfg.scan.points);
  nlohmann::json curves = nlohmann::json::array();
  std::vector<HomScanRow> rows;
  rows.reserve(cfg.scan.bases.size() * xs.size());
  for (const auto& [ba, bb] : cfg.scan.bases) {
    const auto curve =
        coincidence_curve(delay, xs, ba, bb, cfg.noise.depolarizing_p, cfg.ell0);
    double mx = curve.front().probability, mn = curve.front().probability;
    nlohmann::json points = nlohmann::json::array();
    for (const auto& pt : curve) {
      mx = std::max(mx, pt.probability);
      mn = std::min(mn, pt.probability);
      points.push_back({{"delta_x_mm", pt.delta_x_mm}, {"probability", pt.probability}});
      rows.push_back({pt.delta_x_mm, to_string(ba), to_string(bb), pt.probability});
    }
    const double vis = (mx + mn > 0.0) ? (mx - mn) / (mx + mn) : 0.0;
    curves.push_back({{"basis_a", to_string(ba)},
                      {"basis_b", to_string(bb)},
                      {"visibility", vis},
                      {"points", points}});
  }
  RunOutput out;
  out.envelope = make_envelope(cfg, nlohmann::json{{"sigma_mm", cfg.sigma_mm},
                                                   {"depolarizing_p", cfg.noise.depolarizing_p},
                                                   {"curves", curves}});
  out.csv = hom_scan_csv(rows);
  out.has_csv = true;
  return out;
}

inline RunOutput run_source_verify(const ScenarioConfig& cfg) {
  const DelayModel delay(cfg.sigma_mm);
  const SourceOutput src =
      entangled_source(delay, cfg.delta_x_mm, cfg.noise.depolarizing_p, cfg.ell0);
  RunOutput out;
  out.envelope = make_envelope(
      cfg, nlohmann::json{{"delta_x_mm", cfg.delta_x_mm},
                          {"overlap_gamma", delay.overlap(cfg.delta_x_mm)},
                          {"fidelity_phi_minus", src.fidelity_phi_minus},
                          {"post_select_probability", src.post_select_probability},
                          {"channel", matrix_to_json(src.channel)}});
  return out;
}

inline RunOutput run_bsm_verify(const ScenarioConfig& cfg) {
  nlohmann::json cases = nlohmann::json::array();
  double max_dev = 0.0;

  for (BellStateKind k : kAllBellStates) {
    const Vec4 s = bell_state(k);
    const auto cf = sort_amplitudes(s);
    const auto net = network_port_amplitudes(s, cfg.ell0);
    const double dev = amplitude_deviation(cf, net);
    max_dev = std::max(max_dev, dev);
    std::array<double, 4> cfp{}, netp{};
    for (std::size_t i = 0; i < 4; ++i) {
      cfp[i] = std::norm(cf[i]);
      netp[i] = std::norm(net[i]);
    }
    cases.push_back({{"state", to_string(k)},
                     {"closed_form_probabilities", probabilities_json(cfp)},
                     {"network_probabilities", probabilities_json(netp)},
                     {"deviation", dev}});
  }

  const int n_random = 20;
  for (int i = 0; i < n_random; ++i) {
    RngStream rng = RngStream::derive(cfg.seed, 200 + static_cast<std::uint64_t>(i));
    const Vec4 s = random_hybrid_state(rng);
    const double dev = amplitude_deviation(sort_amplitudes(s), network_port_amplitudes(s, cfg.ell0));
    max_dev = std::max(max_dev, dev);
    cases.push_back({{"state", "random-" + std::to_string(i)}, {"deviation", dev}});
  }

  RunOutput out;
  out.envelope = make_envelope(cfg, nlohmann::json{{"max_amplitude_deviation", max_dev},
                                                   {"random_cases", n_random},
                                                   {"cases", cases}});
  return out;
}

inline RunOutput run_teleport(const ScenarioConfig& cfg) {
  const DelayModel delay(cfg.sigma_mm);
  const auto poles = resolve_poles(cfg.input);
  nlohmann::json pole_results = nlohmann::json::array();
  double fid_sum = 0.0;
  double source_fidelity = 0.0;
  std::array<double, 4> theory{};
  std::array<std::uint64_t, 4> counts{};
  std::uint64_t total_shots = 0;

  for (std::size_t i = 0; i < poles.size(); ++i) {
    TeleportOptions opt;
    opt.input = pole_vector(poles[i]);
    opt.delta_x_mm = cfg.delta_x_mm;
    opt.noise = cfg.noise;
    opt.delay = delay;
    opt.ell0 = cfg.ell0;

    nlohmann::json entry{{"input", to_string(poles[i])}};
    if (cfg.exact) {
      const TeleportExactResult r = teleport_exact(opt);
      fid_sum += r.fidelity;
      theory = r.outcome_probabilities;
      source_fidelity = r.source_fidelity;
      entry["fidelity"] = r.fidelity;
      entry["conditional_fidelity"] = probabilities_json(r.conditional_fidelity);
      entry["outcome_probabilities"] = probabilities_json(r.outcome_probabilities);
    } else {
      const TeleportSampledResult r =
          teleport_sampled(opt, cfg.shots, derive_seed(cfg.seed, i));
      fid_sum += r.fidelity;
      theory = r.outcome_probabilities;
      source_fidelity = r.source_fidelity;
      total_shots += r.shots;
      nlohmann::json cj = nlohmann::json::array();
      for (std::size_t k = 0; k < 4; ++k) {
        counts[k] += r.counts[k];
        cj.push_back(r.counts[k]);
      }
      entry["fidelity"] = r.fidelity;
      entry["counts"] = cj;
      entry["outcome_probabilities"] = probabilities_json(r.outcome_probabilities);
    }
    pole_results.push_back(std::move(entry));
  }

  std::vector<PortRow> rows;
  nlohmann::json ports = nlohmann::json::array();
  for (std::size_t k = 0; k < 4; ++k) {
    PortRow row;
    row.port = to_string(static_cast<Port>(k));
    row.theory_pct = 100.0 * theory[k];
    if (cfg.exact) {
      row.observed_pct = row.theory_pct;
      row.stderr_pct = 0.0;
    } else {
      const double n = static_cast<double>(total_shots);
      const double phat = static_cast<double>(counts[k]) / n;
      row.observed_pct = 100.0 * phat;
      row.stderr_pct = 100.0 * std::sqrt(std::max(phat * (1.0 - phat), 0.0) / n);
    }
    ports.push_back({{"port", row.port},
                     {"theory_pct", row.theory_pct},
                     {"observed_pct", row.observed_pct},
                     {"stderr_pct", row.stderr_pct}});
    rows.push_back(row);
  }

  RunOutput out;
  out.envelope = make_envelope(
      cfg, nlohmann::json{{"mode", cfg.exact ? "exact" : "sampled"},
                          {"poles", pole_results},
                          {"average_fidelity", fid_sum / static_cast<double>(poles.size())},
                          {"source_fidelity", source_fidelity},
                          {"classical_bound", 2.0 / 3.0},
                          {"ports", ports}});
  out.csv = port_table_csv(rows);
  out.has_csv = true;
  return out;
}

inline RunOutput run_tomo(const ScenarioConfig& cfg) {
  const DelayModel delay(cfg.sigma_mm);
  const auto poles = resolve_poles(cfg.input);
  TomoOptions topt;
  topt.shots_per_projector = cfg.tomo.shots_per_projector;
  topt.exact = cfg.tomo.exact;
  topt.scheme = cfg.tomo.scheme;
  topt.bootstrap_resamples = cfg.tomo.bootstrap_resamples;

  nlohmann::json pole_results = nlohmann::json::array();
  std::vector<TomoRow> rows;
  double fid_sum = 0.0;
  bool all_above_classical = true;

  for (std::size_t i = 0; i < poles.size(); ++i) {
    TeleportOptions opt;
    opt.input = pole_vector(poles[i]);
    opt.delta_x_mm = cfg.delta_x_mm;
    opt.noise = cfg.noise;
    opt.delay = delay;
    opt.ell0 = cfg.ell0;
    const TeleportExactResult tr = teleport_exact(opt);

    const TomoRunResult res =
        run_tomography(tr.rho_out, opt.input, topt, derive_seed(cfg.seed, 100 + i));
    fid_sum += res.fidelity;
    all_above_classical = all_above_classical && (res.fidelity > 2.0 / 3.0);
    rows.push_back({to_string(poles[i]), res.fidelity, res.fidelity_stderr});

    nlohmann::json counts_json;
    for (std::size_t p = 0; p < 6; ++p)
      counts_json[to_string(kAllProjections[p])] = res.counts.counts[p];
    pole_results.push_back({{"state", to_string(poles[i])},
                            {"fidelity_direct", tr.fidelity},
                            {"fidelity_mle", res.fidelity},
                            {"fidelity_stderr", res.fidelity_stderr},
                            {"mle_iterations", res.mle.iterations},
                            {"counts", counts_json},
                            {"shots_per_projector", cfg.tomo.shots_per_projector}});
  }

  RunOutput out;
  out.envelope = make_envelope(
      cfg,
      nlohmann::json{{"poles", pole_results},
                     {"average_fidelity_mle", fid_sum / static_cast<double>(poles.size())},
                     {"classical_bound", 2.0 / 3.0},
                     {"all_above_classical", all_above_classical}});
  out.csv = tomo_table_csv(rows);
  out.has_csv = true;
  return out;
}

inline RunOutput run_calibrate(const ScenarioConfig& cfg) {
  CalibrationTargets t;
  t.source_fidelity = cfg.calibrate.source_fidelity;
  t.average_fidelity = cfg.calibrate.average_fidelity;
  t.delta_x_mm = cfg.delta_x_mm;
  t.delay = DelayModel(cfg.sigma_mm);
  t.ell0 = cfg.ell0;
  const CalibrationResult r = calibrate(t);

  const NoiseConfig calibrated{r.depolarizing_p, r.feedforward_flip_prob};
  nlohmann::json per_pole;
  for (PoleLabel pole : six_pole_alphabet()) {
    TeleportOptions opt;
    opt.input = pole_vector(pole);
    opt.delta_x_mm = cfg.delta_x_mm;
    opt.noise = calibrated;
    opt.delay = t.delay;
    opt.ell0 = cfg.ell0;
    per_pole[to_string(pole)] = teleport_exact(opt).fidelity;
  }

  RunOutput out;
  out.envelope = make_envelope(
      cfg, nlohmann::json{{"depolarizing_p", r.depolarizing_p},
                          {"feedforward_flip_prob", r.feedforward_flip_prob},
                          {"achieved_source_fidelity", r.achieved_source_fidelity},
                          {"achieved_average_fidelity", r.achieved_average_fidelity},
                          {"per_pole_fidelity", per_pole}});
  return out;
}

}  // namespace detail

inline RunOutput run(const ScenarioConfig& cfg) {
  cfg.validate();
  switch (cfg.experiment) {
    case ExperimentKind::HomScan: return detail::run_hom_scan(cfg);
    case ExperimentKind::SourceVerify: return detail::run_source_verify(cfg);
    case ExperimentKind::BsmVerify: return detail::run_bsm_verify(cfg);
    case ExperimentKind::Teleport: return detail::run_teleport(cfg);
    case ExperimentKind::Tomo: return detail::run_tomo(cfg);
    case ExperimentKind::Calibrate: return detail::run_calibrate(cfg);
  }
  throw std::logic_error("run: unknown experiment");
}

}  // namespace qst
