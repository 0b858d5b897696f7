#pragma once

// Hong-Ou-Mandel source of OAM-entangled photon pairs.
//
// Two photons prepared in |+l0> with equal polarization meet on a 50:50
// beam splitter whose reflections negate OAM. The anti-bunching
// (coincidence) part of the output is the Bell state
//   |phi-> = (|+l0,+l0> - |-l0,-l0>) / sqrt(2)
// with post-selection probability exactly 1/2.
//
// Partial distinguishability: a relative delay dx gives the wavepackets an
// overlap gamma(dx) = exp(-(dx/sigma)^2). The input is split into an
// interfering component of weight gamma (shared wavepacket tag) and a fully
// distinguishable component of weight 1-gamma (distinct tags). Tags never
// mix downstream and are traced out at detection, which keeps the
// two-photon algebra exact instead of interpolating density matrices.
//
// The default sigma is calibrated so that the (D,D) coincidence dip has a
// half width at half depth of 0.194 mm: gamma(sigma*sqrt(ln 2)) = 1/2.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qst/elements.hpp"
#include "qst/linalg.hpp"
#include "qst/photonic_state.hpp"

namespace qst {

inline constexpr double kDipHalfWidthMm = 0.194;

inline double default_hom_sigma_mm() { return kDipHalfWidthMm / std::sqrt(std::log(2.0)); }

struct DelayModel {
  double sigma_mm;

  DelayModel() : sigma_mm(default_hom_sigma_mm()) {}
  explicit DelayModel(double sigma) : sigma_mm(sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("DelayModel: sigma must be positive");
  }

  // Probability weight of the indistinguishable component; in [0, 1].
  double overlap(double delta_x_mm) const {
    const double r = delta_x_mm / sigma_mm;
    return std::exp(-r * r);
  }
};

// Paths used by the source stage.
inline constexpr PathId kSourcePathA{0};
inline constexpr PathId kSourcePathB{1};

// Six analysis states of the OAM qubit, written in the {+l0, -l0} basis.
enum class OamProjection { Plus, Minus, D, A, R, L };

inline const char* to_string(OamProjection b) {
  switch (b) {
    case OamProjection::Plus: return "plus";
    case OamProjection::Minus: return "minus";
    case OamProjection::D: return "D";
    case OamProjection::A: return "A";
    case OamProjection::R: return "R";
    case OamProjection::L: return "L";
  }
  return "?";
}

inline Vec2 oam_projection_vector(OamProjection b) {
  switch (b) {
    case OamProjection::Plus: return {cplx{1.0, 0.0}, cplx{0.0, 0.0}};
    case OamProjection::Minus: return {cplx{0.0, 0.0}, cplx{1.0, 0.0}};
    case OamProjection::D: return {kInvSqrt2, kInvSqrt2};
    case OamProjection::A: return {kInvSqrt2, -kInvSqrt2};
    case OamProjection::R: return {cplx{kInvSqrt2, 0.0}, cplx{0.0, kInvSqrt2}};
    case OamProjection::L: return {cplx{kInvSqrt2, 0.0}, cplx{0.0, -kInvSqrt2}};
  }
  throw std::invalid_argument("oam_projection_vector: bad label");
}

// |phi-> on (oam_a, oam_b), index = a*2 + b with +l0 -> 0.
inline Vec4 phi_minus() {
  Vec4 v{};
  v[0] = kInvSqrt2;   // |+l0,+l0>
  v[3] = -kInvSqrt2;  // |-l0,-l0>
  return v;
}

// Both photons in |+l0>, same polarization, delayed by delta_x, then mixed
// on the beam splitter. Wavepacket tag 0 carries the interfering component,
// tag 1 the distinguishable remainder.
inline PhotonicState interfere_pair(const DelayModel& delay, double delta_x_mm, int ell0 = 1) {
  if (ell0 < 1) throw std::invalid_argument("interfere_pair: ell0 must be >= 1");
  const double gamma = delay.overlap(delta_x_mm);
  const ModeLabel a0{kSourcePathA, Polarization::H, ell0, 0};
  const ModeLabel b0{kSourcePathB, Polarization::H, ell0, 0};
  const ModeLabel b1{kSourcePathB, Polarization::H, ell0, 1};
  PhotonicState in;
  if (gamma > 0.0) in.add_term(FockBasisState({a0, b0}), std::sqrt(gamma));
  if (gamma < 1.0) in.add_term(FockBasisState({a0, b1}), std::sqrt(1.0 - gamma));
  return apply_bs(in, kSourcePathA, kSourcePathB, kSourcePathA, kSourcePathB);
}

struct SourceOutput {
  Mat4 channel;                       // two-OAM-qubit state, coincidence-conditioned
  double fidelity_phi_minus = 0.0;    // <phi-| rho |phi->
  double post_select_probability = 0.0;
};

// Coincidence-conditioned OAM channel. The wavepacket tags are traced out:
// amplitudes are grouped by tag configuration and the groups are summed
// incoherently. An optional depolarizing admixture models residual source
// noise on the post-selected state.
inline SourceOutput entangled_source(const DelayModel& delay, double delta_x_mm,
                                     double depolarizing_p = 0.0, int ell0 = 1) {
  if (depolarizing_p < 0.0 || depolarizing_p > 1.0)
    throw std::invalid_argument("entangled_source: depolarizing_p outside [0,1]");
  const PhotonicState out = interfere_pair(delay, delta_x_mm, ell0);
  const auto sel = post_select_coincidence(out, kSourcePathA, kSourcePathB);
  if (!sel.state.has_value())
    throw std::logic_error("entangled_source: empty coincidence component");

  // Group the post-selected amplitudes by (tag_a, tag_b).
  std::map<std::pair<WavepacketTag, WavepacketTag>, Vec4> sectors;
  for (const auto& [basis, amp] : sel.state->terms()) {
    const auto& m0 = basis.modes()[0];
    const auto& m1 = basis.modes()[1];
    const ModeLabel& ma = (m0.path == kSourcePathA) ? m0 : m1;
    const ModeLabel& mb = (m0.path == kSourcePathA) ? m1 : m0;
    auto& v = sectors[{ma.wavepacket, mb.wavepacket}];
    v[static_cast<std::size_t>(oam_qubit_index(ma.oam, ell0) * 2 + oam_qubit_index(mb.oam, ell0))] +=
        amp;
  }
  Mat4 rho;
  for (const auto& [tags, v] : sectors) rho += outer(v);

  if (depolarizing_p > 0.0) {
    rho *= cplx{1.0 - depolarizing_p, 0.0};
    rho += cplx{depolarizing_p / 4.0, 0.0} * Mat4::identity();
  }

  SourceOutput r;
  r.channel = rho;
  r.fidelity_phi_minus = quadratic_form(phi_minus(), rho).real();
  r.post_select_probability = sel.probability;
  return r;
}

// Joint probability of projecting the path-a photon onto basis_a and the
// path-b photon onto basis_b (SLM + single-mode fiber on each arm),
// per emitted pair. Includes the post-selection weight, so a flat
// distinguishable background sits at 1/8.
inline double coincidence_probability(const DelayModel& delay, double delta_x_mm,
                                      OamProjection basis_a, OamProjection basis_b,
                                      double depolarizing_p = 0.0, int ell0 = 1) {
  if (depolarizing_p < 0.0 || depolarizing_p > 1.0)
    throw std::invalid_argument("coincidence_probability: depolarizing_p outside [0,1]");
  const PhotonicState out = interfere_pair(delay, delta_x_mm, ell0);
  const Vec2 va = oam_projection_vector(basis_a);
  const Vec2 vb = oam_projection_vector(basis_b);

  // Sum |<chi_a, chi_b | psi>|^2 over wavepacket tag configurations.
  std::map<std::pair<WavepacketTag, WavepacketTag>, cplx> amp_by_tags;
  for (const auto& [basis, amp] : out.terms()) {
    if (basis.count_in_path(kSourcePathA) != 1 || basis.count_in_path(kSourcePathB) != 1) continue;
    const auto& m0 = basis.modes()[0];
    const auto& m1 = basis.modes()[1];
    const ModeLabel& ma = (m0.path == kSourcePathA) ? m0 : m1;
    const ModeLabel& mb = (m0.path == kSourcePathA) ? m1 : m0;
    const cplx proj = std::conj(va[oam_qubit_index(ma.oam, ell0)]) *
                      std::conj(vb[oam_qubit_index(mb.oam, ell0)]);
    amp_by_tags[{ma.wavepacket, mb.wavepacket}] += proj * amp;
  }
  double p_pure = 0.0;
  for (const auto& [tags, a] : amp_by_tags) p_pure += std::norm(a);

  // Depolarizing admixture acts on the coincidence-conditioned state: the
  // mixed part contributes (post-selection mass 1/2) * Tr[(I/4) Pi x Pi].
  return (1.0 - depolarizing_p) * p_pure + depolarizing_p * 0.5 * 0.25;
}

struct CurvePoint {
  double delta_x_mm;
  double probability;
};

inline std::vector<CurvePoint> coincidence_curve(const DelayModel& delay,
                                                 const std::vector<double>& positions_mm,
                                                 OamProjection basis_a, OamProjection basis_b,
                                                 double depolarizing_p = 0.0, int ell0 = 1) {
  std::vector<CurvePoint> pts;
  pts.reserve(positions_mm.size());
  for (double x : positions_mm)
    pts.push_back({x, coincidence_probability(delay, x, basis_a, basis_b, depolarizing_p, ell0)});
  return pts;
}

// Default scan grid: 121 points spanning [-0.6, +0.6] mm.
inline std::vector<double> default_scan_positions(double min_mm = -0.6, double max_mm = 0.6,
                                                  int points = 121) {
  if (points < 2) throw std::invalid_argument("default_scan_positions: need at least 2 points");
  if (!(max_mm > min_mm)) throw std::invalid_argument("default_scan_positions: empty range");
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(points));
  const double step = (max_mm - min_mm) / (points - 1);
  for (int i = 0; i < points; ++i) xs.push_back(min_mm + step * i);
  return xs;
}

}  // namespace qst
