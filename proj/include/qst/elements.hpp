#pragma once

// Ideal linear optical elements acting on PhotonicState.
//
// Conventions locked by the regression tests in tests/test_elements.cpp:
//  * 50:50 beam splitter: transmission amplitude +1/sqrt(2) on both sides;
//    reflection +1/sqrt(2) from the first input, -1/sqrt(2) from the second.
//    Every reflection negates the OAM value (image inversion).
//  * PBS: H transmits unchanged; V reflects with OAM negated, phase +1.
//  * Wave plates: HWP(theta) = R(theta) diag(1,-1) R(-theta),
//    QWP(theta) = R(theta) diag(1,-i) R(-theta); overall phases dropped.
//    HWP at 22.5 deg maps |H> -> (|H>+|V>)/sqrt(2); QWP at 45 deg maps
//    |H> -> (|H>+i|V>)/sqrt(2) up to a global phase.
//  * Mirror: OAM negated, phase +1.
//  * Spiral phase plate: adds delta_l to the OAM on one path.
//  * OAM sorter: routes +l0 / -l0 to two ports (ideal black box).
//  * Single-mode fiber: projects onto l = 0.

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "qst/photonic_state.hpp"

namespace qst {

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

// ---------------------------------------------------------------------------
// 50:50 beam splitter across two paths. Output labels may reuse input labels;
// the substitution is simultaneous.
inline PhotonicState apply_bs(const PhotonicState& s, PathId in1, PathId in2, PathId out1,
                              PathId out2) {
  if (in1 == in2 || out1 == out2) throw std::invalid_argument("apply_bs: ports must be distinct");
  return apply_mode_map(s, [&](const ModeLabel& m) -> std::optional<ModeImage> {
    if (m.path == in1) {
      ModeLabel t = m, r = m;
      t.path = out1;
      r.path = out2;
      r.oam = -r.oam;
      return ModeImage{{t, kInvSqrt2}, {r, kInvSqrt2}};
    }
    if (m.path == in2) {
      ModeLabel t = m, r = m;
      t.path = out2;
      r.path = out1;
      r.oam = -r.oam;
      return ModeImage{{t, kInvSqrt2}, {r, -kInvSqrt2}};
    }
    return std::nullopt;
  });
}

// Polarizing beam splitter: H transmits (in1->out1, in2->out2), V reflects
// with the OAM negated (in1->out2, in2->out1), reflection phase +1.
inline PhotonicState apply_pbs(const PhotonicState& s, PathId in1, PathId in2, PathId out1,
                               PathId out2) {
  if (in1 == in2 || out1 == out2) throw std::invalid_argument("apply_pbs: ports must be distinct");
  return apply_mode_map(s, [&](const ModeLabel& m) -> std::optional<ModeImage> {
    if (m.path != in1 && m.path != in2) return std::nullopt;
    ModeLabel t = m;
    if (m.pol == Polarization::H) {
      t.path = (m.path == in1) ? out1 : out2;
    } else {
      t.path = (m.path == in1) ? out2 : out1;
      t.oam = -t.oam;
    }
    return ModeImage{{t, cplx{1.0, 0.0}}};
  });
}

enum class WaveplateKind { Half, Quarter };

// Jones matrix of a wave plate with fast axis at `theta_deg` degrees.
inline std::array<std::array<cplx, 2>, 2> waveplate_jones(WaveplateKind kind, double theta_deg) {
  const double th = theta_deg * std::numbers::pi / 180.0;
  const double c = std::cos(th), s = std::sin(th);
  const cplx retard = (kind == WaveplateKind::Half) ? cplx{-1.0, 0.0} : cplx{0.0, -1.0};
  // R(theta) diag(1, retard) R(-theta)
  return {{{c * c + retard * s * s, (1.0 - retard) * s * c},
           {(1.0 - retard) * s * c, s * s + retard * c * c}}};
}

inline PhotonicState apply_waveplate(const PhotonicState& s, PathId path, WaveplateKind kind,
                                     double theta_deg) {
  const auto j = waveplate_jones(kind, theta_deg);
  return apply_mode_map(s, [&](const ModeLabel& m) -> std::optional<ModeImage> {
    if (m.path != path) return std::nullopt;
    const int col = static_cast<int>(m.pol);
    ModeLabel h = m, v = m;
    h.pol = Polarization::H;
    v.pol = Polarization::V;
    ModeImage img;
    if (std::abs(j[0][col]) > kPruneTol) img.emplace_back(h, j[0][col]);
    if (std::abs(j[1][col]) > kPruneTol) img.emplace_back(v, j[1][col]);
    return img;
  });
}

// Spiral phase plate: shifts OAM by delta_l on one path.
inline PhotonicState apply_spp(const PhotonicState& s, PathId path, int delta_l) {
  if (delta_l == 0) throw std::invalid_argument("apply_spp: delta_l must be nonzero");
  return apply_mode_map(s, [&](const ModeLabel& m) -> std::optional<ModeImage> {
    if (m.path != path) return std::nullopt;
    ModeLabel t = m;
    t.oam += delta_l;
    return ModeImage{{t, cplx{1.0, 0.0}}};
  });
}

inline PhotonicState apply_mirror(const PhotonicState& s, PathId path) {
  return apply_mode_map(s, [&](const ModeLabel& m) -> std::optional<ModeImage> {
    if (m.path != path) return std::nullopt;
    ModeLabel t = m;
    t.oam = -t.oam;
    return ModeImage{{t, cplx{1.0, 0.0}}};
  });
}

// Ideal OAM sorter: +l0 exits to port_plus, -l0 to port_minus.
inline PhotonicState apply_oam_sorter(const PhotonicState& s, PathId in, PathId port_plus,
                                      PathId port_minus, int ell0) {
  if (ell0 < 1) throw std::invalid_argument("apply_oam_sorter: ell0 must be >= 1");
  return apply_mode_map(s, [&](const ModeLabel& m) -> std::optional<ModeImage> {
    if (m.path != in) return std::nullopt;
    if (m.oam != ell0 && m.oam != -ell0)
      throw std::invalid_argument("apply_oam_sorter: OAM " + std::to_string(m.oam) +
                                  " outside {+-" + std::to_string(ell0) + "}");
    ModeLabel t = m;
    t.path = (m.oam == ell0) ? port_plus : port_minus;
    return ModeImage{{t, cplx{1.0, 0.0}}};
  });
}

// Single-mode fiber: keeps only l = 0 on `path`. Terms without a photon on
// `path` pass through. Returns the surviving (normalized) state and the
// projection probability.
inline PostSelectResult smf_project(const PhotonicState& s, PathId path) {
  PhotonicState kept;
  double mass = 0.0;
  for (const auto& [basis, amp] : s.terms()) {
    bool keep = true;
    for (const auto& m : basis.modes())
      if (m.path == path && m.oam != 0) keep = false;
    if (keep) {
      kept.add_term(basis, amp);
      mass += std::norm(amp);
    }
  }
  PostSelectResult r;
  r.probability = mass;
  if (mass >= kPruneTol * kPruneTol) {
    kept.normalize();
    r.state = std::move(kept);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Declarative element description, used to spell out fixed networks (the
// Bell-state sorter) as data.

struct ElementSpec {
  enum class Kind { Bs50, Pbs, Hwp, Qwp, Spp, Mirror, OamSorter, SmfProjector };

  Kind kind{};
  std::vector<PathId> in_ports;   // element-specific arity, see apply_element
  std::vector<PathId> out_ports;
  double angle_deg = 0.0;  // wave plates; reduced mod 180
  int delta_l = 0;         // spiral phase plate
  int ell0 = 1;            // OAM sorter
  bool reflection_flips_oam = true;  // documented invariant of this library
};

inline PhotonicState apply_element(const PhotonicState& s, const ElementSpec& e) {
  if (!e.reflection_flips_oam)
    throw std::invalid_argument("apply_element: reflections always negate OAM here");
  switch (e.kind) {
    case ElementSpec::Kind::Bs50:
      if (e.in_ports.size() != 2 || e.out_ports.size() != 2)
        throw std::invalid_argument("apply_element: Bs50 needs 2 in / 2 out ports");
      return apply_bs(s, e.in_ports[0], e.in_ports[1], e.out_ports[0], e.out_ports[1]);
    case ElementSpec::Kind::Pbs:
      if (e.in_ports.size() != 2 || e.out_ports.size() != 2)
        throw std::invalid_argument("apply_element: Pbs needs 2 in / 2 out ports");
      return apply_pbs(s, e.in_ports[0], e.in_ports[1], e.out_ports[0], e.out_ports[1]);
    case ElementSpec::Kind::Hwp:
    case ElementSpec::Kind::Qwp: {
      if (e.in_ports.size() != 1)
        throw std::invalid_argument("apply_element: wave plate needs 1 port");
      const auto kind =
          (e.kind == ElementSpec::Kind::Hwp) ? WaveplateKind::Half : WaveplateKind::Quarter;
      return apply_waveplate(s, e.in_ports[0], kind, std::fmod(e.angle_deg, 180.0));
    }
    case ElementSpec::Kind::Spp:
      if (e.in_ports.size() != 1) throw std::invalid_argument("apply_element: Spp needs 1 port");
      return apply_spp(s, e.in_ports[0], e.delta_l);
    case ElementSpec::Kind::Mirror:
      if (e.in_ports.size() != 1)
        throw std::invalid_argument("apply_element: Mirror needs 1 port");
      return apply_mirror(s, e.in_ports[0]);
    case ElementSpec::Kind::OamSorter:
      if (e.in_ports.size() != 1 || e.out_ports.size() != 2)
        throw std::invalid_argument("apply_element: OamSorter needs 1 in / 2 out ports");
      return apply_oam_sorter(s, e.in_ports[0], e.out_ports[0], e.out_ports[1], e.ell0);
    case ElementSpec::Kind::SmfProjector: {
      if (e.in_ports.size() != 1)
        throw std::invalid_argument("apply_element: SmfProjector needs 1 port");
      auto r = smf_project(s, e.in_ports[0]);
      if (!r.state.has_value())
        throw std::invalid_argument("apply_element: SmfProjector removed the whole state");
      return *r.state;
    }
  }
  throw std::logic_error("apply_element: unknown element kind");
}

}  // namespace qst
