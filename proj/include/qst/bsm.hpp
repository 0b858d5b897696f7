#pragma once

// Complete Bell-state measurement on a single photon carrying a
// polarization qubit and an OAM qubit.
//
// Hybrid basis: index = pol*2 + oam with (H, +l0) -> 0, so the order is
//   e0 = |H,+l0>,  e1 = |H,-l0>,  e2 = |V,+l0>,  e3 = |V,-l0>.
// The four hybrid Bell states are
//   omega+- = (|H,+l0> +- |V,-l0>) / sqrt(2)
//   xi+-    = (|H,-l0> +- |V,+l0>) / sqrt(2)
// and they are sorted onto four output ports:
//   omega+ -> A,  omega- -> B,  xi+ -> C,  xi- -> D.
//
// Two independent routes compute the sort:
//  1. closed form: the disentangling unitary written as a 4x4 matrix, then
//     port amplitudes <bell_k|s>;
//  2. optical network: a declarative list of elements (PBS interferometers,
//     a half-wave plate, an OAM sorter per arm, spiral phase plates, fiber
//     projectors) propagated with the full Fock-state algebra.
// The two routes must agree amplitude-by-amplitude; keeping both is a
// deliberate cross-check and they must not be merged.
//
// Network layout (stage 1 disentangles, stages 2-4 sort and flatten):
//   stage 1: MZ1 -> HWP@22.5 -> MZ2, where each MZ is PBS - mirror - PBS
//            and acts as |H,l> -> |H,l>, |V,l> -> |V,-l>;
//   stage 2: PBS splitting H (straight) from V (reflected, OAM negated);
//   stage 3: OAM sorter in each arm, +l0 vs -l0;
//   stage 4: spiral phase plate bringing each port to l = 0, then a
//            single-mode fiber projector.

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qst/elements.hpp"
#include "qst/linalg.hpp"
#include "qst/modes.hpp"
#include "qst/photonic_state.hpp"
#include "qst/rng.hpp"

namespace qst {

enum class BellStateKind { OmegaPlus, OmegaMinus, XiPlus, XiMinus };

inline constexpr std::array<BellStateKind, 4> kAllBellStates = {
    BellStateKind::OmegaPlus, BellStateKind::OmegaMinus, BellStateKind::XiPlus,
    BellStateKind::XiMinus};

inline const char* to_string(BellStateKind k) {
  switch (k) {
    case BellStateKind::OmegaPlus: return "omega+";
    case BellStateKind::OmegaMinus: return "omega-";
    case BellStateKind::XiPlus: return "xi+";
    case BellStateKind::XiMinus: return "xi-";
  }
  return "?";
}

enum class Port { A, B, C, D };

inline const char* to_string(Port p) {
  switch (p) {
    case Port::A: return "A";
    case Port::B: return "B";
    case Port::C: return "C";
    case Port::D: return "D";
  }
  return "?";
}

// Which Bell state exits on which port. The identity assignment is the one
// realized by the network below.
struct PortAssignment {
  std::array<Port, 4> port_of{Port::A, Port::B, Port::C, Port::D};

  Port port(BellStateKind k) const { return port_of[static_cast<std::size_t>(k)]; }

  BellStateKind state_at(Port p) const {
    for (std::size_t i = 0; i < 4; ++i)
      if (port_of[i] == p) return static_cast<BellStateKind>(i);
    throw std::invalid_argument("PortAssignment: port not assigned");
  }
};

// Single-photon hybrid Bell state as a Vec4, index pol*2 + oam.
inline Vec4 bell_state(BellStateKind k) {
  Vec4 v{};
  switch (k) {
    case BellStateKind::OmegaPlus: v[0] = kInvSqrt2; v[3] = kInvSqrt2; break;
    case BellStateKind::OmegaMinus: v[0] = kInvSqrt2; v[3] = -kInvSqrt2; break;
    case BellStateKind::XiPlus: v[1] = kInvSqrt2; v[2] = kInvSqrt2; break;
    case BellStateKind::XiMinus: v[1] = kInvSqrt2; v[2] = -kInvSqrt2; break;
  }
  return v;
}

// Unitary of stage 1. It maps
//   omega+ -> |H,+l0>, omega- -> |V,-l0>, xi+ -> |H,-l0>, xi- -> |V,+l0>,
// each with phase exactly +1, i.e. a Hadamard inside the {e0,e3} doublet
// and a Hadamard inside the {e1,e2} doublet. It is self-inverse.
inline Mat4 disentangle_matrix() {
  Mat4 u;
  u(0, 0) = kInvSqrt2; u(3, 0) = kInvSqrt2;
  u(0, 3) = kInvSqrt2; u(3, 3) = -kInvSqrt2;
  u(1, 1) = kInvSqrt2; u(2, 1) = kInvSqrt2;
  u(1, 2) = kInvSqrt2; u(2, 2) = -kInvSqrt2;
  return u;
}

inline Vec4 disentangle_stage(const Vec4& s) { return disentangle_matrix().apply(s); }

// Port amplitudes of the closed-form route: a_k = <bell_k|s>.
inline std::array<cplx, 4> sort_amplitudes(const Vec4& s) {
  std::array<cplx, 4> a{};
  for (std::size_t k = 0; k < 4; ++k) a[k] = inner(bell_state(kAllBellStates[k]), s);
  return a;
}

inline std::array<double, 4> sort_probabilities(const Vec4& s) {
  std::array<double, 4> p{};
  const auto a = sort_amplitudes(s);
  for (std::size_t k = 0; k < 4; ++k) p[k] = std::norm(a[k]);
  return p;
}

inline std::array<double, 4> sort_probabilities(const Mat4& rho) {
  std::array<double, 4> p{};
  for (std::size_t k = 0; k < 4; ++k)
    p[k] = quadratic_form(bell_state(kAllBellStates[k]), rho).real();
  return p;
}

struct BellOutcome {
  BellStateKind kind{};
  Port port{};
};

inline BellOutcome measure(const Vec4& s, RngStream& rng,
                           const PortAssignment& assignment = {}) {
  const auto p = sort_probabilities(s);
  const auto k = static_cast<BellStateKind>(rng.sample_discrete(p));
  return {k, assignment.port(k)};
}

inline BellOutcome measure(const Mat4& rho, RngStream& rng,
                           const PortAssignment& assignment = {}) {
  const auto p = sort_probabilities(rho);
  const auto k = static_cast<BellStateKind>(rng.sample_discrete(p));
  return {k, assignment.port(k)};
}

// ---------------------------------------------------------------------------
// Network route.

// Fixed path labels of the sorter network.
namespace bsm_paths {
inline constexpr PathId kIn{0};
inline constexpr PathId kMz1T{1};      // MZ1 transmitted (H) arm
inline constexpr PathId kMz1R{2};      // MZ1 reflected (V) arm
inline constexpr PathId kMz1Out{3};
inline constexpr PathId kMz2T{4};
inline constexpr PathId kMz2R{5};
inline constexpr PathId kMz2Out{6};
inline constexpr PathId kArmH{7};
inline constexpr PathId kArmV{8};
inline constexpr PathId kPortA{9};
inline constexpr PathId kPortB{10};
inline constexpr PathId kPortC{11};
inline constexpr PathId kPortD{12};
// Auxiliary vacuum inputs / dump outputs of the PBS elements.
inline constexpr PathId kVac1{13};
inline constexpr PathId kDump1{14};
inline constexpr PathId kVac2{15};
inline constexpr PathId kDump2{16};
inline constexpr PathId kVac3{17};
}  // namespace bsm_paths

inline std::array<PathId, 4> bsm_port_paths() {
  return {bsm_paths::kPortA, bsm_paths::kPortB, bsm_paths::kPortC, bsm_paths::kPortD};
}

// The complete sorter as data. Propagating any single-photon hybrid state
// through this list reproduces disentangle_stage() followed by the port
// split, with every relative phase equal to +1.
inline std::vector<ElementSpec> bsm_network(int ell0 = 1) {
  if (ell0 < 1) throw std::invalid_argument("bsm_network: ell0 must be >= 1");
  using K = ElementSpec::Kind;
  namespace bp = bsm_paths;
  std::vector<ElementSpec> net;
  // Stage 1a: MZ1 = PBS, mirror in the reflected arm, PBS.
  net.push_back({K::Pbs, {bp::kIn, bp::kVac1}, {bp::kMz1T, bp::kMz1R}});
  net.push_back({K::Mirror, {bp::kMz1R}, {bp::kMz1R}});
  net.push_back({K::Pbs, {bp::kMz1T, bp::kMz1R}, {bp::kMz1Out, bp::kDump1}});
  // Stage 1b: half-wave plate at 22.5 deg (Hadamard on polarization).
  net.push_back({K::Hwp, {bp::kMz1Out}, {bp::kMz1Out}, 22.5});
  // Stage 1c: MZ2, same as MZ1.
  net.push_back({K::Pbs, {bp::kMz1Out, bp::kVac2}, {bp::kMz2T, bp::kMz2R}});
  net.push_back({K::Mirror, {bp::kMz2R}, {bp::kMz2R}});
  net.push_back({K::Pbs, {bp::kMz2T, bp::kMz2R}, {bp::kMz2Out, bp::kDump2}});
  // Stage 2: split H from V.
  net.push_back({K::Pbs, {bp::kMz2Out, bp::kVac3}, {bp::kArmH, bp::kArmV}});
  // Stage 3: OAM sorter per arm.
  ElementSpec sort_h{K::OamSorter, {bp::kArmH}, {bp::kPortA, bp::kPortC}};
  sort_h.ell0 = ell0;
  net.push_back(sort_h);
  ElementSpec sort_v{K::OamSorter, {bp::kArmV}, {bp::kPortB, bp::kPortD}};
  sort_v.ell0 = ell0;
  net.push_back(sort_v);
  // Stage 4: flatten each port to l = 0 and project onto the fiber mode.
  for (PathId port : bsm_port_paths()) {
    ElementSpec spp{K::Spp, {port}, {port}};
    spp.delta_l = (port == bp::kPortA || port == bp::kPortB) ? -ell0 : ell0;
    net.push_back(spp);
    net.push_back({K::SmfProjector, {port}, {port}});
  }
  return net;
}

// Single photon on `path` carrying the hybrid state `s` (index pol*2+oam).
inline PhotonicState single_photon_hybrid(const Vec4& s, PathId path, int ell0 = 1,
                                          WavepacketTag tag = 0) {
  PhotonicState st;
  for (std::size_t i = 0; i < 4; ++i) {
    if (std::abs(s[i]) < kPruneTol) continue;
    const Polarization pol = (i / 2 == 0) ? Polarization::H : Polarization::V;
    const int oam = (i % 2 == 0) ? ell0 : -ell0;
    st.add_term(FockBasisState({ModeLabel{path, pol, oam, tag}}), s[i]);
  }
  if (st.empty()) throw std::invalid_argument("single_photon_hybrid: zero state");
  return st;
}

// Propagates |s> through the network and reads the amplitude arriving at
// each port (ports A..D in order). Requires a normalized input.
inline std::array<cplx, 4> network_port_amplitudes(const Vec4& s, int ell0 = 1) {
  if (std::abs(norm(s) - 1.0) > kNormTol)
    throw std::invalid_argument("network_port_amplitudes: input must be normalized");
  PhotonicState st = single_photon_hybrid(s, bsm_paths::kIn, ell0);
  for (const auto& e : bsm_network(ell0)) st = apply_element(st, e);

  std::array<cplx, 4> amps{};
  const auto ports = bsm_port_paths();
  for (const auto& [basis, amp] : st.terms()) {
    const auto& m = basis.modes()[0];
    bool found = false;
    for (std::size_t k = 0; k < 4; ++k) {
      if (m.path == ports[k]) {
        if (m.oam != 0)
          throw std::logic_error("network_port_amplitudes: port photon not flattened to l=0");
        amps[k] += amp;
        found = true;
      }
    }
    if (!found) throw std::logic_error("network_port_amplitudes: photon on unexpected path");
  }
  return amps;
}

inline std::array<double, 4> network_port_probabilities(const Vec4& s, int ell0 = 1) {
  const auto a = network_port_amplitudes(s, ell0);
  std::array<double, 4> p{};
  for (std::size_t k = 0; k < 4; ++k) p[k] = std::norm(a[k]);
  return p;
}

}  // namespace qst
