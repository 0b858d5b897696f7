#pragma once

// Sparse second-quantized states of one or two photons.
//
// A basis ket is a multiset of occupied modes in canonical (sorted) order.
// Stored amplitudes always refer to *normalized* kets: |2;m> denotes
// (a_m^dag)^2 / sqrt(2!) |vac>, so a double occupancy carries no hidden
// normalization in the amplitude map. Operator algebra (the sqrt(n!)
// factors of bosonic creation operators) is handled internally by
// apply_mode_map.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qst/linalg.hpp"
#include "qst/modes.hpp"

namespace qst {

inline constexpr int kMaxPhotons = 2;

// Canonically ordered multiset of occupied modes.
class FockBasisState {
 public:
  FockBasisState() = default;

  explicit FockBasisState(std::vector<ModeLabel> modes) : modes_(std::move(modes)) {
    if (static_cast<int>(modes_.size()) > kMaxPhotons)
      throw std::invalid_argument("FockBasisState: more than two photons are not supported");
    std::sort(modes_.begin(), modes_.end());
  }

  const std::vector<ModeLabel>& modes() const { return modes_; }
  int photon_count() const { return static_cast<int>(modes_.size()); }

  int count_in_path(PathId p) const {
    int n = 0;
    for (const auto& m : modes_) n += (m.path == p) ? 1 : 0;
    return n;
  }

  // Occupation number of one specific mode label.
  int occupancy(const ModeLabel& m) const {
    int n = 0;
    for (const auto& x : modes_) n += (x == m) ? 1 : 0;
    return n;
  }

  // Product of n_m! over distinct modes; with <= 2 photons this is 1 or 2.
  double occupancy_factorial() const {
    return (modes_.size() == 2 && modes_[0] == modes_[1]) ? 2.0 : 1.0;
  }

  auto operator<=>(const FockBasisState&) const = default;

 private:
  std::vector<ModeLabel> modes_;
};

// Pure state: sparse map from basis kets to complex amplitudes. The map is
// ordered, so iteration (and therefore serialization) is deterministic.
class PhotonicState {
 public:
  using TermMap = std::map<FockBasisState, cplx>;

  PhotonicState() = default;

  static PhotonicState single_photon(const ModeLabel& m) {
    PhotonicState s;
    s.add_term(FockBasisState({m}), 1.0);
    return s;
  }

  static PhotonicState two_photons(const ModeLabel& m1, const ModeLabel& m2) {
    PhotonicState s;
    s.add_term(FockBasisState({m1, m2}), 1.0);
    return s;
  }

  void add_term(const FockBasisState& basis, cplx amp) {
    if (!terms_.empty() && basis.photon_count() != photon_number())
      throw std::invalid_argument("PhotonicState: mixed photon numbers in one state");
    auto [it, inserted] = terms_.try_emplace(basis, amp);
    if (!inserted) it->second += amp;
    if (std::abs(it->second) < kPruneTol) terms_.erase(it);
  }

  const TermMap& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  int photon_number() const {
    if (terms_.empty()) throw std::logic_error("photon_number: empty state");
    return terms_.begin()->first.photon_count();
  }

  double norm_squared() const {
    double n = 0.0;
    for (const auto& [b, a] : terms_) n += std::norm(a);
    return n;
  }

  double norm() const { return std::sqrt(norm_squared()); }

  PhotonicState& normalize() {
    const double n = norm();
    if (n < kPruneTol) throw std::invalid_argument("normalize: zero state");
    for (auto& [b, a] : terms_) a /= n;
    return *this;
  }

  PhotonicState& scale(cplx s) {
    for (auto& [b, a] : terms_) a *= s;
    return *this;
  }

  cplx amplitude(const FockBasisState& basis) const {
    auto it = terms_.find(basis);
    return it == terms_.end() ? cplx{} : it->second;
  }

  std::set<PathId> paths() const {
    std::set<PathId> ps;
    for (const auto& [b, a] : terms_)
      for (const auto& m : b.modes()) ps.insert(m.path);
    return ps;
  }

 private:
  TermMap terms_;
};

// <s1|s2>. States with different photon numbers are orthogonal by definition.
inline cplx inner_product(const PhotonicState& s1, const PhotonicState& s2) {
  if (s1.empty() || s2.empty()) return {};
  if (s1.photon_number() != s2.photon_number()) return {};
  cplx acc{};
  const auto& a = s1.terms();
  const auto& b = s2.terms();
  // Walk the smaller map, look up in the larger one.
  if (a.size() <= b.size()) {
    for (const auto& [basis, amp] : a) acc += std::conj(amp) * s2.amplitude(basis);
  } else {
    for (const auto& [basis, amp] : b) acc += std::conj(s1.amplitude(basis)) * amp;
  }
  return acc;
}

// |<s1|s2>| normalized; 1 means equal up to a global phase.
inline double overlap_magnitude(const PhotonicState& s1, const PhotonicState& s2) {
  return std::abs(inner_product(s1, s2)) / (s1.norm() * s2.norm());
}

// Product state of two states living on disjoint path sets.
inline PhotonicState tensor(const PhotonicState& s1, const PhotonicState& s2) {
  if (s1.empty() || s2.empty()) throw std::invalid_argument("tensor: empty operand");
  if (s1.photon_number() + s2.photon_number() > kMaxPhotons)
    throw std::invalid_argument("tensor: more than two photons are not supported");
  const auto p1 = s1.paths();
  for (const auto& p : s2.paths())
    if (p1.count(p)) throw std::invalid_argument("tensor: operands share path " + std::to_string(p.value));
  PhotonicState out;
  for (const auto& [b1, a1] : s1.terms())
    for (const auto& [b2, a2] : s2.terms()) {
      std::vector<ModeLabel> modes = b1.modes();
      modes.insert(modes.end(), b2.modes().begin(), b2.modes().end());
      out.add_term(FockBasisState(std::move(modes)), a1 * a2);
    }
  return out;
}

// One creation operator rewritten as a sum of creation operators.
using ModeImage = std::vector<std::pair<ModeLabel, cplx>>;
using ModeMap = std::function<std::optional<ModeImage>(const ModeLabel&)>;

// Applies a linear optical transformation given per-mode: a_m^dag ->
// sum_j c_j b_j^dag. Modes mapped to std::nullopt pass through unchanged.
// The substitution is simultaneous, so output labels may reuse input labels.
// Unitarity of the underlying mode matrix is the caller's responsibility;
// every element in this library satisfies it.
inline PhotonicState apply_mode_map(const PhotonicState& s, const ModeMap& map) {
  PhotonicState out;
  for (const auto& [basis, amp] : s.terms()) {
    // Amplitude of the normalized ket -> coefficient of the operator monomial.
    const cplx op_coeff = amp / std::sqrt(basis.occupancy_factorial());
    std::vector<ModeImage> images;
    images.reserve(basis.modes().size());
    for (const auto& m : basis.modes()) {
      auto img = map(m);
      if (img.has_value()) {
        if (img->empty()) throw std::invalid_argument("apply_mode_map: empty mode image");
        images.push_back(std::move(*img));
      } else {
        images.push_back(ModeImage{{m, cplx{1.0, 0.0}}});
      }
    }
    // Expand the product over photons (at most 2 factors).
    if (images.size() == 1) {
      for (const auto& [mode, c] : images[0])
        out.add_term(FockBasisState({mode}), op_coeff * c);
    } else {
      for (const auto& [m1, c1] : images[0])
        for (const auto& [m2, c2] : images[1]) {
          FockBasisState target({m1, m2});
          // Back from operator monomial to normalized-ket amplitude.
          out.add_term(target, op_coeff * c1 * c2 * std::sqrt(target.occupancy_factorial()));
        }
    }
  }
  return out;
}

struct PostSelectResult {
  std::optional<PhotonicState> state;  // normalized; nullopt if nothing survives
  double probability = 0.0;
};

// Keeps the coincidence part: exactly one photon in each of the two paths.
inline PostSelectResult post_select_coincidence(const PhotonicState& s, PathId pa, PathId pb) {
  if (s.empty() || s.photon_number() != 2)
    throw std::invalid_argument("post_select_coincidence: requires a two-photon state");
  if (pa == pb) throw std::invalid_argument("post_select_coincidence: identical paths");
  PhotonicState kept;
  double mass = 0.0;
  for (const auto& [basis, amp] : s.terms()) {
    if (basis.count_in_path(pa) == 1 && basis.count_in_path(pb) == 1) {
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
// Hybrid qubit view: one photon carrying (polarization, OAM) plus a second
// photon carrying OAM only, flattened to an 8-component vector indexed by
// (pol_c, oam_a, oam_b) with H/+l0 first.

struct HybridState {
  Vec8 vec{};
};

inline std::size_t hybrid_index(int pol, int oam_a, int oam_b) {
  return static_cast<std::size_t>(pol * 4 + oam_a * 2 + oam_b);
}

inline int oam_qubit_index(int oam, int ell0) {
  if (oam == ell0) return 0;
  if (oam == -ell0) return 1;
  throw std::invalid_argument("oam_qubit_index: OAM " + std::to_string(oam) +
                              " outside {+-" + std::to_string(ell0) + "}");
}

// Projects the two-photon state onto the hybrid qubit triple. The photon in
// path_ca must carry both qubits; the photon in path_b contributes its OAM.
// Polarization and wavepacket tag of the path_b photon, and the tag of the
// path_ca photon, must be constant across all terms (they are spectators).
inline HybridState to_hybrid(const PhotonicState& s, PathId path_ca, PathId path_b, int ell0 = 1) {
  if (s.empty() || s.photon_number() != 2)
    throw std::invalid_argument("to_hybrid: requires a two-photon state");
  HybridState h;
  bool have_context = false;
  Polarization pol_b{};
  WavepacketTag tag_ca{}, tag_b{};
  for (const auto& [basis, amp] : s.terms()) {
    if (basis.count_in_path(path_ca) != 1 || basis.count_in_path(path_b) != 1)
      throw std::invalid_argument("to_hybrid: term without one photon in each qubit path");
    const auto& m0 = basis.modes()[0];
    const auto& m1 = basis.modes()[1];
    const ModeLabel& ca = (m0.path == path_ca) ? m0 : m1;
    const ModeLabel& mb = (m0.path == path_ca) ? m1 : m0;
    if (!have_context) {
      pol_b = mb.pol;
      tag_ca = ca.wavepacket;
      tag_b = mb.wavepacket;
      have_context = true;
    } else if (mb.pol != pol_b || ca.wavepacket != tag_ca || mb.wavepacket != tag_b) {
      throw std::invalid_argument("to_hybrid: spectator degrees of freedom vary across terms");
    }
    h.vec[hybrid_index(static_cast<int>(ca.pol), oam_qubit_index(ca.oam, ell0),
                       oam_qubit_index(mb.oam, ell0))] += amp;
  }
  return h;
}

// Inverse embedding of to_hybrid with explicit spectator values.
inline PhotonicState from_hybrid(const HybridState& h, PathId path_ca, PathId path_b, int ell0 = 1,
                                 Polarization pol_b = Polarization::H, WavepacketTag tag = 0) {
  PhotonicState s;
  for (int pol = 0; pol < 2; ++pol)
    for (int qa = 0; qa < 2; ++qa)
      for (int qb = 0; qb < 2; ++qb) {
        const cplx amp = h.vec[hybrid_index(pol, qa, qb)];
        if (std::abs(amp) < kPruneTol) continue;
        const ModeLabel ca{path_ca, static_cast<Polarization>(pol), qa == 0 ? ell0 : -ell0, tag};
        const ModeLabel mb{path_b, pol_b, qb == 0 ? ell0 : -ell0, tag};
        s.add_term(FockBasisState({ca, mb}), amp);
      }
  if (s.empty()) throw std::invalid_argument("from_hybrid: zero state");
  return s;
}

}  // namespace qst
