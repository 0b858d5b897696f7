#pragma once

// Mode bookkeeping for the photonic simulator.
//
// A mode is (path, polarization, OAM value, wavepacket tag). The wavepacket
// tag models temporal distinguishability: photons with different tags never
// interfere and the tag is traced out at detection.

#include <compare>
#include <cstdint>
#include <string>

namespace qst {

enum class Polarization : std::uint8_t { H = 0, V = 1 };

inline const char* to_string(Polarization p) { return p == Polarization::H ? "H" : "V"; }

struct PathId {
  std::uint32_t value = 0;
  auto operator<=>(const PathId&) const = default;
};

using WavepacketTag = std::uint32_t;

struct ModeLabel {
  PathId path;
  Polarization pol = Polarization::H;
  int oam = 0;  // topological charge l; sign flips on reflection
  WavepacketTag wavepacket = 0;

  auto operator<=>(const ModeLabel&) const = default;
};

inline std::string to_string(const ModeLabel& m) {
  return "(path " + std::to_string(m.path.value) + ", " + to_string(m.pol) +
         ", l=" + std::to_string(m.oam) + ", wp=" + std::to_string(m.wavepacket) + ")";
}

}  // namespace qst
