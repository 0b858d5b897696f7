#pragma once

// Intra-photon teleportation of a polarization qubit onto the OAM of a
// distant photon.
//
// Composite system (8 dimensional, index pol*4 + oam_a*2 + oam_b):
//   - the polarization qubit alpha|H> + beta|V>, prepared on photon a;
//   - the OAM Bell pair on photons (a, b) from the interference source.
// The hybrid Bell-state measurement projects (pol, oam_a); conditioned on
// outcome k the photon-b state collapses, for the ideal channel, to
//   omega+: (alpha, -beta)/2    omega-: (alpha,  beta)/2
//   xi+:    (beta, -alpha)/2    xi-:    (-beta, -alpha)/2
// (amplitudes in the {+l0, -l0} basis, 1/2 prefactor, so each outcome has
// probability 1/4). Feed-forward applies the outcome-dependent correction
// that restores alpha|+l0> + beta|-l0>.
//
// Noise knobs:
//   - depolarizing_p: isotropic admixture on the source channel;
//   - feedforward_flip_prob: each of the two classical outcome bits
//     (family omega/xi, sign +/-) flips independently during feed-forward,
//     so the wrong correction may be applied. Detector counts always record
//     the true port.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qst/bsm.hpp"
#include "qst/errors.hpp"
#include "qst/hom.hpp"
#include "qst/linalg.hpp"
#include "qst/rng.hpp"

namespace qst {

// ---------------------------------------------------------------------------
// Input alphabet: the six poles of the polarization Bloch sphere.

enum class PoleLabel { H, V, D, A, R, L };

inline constexpr std::array<PoleLabel, 6> six_pole_alphabet() {
  return {PoleLabel::H, PoleLabel::V, PoleLabel::D, PoleLabel::A, PoleLabel::R, PoleLabel::L};
}

inline const char* to_string(PoleLabel p) {
  switch (p) {
    case PoleLabel::H: return "H";
    case PoleLabel::V: return "V";
    case PoleLabel::D: return "D";
    case PoleLabel::A: return "A";
    case PoleLabel::R: return "R";
    case PoleLabel::L: return "L";
  }
  return "?";
}

inline Vec2 pole_vector(PoleLabel p) {
  switch (p) {
    case PoleLabel::H: return {cplx{1.0, 0.0}, cplx{0.0, 0.0}};
    case PoleLabel::V: return {cplx{0.0, 0.0}, cplx{1.0, 0.0}};
    case PoleLabel::D: return {kInvSqrt2, kInvSqrt2};
    case PoleLabel::A: return {kInvSqrt2, -kInvSqrt2};
    case PoleLabel::R: return {cplx{kInvSqrt2, 0.0}, cplx{0.0, kInvSqrt2}};
    case PoleLabel::L: return {cplx{kInvSqrt2, 0.0}, cplx{0.0, -kInvSqrt2}};
  }
  throw std::invalid_argument("pole_vector: bad label");
}

// OAM analysis state whose amplitudes match the pole (H -> +l0 etc.).
inline OamProjection oam_analog(PoleLabel p) {
  switch (p) {
    case PoleLabel::H: return OamProjection::Plus;
    case PoleLabel::V: return OamProjection::Minus;
    case PoleLabel::D: return OamProjection::D;
    case PoleLabel::A: return OamProjection::A;
    case PoleLabel::R: return OamProjection::R;
    case PoleLabel::L: return OamProjection::L;
  }
  throw std::invalid_argument("oam_analog: bad label");
}

// General input: point (theta, phi) on the Bloch sphere.
inline Vec2 bloch_vector(double theta_rad, double phi_rad) {
  return {cplx{std::cos(theta_rad / 2.0), 0.0},
          std::polar(std::sin(theta_rad / 2.0), phi_rad)};
}

// ---------------------------------------------------------------------------
// Protocol pieces.

struct NoiseConfig {
  double depolarizing_p = 0.0;
  double feedforward_flip_prob = 0.0;

  void validate() const {
    if (depolarizing_p < 0.0 || depolarizing_p > 1.0)
      throw std::invalid_argument("NoiseConfig: depolarizing_p outside [0,1]");
    if (feedforward_flip_prob < 0.0 || feedforward_flip_prob > 0.5)
      throw std::invalid_argument("NoiseConfig: feedforward_flip_prob outside [0,0.5]");
  }
};

// rho_full = |psi><psi|_pol (x) rho_ab, index pol*4 + oam_a*2 + oam_b.
inline Mat8 compose_full_state(const Vec2& psi, const Mat4& channel) {
  if (std::abs(norm(psi) - 1.0) > kNormTol)
    throw std::invalid_argument("compose_full_state: input qubit must be normalized");
  return kron(outer(psi), channel);
}

// Photon-b amplitudes conditioned on Bell outcome k for the ideal channel,
// including the 1/2 prefactor (closed-form oracle for the projection).
inline Vec2 bell_branch(BellStateKind k, const Vec2& psi) {
  const cplx a = psi[0], b = psi[1];
  switch (k) {
    case BellStateKind::OmegaPlus: return {a / 2.0, -b / 2.0};
    case BellStateKind::OmegaMinus: return {a / 2.0, b / 2.0};
    case BellStateKind::XiPlus: return {b / 2.0, -a / 2.0};
    case BellStateKind::XiMinus: return {-b / 2.0, -a / 2.0};
  }
  throw std::invalid_argument("bell_branch: bad outcome");
}

// Feed-forward correction restoring alpha|+l0> + beta|-l0> (up to a global
// phase) from the branch for outcome k.
inline Mat2 correction_unitary(BellStateKind k) {
  Mat2 u;
  switch (k) {
    case BellStateKind::OmegaPlus: u(0, 0) = 1.0; u(1, 1) = -1.0; break;  // Z
    case BellStateKind::OmegaMinus: u(0, 0) = 1.0; u(1, 1) = 1.0; break;  // I
    case BellStateKind::XiPlus: u(0, 1) = 1.0; u(1, 0) = -1.0; break;     // Z X
    case BellStateKind::XiMinus: u(0, 1) = 1.0; u(1, 0) = 1.0; break;     // X
  }
  return u;
}

struct BsmProjection {
  std::array<Mat2, 4> conditional;     // unnormalized photon-b states M_k
  std::array<double, 4> probability;   // p_k = tr M_k
};

// Projects the hybrid (pol, oam_a) subsystem onto each Bell state:
// M_k[b,b'] = <bell_k| rho_full |bell_k> contracted over (pol, oam_a).
inline BsmProjection bsm_project_composite(const Mat8& rho_full) {
  BsmProjection out;
  for (std::size_t k = 0; k < 4; ++k) {
    const Vec4 bk = bell_state(kAllBellStates[k]);
    Mat2 m;
    for (std::size_t b = 0; b < 2; ++b) {
      for (std::size_t bp = 0; bp < 2; ++bp) {
        cplx acc{};
        for (std::size_t pa = 0; pa < 4; ++pa)
          for (std::size_t pap = 0; pap < 4; ++pap)
            acc += std::conj(bk[pa]) * rho_full(pa * 2 + b, pap * 2 + bp) * bk[pap];
        m(b, bp) = acc;
      }
    }
    out.conditional[k] = m;
    out.probability[k] = m.trace().real();
  }
  return out;
}

// P(reported k' | true k): independent flips of the family bit (omega/xi)
// and the sign bit. Row = true outcome, column = reported outcome.
inline std::array<std::array<double, 4>, 4> outcome_confusion(double flip_prob) {
  if (flip_prob < 0.0 || flip_prob > 0.5)
    throw std::invalid_argument("outcome_confusion: flip_prob outside [0,0.5]");
  std::array<std::array<double, 4>, 4> c{};
  for (std::size_t k = 0; k < 4; ++k) {
    for (std::size_t kp = 0; kp < 4; ++kp) {
      const double fam = ((k >> 1) == (kp >> 1)) ? 1.0 - flip_prob : flip_prob;
      const double sgn = ((k & 1) == (kp & 1)) ? 1.0 - flip_prob : flip_prob;
      c[k][kp] = fam * sgn;
    }
  }
  return c;
}

// FeedForward physically applies the (possibly mis-transmitted) correction.
// AnalysisOnly applies none and instead scores each detector record against
// the outcome-rotated reference, which yields the same fidelities when the
// feed-forward channel is noiseless.
enum class CorrectionMode { FeedForward, AnalysisOnly };

struct TeleportOptions {
  Vec2 input = pole_vector(PoleLabel::D);
  double delta_x_mm = 0.0;
  NoiseConfig noise{};
  DelayModel delay{};
  int ell0 = 1;
  CorrectionMode correction = CorrectionMode::FeedForward;
};

struct TeleportExactResult {
  Mat2 rho_out;                                // output OAM state after correction
  double fidelity = 0.0;                       // vs alpha|+l0> + beta|-l0>
  std::array<double, 4> outcome_probabilities{};
  std::array<double, 4> conditional_fidelity{};  // per true outcome, corrected
  double source_fidelity = 0.0;
  double post_select_probability = 0.0;
};

inline TeleportExactResult teleport_exact(const TeleportOptions& opt) {
  opt.noise.validate();
  const SourceOutput src =
      entangled_source(opt.delay, opt.delta_x_mm, opt.noise.depolarizing_p, opt.ell0);
  const Mat8 rho_full = compose_full_state(opt.input, src.channel);
  const BsmProjection proj = bsm_project_composite(rho_full);
  const Vec2 target = opt.input;  // same amplitudes on {+l0, -l0}

  TeleportExactResult r;
  r.outcome_probabilities = proj.probability;
  r.source_fidelity = src.fidelity_phi_minus;
  r.post_select_probability = src.post_select_probability;

  for (std::size_t k = 0; k < 4; ++k) {
    const Mat2 u = correction_unitary(kAllBellStates[k]);
    const Mat2 corrected = u * proj.conditional[k] * u.adjoint();
    r.conditional_fidelity[k] =
        (proj.probability[k] > 1e-12)
            ? quadratic_form(target, corrected).real() / proj.probability[k]
            : 0.0;
  }

  Mat2 rho_out;
  if (opt.correction == CorrectionMode::FeedForward) {
    const auto conf = outcome_confusion(opt.noise.feedforward_flip_prob);
    for (std::size_t k = 0; k < 4; ++k) {
      for (std::size_t kp = 0; kp < 4; ++kp) {
        if (conf[k][kp] == 0.0) continue;
        const Mat2 u = correction_unitary(kAllBellStates[kp]);
        rho_out += cplx{conf[k][kp], 0.0} * (u * proj.conditional[k] * u.adjoint());
      }
    }
  } else {
    for (std::size_t k = 0; k < 4; ++k) {
      const Mat2 u = correction_unitary(kAllBellStates[k]);
      rho_out += u * proj.conditional[k] * u.adjoint();
    }
  }
  r.rho_out = rho_out;
  r.fidelity = quadratic_form(target, rho_out).real();
  return r;
}

struct TeleportSampledResult {
  Mat2 rho_out;
  double fidelity = 0.0;
  std::array<std::uint64_t, 4> counts{};         // true detector ports
  std::array<double, 4> outcome_probabilities{};  // theory, for comparison
  double source_fidelity = 0.0;
  std::uint64_t shots = 0;
};

// Monte-Carlo run: each shot samples a Bell outcome (and, in FeedForward
// mode, the two classical bits through the flip channel) with an
// independent substream, then accumulates the corrected conditional state.
inline TeleportSampledResult teleport_sampled(const TeleportOptions& opt, std::uint64_t shots,
                                              std::uint64_t seed) {
  if (shots == 0) throw std::invalid_argument("teleport_sampled: shots must be positive");
  opt.noise.validate();
  const SourceOutput src =
      entangled_source(opt.delay, opt.delta_x_mm, opt.noise.depolarizing_p, opt.ell0);
  const Mat8 rho_full = compose_full_state(opt.input, src.channel);
  const BsmProjection proj = bsm_project_composite(rho_full);
  const Vec2 target = opt.input;

  std::array<Mat2, 4> corrected_by_report{};
  for (std::size_t kp = 0; kp < 4; ++kp) corrected_by_report[kp] = correction_unitary(kAllBellStates[kp]);

  TeleportSampledResult r;
  r.outcome_probabilities = proj.probability;
  r.source_fidelity = src.fidelity_phi_minus;
  r.shots = shots;

  Mat2 acc;
  for (std::uint64_t shot = 0; shot < shots; ++shot) {
    RngStream rng = RngStream::derive(seed, shot);
    const std::size_t k = rng.sample_discrete(proj.probability);
    ++r.counts[k];
    std::size_t kp = k;
    if (opt.correction == CorrectionMode::FeedForward) {
      if (rng.bernoulli(opt.noise.feedforward_flip_prob)) kp ^= 2;  // family bit
      if (rng.bernoulli(opt.noise.feedforward_flip_prob)) kp ^= 1;  // sign bit
    }
    const Mat2& u = corrected_by_report[kp];
    const Mat2 state = u * proj.conditional[k] * u.adjoint();
    acc += cplx{1.0 / (proj.probability[k] * static_cast<double>(shots)), 0.0} * state;
  }
  r.rho_out = acc;
  r.fidelity = quadratic_form(target, acc).real();
  return r;
}

// ---------------------------------------------------------------------------
// Classical benchmark: measure-and-resend without entanglement. The optimal
// strategy reaches an average fidelity of 2/3 over the six-pole alphabet.

inline std::array<std::array<Vec2, 2>, 3> mub_bases() {
  return {{{pole_vector(PoleLabel::H), pole_vector(PoleLabel::V)},
           {pole_vector(PoleLabel::D), pole_vector(PoleLabel::A)},
           {pole_vector(PoleLabel::R), pole_vector(PoleLabel::L)}}};
}

// Exact average over: six input poles, measurement basis chosen uniformly
// from the three mutually unbiased bases, Born-rule outcome, resend the
// outcome eigenstate.
inline double classical_baseline_exact() {
  const auto bases = mub_bases();
  double total = 0.0;
  for (PoleLabel pole : six_pole_alphabet()) {
    const Vec2 psi = pole_vector(pole);
    for (const auto& basis : bases) {
      for (const auto& e : basis) {
        const double p = std::norm(inner(e, psi));
        total += p * p / (6.0 * 3.0);  // fidelity of resent eigenstate = p
      }
    }
  }
  return total;
}

// Same strategy but the measurement basis is fixed to {H, V}.
inline double classical_baseline_fixed_basis() {
  double total = 0.0;
  const auto bases = mub_bases();
  for (PoleLabel pole : six_pole_alphabet()) {
    const Vec2 psi = pole_vector(pole);
    for (const auto& e : bases[0]) {
      const double p = std::norm(inner(e, psi));
      total += p * p / 6.0;
    }
  }
  return total;
}

struct ClassicalBaselineResult {
  double average_fidelity = 0.0;
  double standard_error = 0.0;
  std::uint64_t trials = 0;
};

inline ClassicalBaselineResult classical_baseline_mc(std::uint64_t trials, std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("classical_baseline_mc: trials must be positive");
  const auto poles = six_pole_alphabet();
  const auto bases = mub_bases();
  double sum = 0.0, sum_sq = 0.0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    RngStream rng = RngStream::derive(seed, t);
    const Vec2 psi = pole_vector(poles[static_cast<std::size_t>(rng() % 6)]);
    const auto& basis = bases[static_cast<std::size_t>(rng() % 3)];
    // Rounding can push |<e|psi>|^2 a few ulp past 1; clamp before sampling.
    const double p0 = std::min(1.0, std::norm(inner(basis[0], psi)));
    const double f = rng.bernoulli(p0) ? p0 : std::norm(inner(basis[1], psi));
    sum += f;
    sum_sq += f * f;
  }
  ClassicalBaselineResult r;
  r.trials = trials;
  r.average_fidelity = sum / static_cast<double>(trials);
  const double var =
      (sum_sq / static_cast<double>(trials)) - r.average_fidelity * r.average_fidelity;
  r.standard_error = std::sqrt(std::max(var, 0.0) / static_cast<double>(trials));
  return r;
}

// ---------------------------------------------------------------------------
// Calibration: match a target source fidelity with the depolarizing knob,
// then a target six-pole average teleportation fidelity with the
// feed-forward flip knob. Both responses are strictly monotone, so each
// stage is a bisection. Source noise alone cannot reproduce a measured
// average fidelity below (1 + 2 F_source) / 3, which is why the second knob
// exists.

struct CalibrationTargets {
  double source_fidelity = 0.0;
  double average_fidelity = 0.0;
  double delta_x_mm = 0.0;
  DelayModel delay{};
  int ell0 = 1;
  double tolerance = 1e-4;
};

struct CalibrationResult {
  double depolarizing_p = 0.0;
  double feedforward_flip_prob = 0.0;
  double achieved_source_fidelity = 0.0;
  double achieved_average_fidelity = 0.0;
};

inline double six_pole_average_fidelity(double delta_x_mm, const NoiseConfig& noise,
                                        const DelayModel& delay = {}, int ell0 = 1) {
  double sum = 0.0;
  for (PoleLabel pole : six_pole_alphabet()) {
    TeleportOptions opt;
    opt.input = pole_vector(pole);
    opt.delta_x_mm = delta_x_mm;
    opt.noise = noise;
    opt.delay = delay;
    opt.ell0 = ell0;
    sum += teleport_exact(opt).fidelity;
  }
  return sum / 6.0;
}

inline CalibrationResult calibrate(const CalibrationTargets& t) {
  if (!(t.source_fidelity > 0.25 && t.source_fidelity <= 1.0))
    throw std::invalid_argument("calibrate: source_fidelity must lie in (0.25, 1]");
  if (!(t.average_fidelity > 2.0 / 3.0 && t.average_fidelity <= 1.0))
    throw std::invalid_argument(
        "calibrate: average_fidelity must beat the classical bound 2/3 and not exceed 1");
  if (!(t.tolerance > 0.0)) throw std::invalid_argument("calibrate: tolerance must be positive");

  const auto source_f = [&](double p) {
    return entangled_source(t.delay, t.delta_x_mm, p, t.ell0).fidelity_phi_minus;
  };
  // Strictly decreasing in p: F = (1-p) F_pure + p/4.
  if (t.source_fidelity > source_f(0.0) + t.tolerance)
    throw std::invalid_argument(
        "calibrate: source_fidelity above what the delay alone allows at this delta_x");
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200 && (hi - lo) > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    (source_f(mid) > t.source_fidelity ? lo : hi) = mid;
  }
  const double p_star = 0.5 * (lo + hi);

  const auto avg_f = [&](double f) {
    return six_pole_average_fidelity(t.delta_x_mm, {p_star, f}, t.delay, t.ell0);
  };
  // Strictly decreasing in f on [0, 0.5].
  if (t.average_fidelity > avg_f(0.0) + t.tolerance)
    throw std::invalid_argument(
        "calibrate: average_fidelity above what the calibrated source supports");
  if (t.average_fidelity < avg_f(0.5) - t.tolerance)
    throw std::invalid_argument(
        "calibrate: average_fidelity below the fully scrambled feed-forward floor");
  double flo = 0.0, fhi = 0.5;
  for (int i = 0; i < 200 && (fhi - flo) > 1e-13; ++i) {
    const double mid = 0.5 * (flo + fhi);
    (avg_f(mid) > t.average_fidelity ? flo : fhi) = mid;
  }
  const double f_star = 0.5 * (flo + fhi);

  CalibrationResult r;
  r.depolarizing_p = p_star;
  r.feedforward_flip_prob = f_star;
  r.achieved_source_fidelity = source_f(p_star);
  r.achieved_average_fidelity = avg_f(f_star);

  if (std::abs(r.achieved_source_fidelity - t.source_fidelity) > t.tolerance)
    throw NonConvergenceError("calibrate: source fidelity bisection did not converge to target");
  if (std::abs(r.achieved_average_fidelity - t.average_fidelity) > t.tolerance)
    throw NonConvergenceError("calibrate: average fidelity bisection did not converge to target");
  return r;
}

}  // namespace qst
