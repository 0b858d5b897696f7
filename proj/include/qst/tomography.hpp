#pragma once

// Maximum-likelihood tomography of the output OAM qubit.
//
// Measurement set: the six projectors |chi_i><chi_i| for
// chi in {+l0, -l0, D, A, R, L}. They sum to 3*I, i.e. scaled by 1/3 they
// form an informationally complete POVM, and with equal shots per projector
// the Poisson likelihood equals the POVM multinomial likelihood up to a
// constant (sum_i p_i = 3 is rho-independent).
//
// The reconstruction is the diluted R-rho-R fixed-point iteration
//   R(rho) = (1/N) sum_i (n_i / p_i) Pi_i,   p_i = tr(Pi_i rho),
//   rho <- G rho G / tr(...),   G = I + step (R - I),
// with likelihood backtracking on `step`, which makes every accepted update
// a strict ascent while the congruence keeps rho positive and unit-trace.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qst/errors.hpp"
#include "qst/hom.hpp"
#include "qst/linalg.hpp"
#include "qst/rng.hpp"

namespace qst {

inline constexpr std::array<OamProjection, 6> kAllProjections = {
    OamProjection::Plus, OamProjection::Minus, OamProjection::D,
    OamProjection::A,    OamProjection::R,     OamProjection::L};

inline Mat2 projector(OamProjection b) { return outer(oam_projection_vector(b)); }

inline bool is_density_matrix(const Mat2& rho, double tol = 1e-9) {
  if (!is_hermitian(rho, tol)) return false;
  if (std::abs(rho.trace().real() - 1.0) > tol || std::abs(rho.trace().imag()) > tol) return false;
  const auto ev = hermitian_eigenvalues(rho);
  return ev[0] > -tol && ev[1] > -tol;
}

// Measured (or expected) counts for the six projectors, in kAllProjections
// order. Counts are doubles so that exact expected counts can be fed to the
// estimator; exposures record the shots devoted to each projector.
struct CountRecord {
  std::array<double, 6> counts{};
  std::array<double, 6> exposures{};

  double total() const {
    double n = 0.0;
    for (double c : counts) n += c;
    return n;
  }
};

inline std::array<double, 6> projector_probabilities(const Mat2& rho) {
  std::array<double, 6> p{};
  for (std::size_t i = 0; i < 6; ++i)
    p[i] = quadratic_form(oam_projection_vector(kAllProjections[i]), rho).real();
  return p;
}

inline CountRecord exact_counts(const Mat2& rho, double shots_per_projector) {
  if (!(shots_per_projector > 0.0))
    throw std::invalid_argument("exact_counts: shots_per_projector must be positive");
  const auto p = projector_probabilities(rho);
  CountRecord c;
  for (std::size_t i = 0; i < 6; ++i) {
    c.counts[i] = shots_per_projector * std::max(p[i], 0.0);
    c.exposures[i] = shots_per_projector;
  }
  return c;
}

enum class CountingScheme {
  PoissonPerProjector,  // n_i ~ Poisson(shots * p_i), independent settings
  BinomialPerBasis,     // shots per basis pair, split binomially
};

inline CountRecord simulate_counts(const Mat2& rho, std::uint64_t shots_per_projector,
                                   CountingScheme scheme, RngStream& rng) {
  if (shots_per_projector == 0)
    throw std::invalid_argument("simulate_counts: shots_per_projector must be positive");
  const auto p = projector_probabilities(rho);
  CountRecord c;
  const double shots = static_cast<double>(shots_per_projector);
  if (scheme == CountingScheme::PoissonPerProjector) {
    for (std::size_t i = 0; i < 6; ++i) {
      c.counts[i] = static_cast<double>(rng.poisson(shots * std::max(p[i], 0.0)));
      c.exposures[i] = shots;
    }
  } else {
    // Each basis pair (indices 2j, 2j+1) resolves every photon, so the two
    // probabilities sum to 1 and a binomial split is exact.
    for (std::size_t j = 0; j < 3; ++j) {
      const double q = std::clamp(p[2 * j], 0.0, 1.0);
      const auto first = rng.binomial(static_cast<long long>(shots_per_projector), q);
      c.counts[2 * j] = static_cast<double>(first);
      c.counts[2 * j + 1] = static_cast<double>(shots_per_projector) - static_cast<double>(first);
      c.exposures[2 * j] = shots;
      c.exposures[2 * j + 1] = shots;
    }
  }
  return c;
}

// sum_i n_i ln p_i with p_i clamped away from zero.
inline double log_likelihood(const CountRecord& c, const Mat2& rho) {
  const auto p = projector_probabilities(rho);
  double ll = 0.0;
  for (std::size_t i = 0; i < 6; ++i)
    if (c.counts[i] > 0.0) ll += c.counts[i] * std::log(std::max(p[i], 1e-12));
  return ll;
}

struct MleOptions {
  int max_iterations = 10000;
  double likelihood_tolerance = 1e-10;
};

struct MleResult {
  Mat2 rho;
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
};

inline MleResult mle_reconstruct(const CountRecord& counts, const MleOptions& opt = {}) {
  const double total = counts.total();
  if (!(total > 0.0)) throw std::invalid_argument("mle_reconstruct: no counts");
  for (double n : counts.counts)
    if (n < 0.0) throw std::invalid_argument("mle_reconstruct: negative count");

  Mat2 rho = cplx{0.5, 0.0} * Mat2::identity();
  double ll = log_likelihood(counts, rho);

  MleResult r;
  for (int iter = 1; iter <= opt.max_iterations; ++iter) {
    r.iterations = iter;
    const auto p = projector_probabilities(rho);
    Mat2 big_r;
    for (std::size_t i = 0; i < 6; ++i) {
      const double w = counts.counts[i] / (total * std::max(p[i], 1e-12));
      if (w != 0.0) big_r += cplx{w, 0.0} * projector(kAllProjections[i]);
    }

    // Backtracked dilution: G = I + step (R - I).
    const Mat2 dir = big_r + cplx{-1.0, 0.0} * Mat2::identity();
    double step = 1.0;
    bool accepted = false;
    Mat2 next;
    double next_ll = ll;
    for (int bt = 0; bt < 60; ++bt, step *= 0.5) {
      const Mat2 g = Mat2::identity() + cplx{step, 0.0} * dir;
      Mat2 cand = g * rho * g.adjoint();
      const double tr = cand.trace().real();
      if (!(tr > 1e-300)) continue;
      cand *= cplx{1.0 / tr, 0.0};
      const double cll = log_likelihood(counts, cand);
      if (cll >= ll - 1e-13) {
        next = cand;
        next_ll = cll;
        accepted = true;
        break;
      }
    }
    if (!accepted) {  // no direction of ascent left at numerical precision
      r.converged = true;
      break;
    }
    const double gain = next_ll - ll;
    rho = next;
    ll = next_ll;
    if (gain < opt.likelihood_tolerance) {
      r.converged = true;
      break;
    }
  }
  r.rho = rho;
  r.log_likelihood = ll;
  return r;
}

inline double fidelity(const Mat2& rho, const Vec2& psi) {
  return quadratic_form(psi, rho).real();
}

// Parametric bootstrap: redraw Poisson counts around the fitted
// probabilities, refit, and return the standard deviation of the fidelity
// over the resamples.
inline double bootstrap_fidelity_stderr(const CountRecord& base, const Mat2& rho_hat,
                                        const Vec2& target, int resamples, std::uint64_t seed,
                                        const MleOptions& opt = {}) {
  if (resamples < 2) throw std::invalid_argument("bootstrap_fidelity_stderr: need >= 2 resamples");
  const auto p = projector_probabilities(rho_hat);
  std::vector<double> fs;
  fs.reserve(static_cast<std::size_t>(resamples));
  for (int b = 0; b < resamples; ++b) {
    RngStream rng = RngStream::derive(seed, static_cast<std::uint64_t>(b) + 1);
    CountRecord cb;
    cb.exposures = base.exposures;
    for (std::size_t i = 0; i < 6; ++i)
      cb.counts[i] =
          static_cast<double>(rng.poisson(base.exposures[i] * std::clamp(p[i], 0.0, 1.0)));
    if (!(cb.total() > 0.0)) {
      fs.push_back(0.5);  // all-zero redraw: only the flat prior state remains
      continue;
    }
    fs.push_back(fidelity(mle_reconstruct(cb, opt).rho, target));
  }
  double mean = 0.0;
  for (double f : fs) mean += f;
  mean /= static_cast<double>(fs.size());
  double var = 0.0;
  for (double f : fs) var += (f - mean) * (f - mean);
  var /= static_cast<double>(fs.size() - 1);
  return std::sqrt(var);
}

// ---------------------------------------------------------------------------
// One full tomography pass over a known true state.

struct TomoOptions {
  std::uint64_t shots_per_projector = 10000;
  bool exact = false;  // use expected counts instead of sampling
  CountingScheme scheme = CountingScheme::PoissonPerProjector;
  int bootstrap_resamples = 200;
  MleOptions mle{};
};

struct TomoRunResult {
  CountRecord counts;
  MleResult mle;
  double fidelity = 0.0;         // <target| rho_mle |target>
  double fidelity_stderr = 0.0;  // bootstrap; 0 for exact counts
};

inline TomoRunResult run_tomography(const Mat2& rho_true, const Vec2& target,
                                    const TomoOptions& opt, std::uint64_t seed) {
  if (!is_density_matrix(rho_true, 1e-7))
    throw std::invalid_argument("run_tomography: rho_true is not a density matrix");
  if (std::abs(norm(target) - 1.0) > kNormTol)
    throw std::invalid_argument("run_tomography: target must be normalized");

  TomoRunResult r;
  if (opt.exact) {
    r.counts = exact_counts(rho_true, static_cast<double>(opt.shots_per_projector));
  } else {
    RngStream rng = RngStream::derive(seed, 0);
    r.counts = simulate_counts(rho_true, opt.shots_per_projector, opt.scheme, rng);
  }
  r.mle = mle_reconstruct(r.counts, opt.mle);
  if (!r.mle.converged)
    throw NonConvergenceError("run_tomography: likelihood maximization did not converge");
  r.fidelity = fidelity(r.mle.rho, target);
  if (!opt.exact && opt.bootstrap_resamples >= 2)
    r.fidelity_stderr =
        bootstrap_fidelity_stderr(r.counts, r.mle.rho, target, opt.bootstrap_resamples, seed,
                                  opt.mle);
  return r;
}

}  // namespace qst
