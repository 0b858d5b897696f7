// Six-projector qubit tomography with maximum-likelihood reconstruction.

#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <complex>

#include <qst/tomography.hpp>

using namespace qst;
using Catch::Approx;

namespace {

Mat2 bloch(double x, double y, double z) {
  Mat2 rho;
  rho(0, 0) = cplx{0.5 * (1.0 + z), 0.0};
  rho(1, 1) = cplx{0.5 * (1.0 - z), 0.0};
  rho(0, 1) = cplx{0.5 * x, -0.5 * y};
  rho(1, 0) = cplx{0.5 * x, 0.5 * y};
  return rho;
}

}  // namespace

TEST_CASE("the six projectors tile the sphere three times over") {
  Mat2 sum;
  for (OamProjection b : kAllProjections) sum += projector(b);
  REQUIRE(sum.max_abs_diff(cplx{3.0, 0.0} * Mat2::identity()) < 1e-12);
  // Each basis pair resolves unity.
  for (std::size_t j = 0; j < 3; ++j) {
    const Mat2 pair = projector(kAllProjections[2 * j]) + projector(kAllProjections[2 * j + 1]);
    REQUIRE(pair.max_abs_diff(Mat2::identity()) < 1e-12);
  }
}

TEST_CASE("projector probabilities of a known state") {
  const Mat2 rho = outer(oam_projection_vector(OamProjection::D));
  const auto p = projector_probabilities(rho);
  REQUIRE(p[0] == Approx(0.5).margin(1e-12));  // plus
  REQUIRE(p[1] == Approx(0.5).margin(1e-12));  // minus
  REQUIRE(p[2] == Approx(1.0).margin(1e-12));  // D
  REQUIRE(p[3] == Approx(0.0).margin(1e-12));  // A
  REQUIRE(p[4] == Approx(0.5).margin(1e-12));  // R
  REQUIRE(p[5] == Approx(0.5).margin(1e-12));  // L
}

TEST_CASE("density-matrix predicate rejects malformed inputs") {
  REQUIRE(is_density_matrix(bloch(0.0, 0.0, 0.0)));
  REQUIRE(is_density_matrix(bloch(0.6, 0.0, 0.8)));       // pure state, boundary
  REQUIRE_FALSE(is_density_matrix(bloch(0.9, 0.0, 0.9))); // |r| > 1, not positive
  Mat2 scaled_trace = cplx{2.0, 0.0} * bloch(0.0, 0.0, 0.0);
  REQUIRE_FALSE(is_density_matrix(scaled_trace));
  Mat2 nonherm = bloch(0.0, 0.0, 0.0);
  nonherm(0, 1) = cplx{0.3, 0.0};
  REQUIRE_FALSE(is_density_matrix(nonherm));
}

TEST_CASE("exact expected counts drive the estimator back to the truth") {
  const std::array<Mat2, 4> truths = {
      outer(oam_projection_vector(OamProjection::D)),
      outer(oam_projection_vector(OamProjection::R)),
      bloch(0.0, 0.0, 0.4),        // diag(0.7, 0.3)
      bloch(0.3, 0.2, -0.4),       // interior point
  };
  for (const Mat2& truth : truths) {
    const CountRecord c = exact_counts(truth, 10000.0);
    const MleResult r = mle_reconstruct(c);
    REQUIRE(r.converged);
    REQUIRE(r.iterations <= 10000);
    REQUIRE(trace_distance(r.rho, truth) < 1e-6);
    REQUIRE(is_density_matrix(r.rho, 1e-9));
  }
  REQUIRE_THROWS_AS(exact_counts(bloch(0.0, 0.0, 0.0), 0.0), std::invalid_argument);
}

TEST_CASE("balanced equatorial counts pin the diagonal closed form") {
  CountRecord c;
  c.counts = {700.0, 300.0, 500.0, 500.0, 500.0, 500.0};
  c.exposures = {1000.0, 1000.0, 1000.0, 1000.0, 1000.0, 1000.0};
  const MleResult r = mle_reconstruct(c);
  REQUIRE(r.converged);
  REQUIRE(trace_distance(r.rho, bloch(0.0, 0.0, 0.4)) < 1e-6);
}

TEST_CASE("maximally mixed expected counts are a fixed point") {
  const Mat2 mixed = bloch(0.0, 0.0, 0.0);
  const MleResult r = mle_reconstruct(exact_counts(mixed, 1000.0));
  REQUIRE(r.converged);
  REQUIRE(r.rho.max_abs_diff(mixed) < 1e-9);
}

TEST_CASE("estimator input validation") {
  CountRecord empty;
  empty.exposures.fill(100.0);
  REQUIRE_THROWS_AS(mle_reconstruct(empty), std::invalid_argument);
  CountRecord negative;
  negative.counts = {10.0, -1.0, 5.0, 5.0, 5.0, 5.0};
  negative.exposures.fill(30.0);
  REQUIRE_THROWS_AS(mle_reconstruct(negative), std::invalid_argument);
}

TEST_CASE("binomial counting resolves every photon in each basis") {
  RngStream rng(11);
  const Mat2 rho = bloch(0.2, -0.3, 0.1);
  const CountRecord c = simulate_counts(rho, 5000, CountingScheme::BinomialPerBasis, rng);
  for (std::size_t j = 0; j < 3; ++j) {
    REQUIRE(c.counts[2 * j] + c.counts[2 * j + 1] == Approx(5000.0).margin(1e-9));
    REQUIRE(c.exposures[2 * j] == Approx(5000.0));
  }
  RngStream rng2(11);
  const CountRecord c2 = simulate_counts(rho, 5000, CountingScheme::BinomialPerBasis, rng2);
  REQUIRE(c.counts == c2.counts);

  RngStream rng3(11);
  REQUIRE_THROWS_AS(simulate_counts(rho, 0, CountingScheme::PoissonPerProjector, rng3),
                    std::invalid_argument);
}

TEST_CASE("sampled reconstructions beat the truth in likelihood") {
  const Mat2 truth = bloch(0.5, -0.2, 0.3);
  RngStream rng(2718);
  const CountRecord c = simulate_counts(truth, 10000, CountingScheme::PoissonPerProjector, rng);
  const MleResult r = mle_reconstruct(c);
  REQUIRE(r.converged);
  REQUIRE(r.log_likelihood >= log_likelihood(c, truth) - 1e-9);
  REQUIRE(r.log_likelihood == Approx(log_likelihood(c, r.rho)).margin(1e-9));
}

TEST_CASE("sampled reconstructions recover pure states at realistic shot counts") {
  const Vec2 target = oam_projection_vector(OamProjection::D);
  const Mat2 truth = outer(target);
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull, 6ull, 7ull, 8ull, 9ull, 10ull}) {
    RngStream rng = RngStream::derive(seed, 0);
    const CountRecord c = simulate_counts(truth, 5000, CountingScheme::PoissonPerProjector, rng);
    const MleResult r = mle_reconstruct(c);
    REQUIRE(r.converged);
    REQUIRE(fidelity(r.rho, target) > 0.98);
    REQUIRE(is_density_matrix(r.rho, 1e-9));
  }
}

TEST_CASE("bootstrap error bars are positive, reproducible, and sane") {
  const Mat2 truth = bloch(0.3, 0.1, 0.5);
  const Vec2 target = normalized(Vec2{cplx{0.9, 0.0}, cplx{0.3, 0.2}});
  RngStream rng(13);
  const CountRecord c = simulate_counts(truth, 4000, CountingScheme::PoissonPerProjector, rng);
  const MleResult r = mle_reconstruct(c);
  const double s1 = bootstrap_fidelity_stderr(c, r.rho, target, 60, 321);
  const double s2 = bootstrap_fidelity_stderr(c, r.rho, target, 60, 321);
  REQUIRE(s1 == s2);
  REQUIRE(s1 > 0.0);
  REQUIRE(s1 < 0.05);
  REQUIRE_THROWS_AS(bootstrap_fidelity_stderr(c, r.rho, target, 1, 321), std::invalid_argument);
}

TEST_CASE("full tomography pass on exact and sampled counts") {
  const Vec2 target = oam_projection_vector(OamProjection::R);
  const Mat2 truth = outer(target);

  TomoOptions exact_opt;
  exact_opt.exact = true;
  const TomoRunResult ex = run_tomography(truth, target, exact_opt, 5);
  REQUIRE(ex.fidelity == Approx(1.0).margin(1e-6));
  REQUIRE(ex.fidelity_stderr == 0.0);

  TomoOptions sampled_opt;
  sampled_opt.shots_per_projector = 4000;
  sampled_opt.bootstrap_resamples = 40;
  const TomoRunResult s1 = run_tomography(truth, target, sampled_opt, 77);
  const TomoRunResult s2 = run_tomography(truth, target, sampled_opt, 77);
  REQUIRE(s1.fidelity == s2.fidelity);
  REQUIRE(s1.fidelity_stderr == s2.fidelity_stderr);
  REQUIRE(s1.fidelity > 0.98);
  REQUIRE(s1.fidelity_stderr > 0.0);

  Mat2 not_density = bloch(0.0, 0.0, 0.0);
  not_density(0, 0) = cplx{0.9, 0.0};  // trace != 1
  REQUIRE_THROWS_AS(run_tomography(not_density, target, exact_opt, 5), std::invalid_argument);
  Vec2 unnorm{cplx{2.0, 0.0}, cplx{0.0, 0.0}};
  REQUIRE_THROWS_AS(run_tomography(truth, unnorm, exact_opt, 5), std::invalid_argument);
}
