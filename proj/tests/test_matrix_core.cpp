#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mimoee/errors.hpp"
#include "mimoee/matrix_core.hpp"
#include "mimoee/random.hpp"

using namespace mimoee;

namespace {

const Complex I1(0.0, 1.0);

// Water level by enumerating the active set: with offsets sorted descending,
// the first k entries are active for the k whose closed form is consistent.
double water_level_by_enumeration(std::vector<double> offsets, double total) {
  std::sort(offsets.begin(), offsets.end(), std::greater<>());
  double sum = 0.0;
  for (std::size_t k = 1; k <= offsets.size(); ++k) {
    sum += offsets[k - 1];
    const double theta = (total - sum) / static_cast<double>(k);
    const bool active_ok = offsets[k - 1] + theta >= 0.0;
    const bool rest_ok = k == offsets.size() || offsets[k] + theta <= 0.0;
    if (active_ok && rest_ok) return theta;
  }
  return std::nan("");
}

}  // namespace

TEST_CASE("hermitian_evd reconstructs and sorts descending") {
  Rng rng = make_rng(1, {});
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix a = random_hermitian(rng, 5);
    const HermitianEvd evd = hermitian_evd(a);
    for (Eigen::Index k = 1; k < 5; ++k) CHECK(evd.eigenvalues[k - 1] >= evd.eigenvalues[k]);
    const ComplexMatrix back =
        evd.eigenvectors * evd.eigenvalues.cast<Complex>().asDiagonal() * evd.eigenvectors.adjoint();
    CHECK((back - a).norm() < 1e-12 * std::max(1.0, a.norm()));
    CHECK((evd.eigenvectors.adjoint() * evd.eigenvectors - ComplexMatrix::Identity(5, 5)).norm() <
          1e-12);
  }
}

TEST_CASE("hermitian_evd rejects non-Hermitian input") {
  ComplexMatrix a(2, 2);
  a << 1.0, 2.0, 0.0, 1.0;
  CHECK_THROWS_AS(hermitian_evd(a), InvalidInput);
}

TEST_CASE("compact_svd drops null directions") {
  Rng rng = make_rng(2, {});
  const ComplexMatrix a = complex_gaussian(rng, 4, 2, 1.0) * complex_gaussian(rng, 2, 5, 1.0);
  const CompactSvd svd = compact_svd(a);
  CHECK(svd.rank == 2);
  CHECK(svd.u.cols() == 2);
  CHECK(svd.v.rows() == 5);
  const ComplexMatrix back = svd.u * svd.sigma.cast<Complex>().asDiagonal() * svd.v.adjoint();
  CHECK((back - a).norm() < 1e-12 * a.norm());

  const CompactSvd zero = compact_svd(ComplexMatrix::Zero(3, 4));
  CHECK(zero.rank == 0);
  CHECK(zero.u.rows() == 3);
  CHECK(zero.u.cols() == 0);
  CHECK(zero.v.rows() == 4);
  CHECK(sigma_max(ComplexMatrix::Zero(3, 4)) == 0.0);
}

TEST_CASE("pseudo_inverse satisfies the Moore-Penrose conditions") {
  Rng rng = make_rng(3, {});
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix a = complex_gaussian(rng, 2, 4, 1.0);
    const ComplexMatrix x = pseudo_inverse(a);
    CHECK((a * x * a - a).norm() < 1e-12);
    CHECK((x * a * x - x).norm() < 1e-12);
    CHECK(((a * x).adjoint() - a * x).norm() < 1e-12);
    CHECK(((x * a).adjoint() - x * a).norm() < 1e-12);
  }
}

TEST_CASE("solve_water_level on hand-computed cases") {
  RealVector offsets(2);
  offsets << -1.0, -0.5;
  CHECK(solve_water_level(offsets, 1.0) == doctest::Approx(1.25).epsilon(1e-14));
  CHECK(solve_water_level(offsets, 0.2) == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(solve_water_level(offsets, 0.0) == doctest::Approx(0.5));
}

TEST_CASE("solve_water_level matches active-set enumeration") {
  Rng rng = make_rng(4, {});
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + trial % 6);
    RealVector offsets(n);
    std::vector<double> copy;
    for (Eigen::Index k = 0; k < n; ++k) {
      offsets[k] = -5.0 * uniform01(rng);
      copy.push_back(offsets[k]);
    }
    const double total = 10.0 * uniform01(rng);
    const double theta = solve_water_level(offsets, total);
    CHECK(theta == doctest::Approx(water_level_by_enumeration(copy, total)).epsilon(1e-10));
    CHECK((offsets.array() + theta).max(0.0).sum() == doctest::Approx(total).epsilon(1e-12));
  }
}

TEST_CASE("psd_trace_projection on a diagonal matrix") {
  ComplexMatrix a = ComplexMatrix::Zero(2, 2);
  a(0, 0) = 3.0;
  a(1, 1) = 1.0;
  const ComplexMatrix p = psd_trace_projection(a, 2.0);
  CHECK(p(0, 0).real() == doctest::Approx(2.0));
  CHECK(std::abs(p(1, 1)) < 1e-12);
  CHECK(psd_trace_projection(a, 0.0).norm() == 0.0);
  CHECK_THROWS_AS(psd_trace_projection(a, -1.0), InvalidInput);
}

TEST_CASE("psd_trace_projection satisfies the projection inequality") {
  // For the projection P of A onto a convex set C: Re<A - P, X - P> <= 0 for all X in C.
  Rng rng = make_rng(5, {});
  for (int trial = 0; trial < 50; ++trial) {
    const ComplexMatrix a = random_hermitian(rng, 4) * 3.0;
    const double power = 4.0 * uniform01(rng);
    const ComplexMatrix p = psd_trace_projection(a, power);
    CHECK(std::abs(p.trace().real() - power) < 1e-10);
    CHECK(hermitian_evd(p).eigenvalues.minCoeff() > -1e-12);
    for (int k = 0; k < 20; ++k) {
      const ComplexMatrix x = random_psd_with_trace(rng, 4, power);
      CHECK(((a - p).adjoint() * (x - p)).trace().real() <= 1e-10);
    }
  }
}

TEST_CASE("realify is a ring homomorphism and complexify inverts it") {
  Rng rng = make_rng(6, {});
  for (int trial = 0; trial < 50; ++trial) {
    const ComplexMatrix a = complex_gaussian(rng, 3, 4, 1.0);
    const ComplexMatrix b = complex_gaussian(rng, 4, 2, 1.0);
    CHECK((realify(a * b) - realify(a) * realify(b)).norm() < 1e-12);
    CHECK((realify(a.adjoint()) - realify(a).transpose()).norm() < 1e-15);
    CHECK((complexify(realify(a)) - a).norm() == 0.0);
  }
  ComplexMatrix one(1, 1);
  one(0, 0) = Complex(2.0, 3.0);
  RealMatrix expect(2, 2);
  expect << 2.0, -3.0, 3.0, 2.0;
  CHECK((realify(one) - expect).norm() == 0.0);
}

TEST_CASE("complexify rejects malformed input") {
  CHECK_THROWS_AS(complexify(RealMatrix::Zero(3, 2)), InvalidInput);
  RealMatrix bad(2, 2);
  bad << 1.0, 2.0, 3.0, 4.0;
  CHECK_THROWS_AS(complexify(bad), InvalidInput);
}

TEST_CASE("spectral_radius against a general eigensolver") {
  Rng rng = make_rng(7, {});
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 2 + trial % 7;
    RealMatrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = i == j ? 0.0 : 3.0 * uniform01(rng);
    }
    Eigen::EigenSolver<RealMatrix> es(a, false);
    const double oracle = es.eigenvalues().cwiseAbs().maxCoeff();
    const PerronResult pr = spectral_radius(a);
    CHECK(pr.converged);
    CHECK_FALSE(pr.degenerate);
    CHECK(pr.spectral_radius == doctest::Approx(oracle).epsilon(1e-9));
    CHECK((a * pr.vector - pr.spectral_radius * pr.vector).norm() < 1e-8 * oracle);
    CHECK(pr.vector.minCoeff() > 0.0);
  }
}

TEST_CASE("spectral_radius of a periodic matrix") {
  RealMatrix a(2, 2);
  a << 0.0, 1.0, 4.0, 0.0;
  const PerronResult pr = spectral_radius(a);
  CHECK(pr.spectral_radius == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(pr.vector[1] == doctest::Approx(2.0 * pr.vector[0]).epsilon(1e-9));
}

TEST_CASE("spectral_radius flags reducible matrices") {
  RealMatrix a = RealMatrix::Zero(3, 3);
  a(0, 1) = 0.5;
  CHECK_FALSE(is_irreducible(a));
  const PerronResult pr = spectral_radius(a);
  CHECK(pr.degenerate);
  CHECK(pr.spectral_radius == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(spectral_radius(RealMatrix::Zero(4, 4)).spectral_radius == 0.0);

  RealMatrix neg = RealMatrix::Ones(2, 2);
  neg(0, 1) = -1.0;
  CHECK_THROWS_AS(spectral_radius(neg), InvalidInput);
  CHECK_THROWS_AS(spectral_radius(RealMatrix::Ones(2, 3)), InvalidInput);
}

TEST_CASE("floored_weights keeps weights positive") {
  RealVector w(3);
  w << 0.5, 0.0, 1e-20;
  const RealVector f = floored_weights(w);
  CHECK(f.minCoeff() >= kPerronFloor);
  CHECK(f[0] == 0.5);
}
