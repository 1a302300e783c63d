#include "mimoee/random.hpp"

#include <cmath>
#include <numbers>

namespace mimoee {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> counters) {
  std::uint64_t h = mix64(seed);
  for (const std::uint64_t c : counters) h = mix64(h ^ mix64(c + 0x632be59bd9b4e019ULL));
  return h;
}

Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> counters) {
  return Rng(derive_seed(seed, counters));
}

double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(Rng& rng) {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

ComplexMatrix complex_gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                               double variance) {
  const double s = std::sqrt(variance / 2.0);
  ComplexMatrix z(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double re = standard_normal(rng);
      const double im = standard_normal(rng);
      z(i, j) = Complex(s * re, s * im);
    }
  }
  return z;
}

ComplexMatrix haar_unitary(Rng& rng, Eigen::Index n) {
  const ComplexMatrix g = complex_gaussian(rng, n, n, 1.0);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double mag = std::abs(r(k, k));
    if (mag > 0.0) q.col(k) *= r(k, k) / mag;
  }
  return q;
}

RealVector simplex_point(Rng& rng, Eigen::Index n, double total) {
  RealVector e(n);
  for (Eigen::Index k = 0; k < n; ++k) e[k] = -std::log(1.0 - uniform01(rng));
  const double s = e.sum();
  return s > 0.0 ? RealVector(e * (total / s)) : RealVector::Constant(n, total / static_cast<double>(n));
}

ComplexMatrix random_psd_with_trace(Rng& rng, Eigen::Index n, double trace) {
  const ComplexMatrix a = complex_gaussian(rng, n, n, 1.0);
  ComplexMatrix x = a * a.adjoint();
  const double t = x.trace().real();
  x *= trace / t;
  return hermitian_part(x);
}

ComplexMatrix random_hermitian(Rng& rng, Eigen::Index n) {
  return hermitian_part(complex_gaussian(rng, n, n, 1.0));
}

}  // namespace mimoee
