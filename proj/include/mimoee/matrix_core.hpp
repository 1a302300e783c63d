#pragma once

// Dense complex matrix primitives shared by the game model, the best-response
// solver and the equilibrium analysis. Sizes are small (a few antennas per
// player, a few players), so everything is dynamic-size Eigen.

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace mimoee {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Relative tolerance used to decide whether a matrix is Hermitian.
inline constexpr double kHermitianTol = 1e-10;
/// Singular values below kRankTol * sigma_max are treated as zero.
inline constexpr double kRankTol = 1e-10;
/// Floor applied to Perron weights when they are used inside a weighted norm.
inline constexpr double kPerronFloor = 1e-12;

/// True when max |A - A^H| <= tol * max(1, max |A|).
bool is_hermitian(const ComplexMatrix& a, double tol = kHermitianTol);

/// Throws InvalidInput if the matrix holds NaN or Inf entries.
void require_finite(const ComplexMatrix& a, const char* what);

/// (A + A^H) / 2.
ComplexMatrix hermitian_part(const ComplexMatrix& a);

struct HermitianEvd {
  RealVector eigenvalues;      ///< sorted descending
  ComplexMatrix eigenvectors;  ///< unitary, column k pairs with eigenvalues[k]
};

/// Eigendecomposition of a Hermitian matrix, eigenvalues in descending order.
/// Throws InvalidInput if `a` is not Hermitian within kHermitianTol.
HermitianEvd hermitian_evd(const ComplexMatrix& a);

struct CompactSvd {
  ComplexMatrix u;  ///< rows x rank, orthonormal columns
  RealVector sigma; ///< rank strictly positive values, descending
  ComplexMatrix v;  ///< cols x rank, orthonormal columns
  std::size_t rank = 0;
};

/// Compact SVD A = U diag(sigma) V^H. Singular values below
/// kRankTol * sigma_max are dropped; the zero matrix yields rank 0 with
/// empty (k x 0) factors.
CompactSvd compact_svd(const ComplexMatrix& a);

/// Largest singular value (0 for an empty or zero matrix).
double sigma_max(const ComplexMatrix& a);

/// Moore-Penrose inverse V1 diag(1/sigma) U1^H.
ComplexMatrix pseudo_inverse(const ComplexMatrix& a);

/// Shift theta with sum_k (offsets[k] + theta)^+ == total, for total >= 0.
/// Bisection over the bracket [-max offsets, total - min offsets] down to
/// 1e-12 absolute, then the closed form on the resulting active set.
double solve_water_level(const RealVector& offsets, double total);

/// Frobenius-nearest point of {X >= 0, Tr X = power} to the Hermitian matrix
/// `a`: U (theta I + diag(lambda))^+ U^H with the unique theta giving trace
/// `power`. Throws InvalidInput for power < 0 or non-Hermitian input.
ComplexMatrix psd_trace_projection(const ComplexMatrix& a, double power);

/// Same projection, also returning the shift theta.
struct TraceProjection {
  ComplexMatrix matrix;
  double shift = 0.0;
};
TraceProjection psd_trace_projection_with_shift(const ComplexMatrix& a, double power);

/// M x N complex -> 2M x 2N real, entry a+jb becomes [[a,-b],[b,a]]
/// (unit scaling, so the map is a ring homomorphism).
RealMatrix realify(const ComplexMatrix& z);

/// Inverse of realify. Throws InvalidInput when the dimensions are odd or a
/// 2x2 block is not of the form [[a,-b],[b,a]] within `tol`.
ComplexMatrix complexify(const RealMatrix& r, double tol = 1e-12);

struct PerronResult {
  double spectral_radius = 0.0;
  RealVector vector;        ///< right Perron vector, ||w||_2 = 1, entries >= 0
  bool degenerate = false;  ///< reducible matrix or (near-)zero Perron entries
  bool converged = false;
  std::size_t iterations = 0;
};

/// Spectral radius and right Perron eigenvector of an entrywise nonnegative
/// square matrix, by power iteration on A + I from the all-ones vector.
/// For reducible input the radius comes from the strongly connected blocks
/// and the returned vector is only indicative (degenerate is set).
/// Throws InvalidInput for negative entries or non-square input.
PerronResult spectral_radius(const RealMatrix& a);

/// True when the directed graph of the nonzero pattern is strongly connected.
bool is_irreducible(const RealMatrix& a);

/// Perron weights with every entry floored at kPerronFloor.
RealVector floored_weights(const RealVector& w);

/// Largest eigenvalue of a real symmetric matrix.
double max_symmetric_eigenvalue(const RealMatrix& a);

}  // namespace mimoee
