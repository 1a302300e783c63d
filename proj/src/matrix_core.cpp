#include "mimoee/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mimoee/errors.hpp"

namespace mimoee {

namespace {

double max_abs(const ComplexMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

}  // namespace

bool is_hermitian(const ComplexMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  if (a.size() == 0) return true;
  const double scale = std::max(1.0, max_abs(a));
  const ComplexMatrix diff = a - a.adjoint();
  return diff.cwiseAbs().maxCoeff() <= tol * scale;
}

void require_finite(const ComplexMatrix& a, const char* what) {
  if (!a.allFinite()) {
    throw InvalidInput(std::string(what) + ": matrix has non-finite entries");
  }
}

ComplexMatrix hermitian_part(const ComplexMatrix& a) {
  return 0.5 * (a + a.adjoint());
}

HermitianEvd hermitian_evd(const ComplexMatrix& a) {
  require_finite(a, "hermitian_evd");
  if (!is_hermitian(a)) throw InvalidInput("hermitian_evd: input is not Hermitian");

  const Eigen::Index n = a.rows();
  HermitianEvd out;
  if (n == 0) {
    out.eigenvalues.resize(0);
    out.eigenvectors.resize(0, 0);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(a));
  if (solver.info() != Eigen::Success) {
    throw NonConvergence("hermitian_evd: eigensolver failed", 0.0, 0);
  }
  // Eigen sorts ascending; reorder to descending with a stable sort so that
  // ties keep the solver's relative order.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const RealVector& ev = solver.eigenvalues();
  std::reverse(order.begin(), order.end());
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return ev[i] > ev[j]; });

  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues[k] = ev[order[static_cast<std::size_t>(k)]];
    out.eigenvectors.col(k) = solver.eigenvectors().col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

CompactSvd compact_svd(const ComplexMatrix& a) {
  require_finite(a, "compact_svd");
  CompactSvd out;
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (a.size() == 0 || max_abs(a) == 0.0) {
    out.u.resize(m, 0);
    out.sigma.resize(0);
    out.v.resize(n, 0);
    return out;
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& s = svd.singularValues();
  const double cutoff = kRankTol * s[0];
  Eigen::Index rank = 0;
  while (rank < s.size() && s[rank] > cutoff) ++rank;

  out.rank = static_cast<std::size_t>(rank);
  out.sigma = s.head(rank);
  out.u = svd.matrixU().leftCols(rank);
  out.v = svd.matrixV().leftCols(rank);
  return out;
}

double sigma_max(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues()[0];
}

ComplexMatrix pseudo_inverse(const ComplexMatrix& a) {
  const CompactSvd svd = compact_svd(a);
  if (svd.rank == 0) return ComplexMatrix::Zero(a.cols(), a.rows());
  const RealVector inv_sigma = svd.sigma.cwiseInverse();
  return svd.v * inv_sigma.asDiagonal() * svd.u.adjoint();
}

double solve_water_level(const RealVector& offsets, double total) {
  if (!(total >= 0.0)) throw InvalidInput("solve_water_level: total must be >= 0");
  if (offsets.size() == 0) throw InvalidInput("solve_water_level: no channels");

  const auto filled = [&](double theta) {
    return (offsets.array() + theta).cwiseMax(0.0).sum();
  };
  double lo = -offsets.maxCoeff();
  if (total == 0.0) return lo;
  double hi = total - offsets.minCoeff();
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (filled(mid) < total) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double theta = 0.5 * (lo + hi);

  // Closed form on the active set found by bisection.
  double active_sum = 0.0;
  Eigen::Index active = 0;
  for (Eigen::Index k = 0; k < offsets.size(); ++k) {
    if (offsets[k] + theta > 0.0) {
      active_sum += offsets[k];
      ++active;
    }
  }
  if (active > 0) {
    const double exact = (total - active_sum) / static_cast<double>(active);
    bool consistent = true;
    for (Eigen::Index k = 0; k < offsets.size(); ++k) {
      const bool on = offsets[k] + theta > 0.0;
      if (on && !(offsets[k] + exact > 0.0)) consistent = false;
      if (!on && offsets[k] + exact > 0.0) consistent = false;
    }
    if (consistent) theta = exact;
  }
  return theta;
}

TraceProjection psd_trace_projection_with_shift(const ComplexMatrix& a, double power) {
  if (!(power >= 0.0)) throw InvalidInput("psd_trace_projection: power must be >= 0");
  const HermitianEvd evd = hermitian_evd(a);
  const Eigen::Index n = evd.eigenvalues.size();
  if (n == 0) throw InvalidInput("psd_trace_projection: empty matrix");

  TraceProjection out;
  out.shift = solve_water_level(evd.eigenvalues, power);
  if (power == 0.0) {
    out.matrix = ComplexMatrix::Zero(n, n);
    return out;
  }
  const RealVector levels = (evd.eigenvalues.array() + out.shift).cwiseMax(0.0);
  out.matrix = hermitian_part(evd.eigenvectors * levels.asDiagonal() *
                              evd.eigenvectors.adjoint());
  return out;
}

ComplexMatrix psd_trace_projection(const ComplexMatrix& a, double power) {
  return psd_trace_projection_with_shift(a, power).matrix;
}

RealMatrix realify(const ComplexMatrix& z) {
  RealMatrix r(2 * z.rows(), 2 * z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      const double re = z(i, j).real();
      const double im = z(i, j).imag();
      r(2 * i, 2 * j) = re;
      r(2 * i, 2 * j + 1) = -im;
      r(2 * i + 1, 2 * j) = im;
      r(2 * i + 1, 2 * j + 1) = re;
    }
  }
  return r;
}

ComplexMatrix complexify(const RealMatrix& r, double tol) {
  if (r.rows() % 2 != 0 || r.cols() % 2 != 0) {
    throw InvalidInput("complexify: dimensions must be even");
  }
  const double scale = std::max(1.0, r.size() == 0 ? 0.0 : r.cwiseAbs().maxCoeff());
  ComplexMatrix z(r.rows() / 2, r.cols() / 2);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
      const double a = r(2 * i, 2 * j);
      const double b = r(2 * i + 1, 2 * j);
      if (std::abs(r(2 * i + 1, 2 * j + 1) - a) > tol * scale ||
          std::abs(r(2 * i, 2 * j + 1) + b) > tol * scale) {
        throw InvalidInput("complexify: block is not of the form [[a,-b],[b,a]]");
      }
      z(i, j) = Complex(a, b);
    }
  }
  return z;
}

bool is_irreducible(const RealMatrix& a) {
  const Eigen::Index n = a.rows();
  if (n == 0) return false;
  if (n == 1) return a(0, 0) != 0.0;
  const auto all_reached = [&](bool transpose) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<Eigen::Index> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const Eigen::Index i = stack.back();
      stack.pop_back();
      for (Eigen::Index j = 0; j < n; ++j) {
        const double e = transpose ? a(j, i) : a(i, j);
        if (e != 0.0 && !seen[static_cast<std::size_t>(j)]) {
          seen[static_cast<std::size_t>(j)] = 1;
          stack.push_back(j);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  };
  return all_reached(false) && all_reached(true);
}

namespace {

// Power iteration on A + I: same Perron vector as A, and primitive whenever A
// is irreducible, which removes the oscillation of periodic matrices.
RealVector perron_iteration(const RealMatrix& a, std::size_t& iterations) {
  constexpr std::size_t kMaxIters = 200000;
  const Eigen::Index n = a.rows();
  RealVector x = RealVector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  for (iterations = 1; iterations <= kMaxIters; ++iterations) {
    RealVector y = a * x + x;
    y /= y.norm();
    const double change = (y - x).lpNorm<Eigen::Infinity>();
    x = y;
    if (change <= 1e-15) break;
  }
  return x;
}

// Spectral radius of a reducible matrix: the largest one over the diagonal
// blocks of its strongly connected components.
double reducible_spectral_radius(const RealMatrix& a) {
  const Eigen::Index n = a.rows();
  std::vector<std::vector<char>> reach(static_cast<std::size_t>(n),
                                       std::vector<char>(static_cast<std::size_t>(n), 0));
  for (Eigen::Index i = 0; i < n; ++i) {
    reach[i][i] = 1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (a(i, j) != 0.0) reach[i][j] = 1;
    }
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!reach[i][k]) continue;
      for (Eigen::Index j = 0; j < n; ++j) reach[i][j] = reach[i][j] || reach[k][j];
    }
  }
  std::vector<char> done(static_cast<std::size_t>(n), 0);
  double best = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (done[i]) continue;
    std::vector<Eigen::Index> comp;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (reach[i][j] && reach[j][i]) {
        comp.push_back(j);
        done[j] = 1;
      }
    }
    const auto m = static_cast<Eigen::Index>(comp.size());
    RealMatrix block(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index c = 0; c < m; ++c) block(r, c) = a(comp[r], comp[c]);
    }
    if (m == 1) {
      best = std::max(best, block(0, 0));
    } else {
      std::size_t iters = 0;
      const RealVector x = perron_iteration(block, iters);
      best = std::max(best, x.dot(block * x));
    }
  }
  return best;
}

}  // namespace

PerronResult spectral_radius(const RealMatrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw InvalidInput("spectral_radius: matrix must be square and non-empty");
  }
  if (!a.allFinite()) throw InvalidInput("spectral_radius: non-finite entries");
  if (a.minCoeff() < 0.0) throw InvalidInput("spectral_radius: negative entries");

  PerronResult out;
  const bool irreducible = is_irreducible(a);
  const RealVector x = perron_iteration(a, out.iterations);
  out.vector = x;
  out.spectral_radius =
      irreducible ? std::max(0.0, x.dot(a * x)) : reducible_spectral_radius(a);
  const double residual = (a * x - out.spectral_radius * x).norm();
  out.converged = residual <= 1e-9 * std::max(1.0, out.spectral_radius);
  out.degenerate = !irreducible || x.minCoeff() <= kPerronFloor;
  return out;
}

RealVector floored_weights(const RealVector& w) {
  return w.cwiseMax(kPerronFloor);
}

double max_symmetric_eigenvalue(const RealMatrix& a) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(0.5 * (a + a.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

}  // namespace mimoee
