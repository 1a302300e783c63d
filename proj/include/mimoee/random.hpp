#pragma once

// Seeded random generation. Every stream is derived from a master seed and a
// tuple of counters, so any (player, player, trial, sample) element can be
// regenerated independently of iteration order or thread count.

#include <cstdint>
#include <initializer_list>
#include <random>

#include "mimoee/matrix_core.hpp"

namespace mimoee {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Deterministic combination of a master seed with stream counters.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> counters);

Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> counters);

/// Uniform double in [0, 1) taken from the top 53 bits of one draw.
double uniform01(Rng& rng);

/// Standard normal via Box-Muller; identical across standard libraries.
double standard_normal(Rng& rng);

/// i.i.d. circularly-symmetric complex Gaussian entries with E|z|^2 = variance.
ComplexMatrix complex_gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                               double variance);

/// Haar-distributed unitary (QR of a complex Gaussian with phase correction).
ComplexMatrix haar_unitary(Rng& rng, Eigen::Index n);

/// Uniform point of the probability simplex scaled to `total`.
RealVector simplex_point(Rng& rng, Eigen::Index n, double total);

/// A A^H with Gaussian A, rescaled to trace `trace`.
ComplexMatrix random_psd_with_trace(Rng& rng, Eigen::Index n, double trace);

/// Random Hermitian matrix with Gaussian entries (GUE-like, unit scale).
ComplexMatrix random_hermitian(Rng& rng, Eigen::Index n);

}  // namespace mimoee
