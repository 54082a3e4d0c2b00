#pragma once

#include <cstdint>
#include <random>

#include "qmf/algebra.hpp"

namespace qmf {

using Rng = std::mt19937_64;

/// Random Hermitian n x n matrix with entries of order one.
Matrix random_hermitian(Rng& rng, int n);

/// Random complex n x n matrix with standard normal real and imaginary parts.
Matrix random_complex(Rng& rng, int n);

/// d x d amplitude matrix whose squared moduli form a bi-stochastic matrix.
/// Moduli come from Sinkhorn balancing of a random positive matrix; phases are uniform.
Matrix random_bistochastic_amplitudes(Rng& rng, int d);

/// Amplitudes of modulus exactly 1/sqrt(d) with uniform random phases.
Matrix random_uniform_modulus_amplitudes(Rng& rng, int d);

/// Sinkhorn balancing of a strictly positive matrix to a bi-stochastic one.
Eigen::MatrixXd sinkhorn(Eigen::MatrixXd m, double tol = 1e-15, int max_iter = 100000);

}  // namespace qmf
