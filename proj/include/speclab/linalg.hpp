#pragma once

#include "speclab/common.hpp"

namespace speclab::linalg {

/// Eigenpairs of a real symmetric matrix, eigenvalues descending.
struct SymmetricEigen {
  Vector values;   // descending
  Matrix vectors;  // unit 2-norm columns, one per value (may be fewer columns)
};

/// Leading eigenpairs of a symmetric matrix through LAPACK dsyevr
/// (Householder tridiagonalization + MRRR). `value_count` eigenvalues are
/// returned, with eigenvectors for the first `vector_count` of them.
/// Passing value_count = n gives the full spectrum.
SymmetricEigen symmetric_top(const Matrix& a, Eigen::Index value_count,
                             Eigen::Index vector_count);

/// Full spectrum with all eigenvectors.
SymmetricEigen symmetric_full(const Matrix& a);

/// Flips each column so its entry of largest magnitude is positive.
/// Entries within `rel_tie` of the maximum count as ties; the lowest index wins.
void apply_sign_convention(Matrix& columns, double rel_tie = 1e-8);

/// max row 2-norm
double norm_2inf(const Matrix& a);
double spectral_norm(const Matrix& a);
double min_singular_value(const Matrix& a);

/// Symmetric positive-definite inverse square root via eigendecomposition.
Matrix inverse_sqrt_spd(const Matrix& a);

/// Haar-distributed orthogonal matrix (QR of a gaussian matrix with sign fix).
Matrix random_orthogonal(Eigen::Index dim, SplitMix64& rng);

/// Symmetric matrix with iid gaussian upper triangle.
Matrix random_symmetric(Eigen::Index dim, SplitMix64& rng);

Matrix random_gaussian(Eigen::Index rows, Eigen::Index cols, SplitMix64& rng);

}  // namespace speclab::linalg
