#include "speclab/linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace speclab::linalg {

SymmetricEigen symmetric_top(const Matrix& a, Eigen::Index value_count, Eigen::Index vector_count) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || n == 0) throw ConfigError("symmetric_top: need a non-empty square matrix");
  if (value_count < 1 || value_count > n || vector_count < 0 || vector_count > value_count) {
    throw ConfigError("symmetric_top: invalid eigenpair counts");
  }

  Matrix work = a;  // dsyevr destroys its input
  const lapack_int nn = static_cast<lapack_int>(n);
  // LAPACK indexes eigenvalues ascending, 1-based: the top value_count are il..n.
  const lapack_int il = static_cast<lapack_int>(n - value_count + 1);
  const lapack_int iu = nn;
  lapack_int found = 0;
  std::vector<double> w(static_cast<std::size_t>(n));
  Matrix z(n, vector_count > 0 ? value_count : 1);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  const char jobz = vector_count > 0 ? 'V' : 'N';
  const char range = value_count == n ? 'A' : 'I';

  const lapack_int info =
      LAPACKE_dsyevr(LAPACK_COL_MAJOR, jobz, range, 'U', nn, work.data(), nn, 0.0, 0.0, il, iu,
                     0.0, &found, w.data(), z.data(), nn, support.data());
  if (info != 0 || found != value_count) {
    throw NumericalError("dsyevr failed (info=" + std::to_string(info) + ")");
  }

  SymmetricEigen out;
  out.values.resize(value_count);
  for (Eigen::Index k = 0; k < value_count; ++k) out.values(k) = w[value_count - 1 - k];
  out.vectors.resize(n, vector_count);
  for (Eigen::Index k = 0; k < vector_count; ++k) out.vectors.col(k) = z.col(value_count - 1 - k);
  return out;
}

SymmetricEigen symmetric_full(const Matrix& a) {
  return symmetric_top(a, a.rows(), a.rows());
}

void apply_sign_convention(Matrix& columns, double rel_tie) {
  for (Eigen::Index k = 0; k < columns.cols(); ++k) {
    auto col = columns.col(k);
    const double peak = col.cwiseAbs().maxCoeff();
    if (peak == 0.0) continue;
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col(i)) >= peak * (1.0 - rel_tie)) {
        if (col(i) < 0.0) col = -col;
        break;
      }
    }
  }
}

double norm_2inf(const Matrix& a) {
  if (a.rows() == 0) return 0.0;
  return a.rowwise().norm().maxCoeff();
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

double min_singular_value(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(a);
  const auto& s = svd.singularValues();
  return s(s.size() - 1);
}

Matrix inverse_sqrt_spd(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) throw NumericalError("inverse_sqrt_spd: eigensolver failed");
  const Vector& ev = es.eigenvalues();
  if (ev.minCoeff() <= 0.0) throw NumericalError("inverse_sqrt_spd: matrix is not positive definite");
  return es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

Matrix random_gaussian(Eigen::Index rows, Eigen::Index cols, SplitMix64& rng) {
  Matrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = rng.normal();
  return g;
}

Matrix random_orthogonal(Eigen::Index dim, SplitMix64& rng) {
  const Matrix g = random_gaussian(dim, dim, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < dim; ++k) {
    if (r(k, k) < 0.0) q.col(k) = -q.col(k);
  }
  return q;
}

Matrix random_symmetric(Eigen::Index dim, SplitMix64& rng) {
  Matrix s(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      s(i, j) = rng.normal();
      s(j, i) = s(i, j);
    }
  }
  return s;
}

}  // namespace speclab::linalg
