#pragma once

#include "speclab/basis.hpp"
#include "speclab/kernel.hpp"

#include <memory>

namespace speclab {

/// Kernel PCA on the uncentered kernel matrix K_n = [k(X_i, X_j)/n].
///
/// Feature-space centering is deliberately not applied: the data mapped into
/// the feature space is assumed centered. Eigenvectors are scaled to
/// |v_k|_2 = sqrt(n) and extended by f(x) = 1/(lambda n) sum_i k(x, X_i) v_i,
/// so that f(X_i) = v_i and |f|_{L2(P_n)} = 1.
class KpcaSystem : public FunctionBasis {
 public:
  KpcaSystem(std::shared_ptr<const SampleSet> samples, KernelSpec kernel, KernelMatrix kn,
             Vector eigvals, Matrix eigvecs);

  const KernelMatrix& kernel_matrix() const { return kn_; }
  const Vector& eigvals() const { return eigvals_; }  // top min(K+1, n)
  const Matrix& eigvecs() const { return eigvecs_; }
  Eigen::Index K() const { return eigvecs_.cols(); }
  double eigengap() const;
  const SampleSet& samples() const { return *samples_; }

  Eigen::Index size() const override { return K(); }
  Matrix evaluate(const PointMatrix& points) const override;

  /// max_{i,k} |f_k(X_i) - v_{ik}|
  double restriction_residual() const;
  /// max_k | |f_k|_{L2(P_n)} - 1 |
  double norm_residual() const;
  /// max over probe points and k of |(Sigma_n f_k)(x) - lambda_k f_k(x)| with
  /// (Sigma_n f)(x) = 1/n sum_i f(X_i) k(x, X_i).
  double covariance_residual(const PointMatrix& probe) const;

 private:
  std::shared_ptr<const SampleSet> samples_;
  KernelSpec kernel_;
  KernelMatrix kn_;
  Vector eigvals_;
  Matrix eigvecs_;
  Matrix scaled_;  // v_ik / (lambda_k n)
};

/// Eigenvalues below this mean K exceeds the numerical rank of K_n.
inline constexpr double kKpcaRankFloor = 1e-10;

KpcaSystem kpca_fit(std::shared_ptr<const SampleSet> samples, const KernelSpec& kernel,
                    Eigen::Index K);

/// f_k(x) for component `index` (0-based).
double kpca_extend(const KpcaSystem& sys, Eigen::Index index, Point x);

/// Eigenvalues (descending) of (1/n) sum_i x_i x_i^T, the feature-space
/// covariance of the linear kernel.
Vector second_moment_spectrum(const SampleSet& samples);

}  // namespace speclab
