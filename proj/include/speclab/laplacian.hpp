#pragma once

#include "speclab/basis.hpp"
#include "speclab/kernel.hpp"

#include <filesystem>
#include <memory>
#include <vector>

namespace speclab {

/// L_n = D_n^{-1/2} K_n D_n^{-1/2} with d_n = K_n 1_n.
struct LaplacianMatrix {
  Matrix L;
  Vector degrees;  // d_n(X_i)
  Eigen::Index n() const { return L.rows(); }
};

LaplacianMatrix normalized_laplacian(const KernelMatrix& kn);

/// Leading eigenpairs with columns scaled so n^{-1/2} |v_k|_2 = 1 and the
/// largest-magnitude entry positive.
struct EigenSystem {
  Vector eigvals;  // top min(K+1, n), descending
  Matrix eigvecs;  // n x K
  /// lambda_K - lambda_{K+1}; NaN when K == n.
  double eigengap = 0.0;

  Eigen::Index n() const { return eigvecs.rows(); }
  Eigen::Index K() const { return eigvecs.cols(); }
};

/// Top-K eigensystem of a symmetric matrix under the sqrt(n) normalization.
EigenSystem eigensystem(const Matrix& symmetric, Eigen::Index K);
inline EigenSystem eigensystem(const LaplacianMatrix& lap, Eigen::Index K) {
  return eigensystem(lap.L, K);
}

/// Shared sample context of the extensions.
struct NystromContext {
  std::shared_ptr<const SampleSet> samples;
  KernelSpec kernel;
  Vector degrees;
};

/// Eigenvalues below this are treated as zero; the extension divides by them.
inline constexpr double kExtensionEigenFloor = 1e-10;

/// f(x) = 1/(lambda n) sum_i k(x, X_i) / sqrt(d_n(x) d_n(X_i)) v_i
class ExtendedEigenfunction {
 public:
  ExtendedEigenfunction(std::shared_ptr<const NystromContext> ctx, double eigenvalue, Vector v);

  double eigenvalue() const { return eigenvalue_; }
  const Vector& coefficients() const { return v_; }
  double operator()(Point x) const;
  Vector evaluate(const PointMatrix& points) const;

  /// max_i |f(X_i) - v_i|, computed at construction.
  double restriction_residual() const { return restriction_residual_; }
  /// |f|_{L2(P_n)}.
  double empirical_norm() const { return empirical_norm_; }
  /// max over a probe grid of |(T_n f)(x) - lambda f(x)|.
  double probe_residual() const { return probe_residual_; }

 private:
  friend ExtendedEigenfunction nystrom_extend(const EigenSystem&, Eigen::Index,
                                              std::shared_ptr<const SampleSet>,
                                              const KernelSpec&, const DegreeVector&);
  std::shared_ptr<const NystromContext> ctx_;
  double eigenvalue_;
  Vector v_;
  Vector scaled_;  // v_i / sqrt(d_i) / (lambda n)
  double restriction_residual_ = 0.0;
  double empirical_norm_ = 0.0;
  double probe_residual_ = 0.0;
};

/// Probe tolerance for |T_n f - lambda f|.
inline constexpr double kProbeTolerance = 1e-8;

/// Extends eigenvector `index` (0-based) of `es` to the whole domain and
/// checks the eigenfunction property on a probe grid.
ExtendedEigenfunction nystrom_extend(const EigenSystem& es, Eigen::Index index,
                                     std::shared_ptr<const SampleSet> samples,
                                     const KernelSpec& kernel, const DegreeVector& degrees);

/// Psi_n(x) = (f_1(x), ..., f_K(x)).
class SampleEmbedding : public FunctionBasis {
 public:
  explicit SampleEmbedding(std::vector<ExtendedEigenfunction> extensions);
  Eigen::Index size() const override { return static_cast<Eigen::Index>(ext_.size()); }
  Matrix evaluate(const PointMatrix& points) const override;
  const ExtendedEigenfunction& operator[](std::size_t k) const { return ext_[k]; }

 private:
  std::vector<ExtendedEigenfunction> ext_;
};

Vector sample_embedding(const SampleEmbedding& embedding, Point x);

/// Full pipeline: kernel matrix, Laplacian, eigensystem, extensions.
struct LaplacianFit {
  LaplacianMatrix laplacian;
  EigenSystem eigensystem;
  SampleEmbedding embedding;
};

LaplacianFit fit_laplacian_embedding(std::shared_ptr<const SampleSet> samples,
                                     const KernelSpec& kernel, Eigen::Index K);

/// CSV: x0..x{p-1}, psi1..psiK at each row of `points`.
void write_embedding_csv(const std::filesystem::path& path, const PointMatrix& points,
                         const Matrix& values);

}  // namespace speclab
