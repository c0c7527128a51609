#pragma once

#include "speclab/common.hpp"

#include <memory>
#include <string_view>
#include <vector>

namespace speclab {

enum class KernelFamily { Gaussian, Constant, Linear, Table };

std::string_view to_string(KernelFamily family);
KernelFamily kernel_family_from_string(std::string_view name);

/// Construction parameters for make_kernel.
struct KernelParams {
  KernelFamily family = KernelFamily::Gaussian;
  /// gaussian: k(x,y) = offset + exp(-|x-y|^2 / bandwidth)
  double bandwidth = 1.0;
  double offset = 0.1;
  /// constant: k(x,y) = value
  double value = 1.0;
  /// table: radial profile k(x,y) = phi(|x-y|), phi piecewise linear through
  /// (table_distances[i], table_values[i]); distances strictly increasing from 0.
  std::vector<double> table_distances;
  std::vector<double> table_values;
  DomainBox domain = DomainBox::unit(1);
  /// Reject kernels whose certified lower bound is not strictly positive.
  bool require_positive_lower_bound = true;
  /// Grid resolution used to certify the bounds of non-constant kernels.
  int bound_grid_points = 10000;
};

/// A bounded symmetric kernel with certified bounds kappa_l <= k <= kappa_u on
/// its domain. Immutable after construction.
class KernelSpec {
 public:
  KernelFamily family() const { return params_.family; }
  const KernelParams& params() const { return params_; }
  const DomainBox& domain() const { return params_.domain; }
  double kappa_l() const { return kappa_l_; }
  double kappa_u() const { return kappa_u_; }

  /// The normalized-Laplacian pipeline needs kappa_l > 0; the linear kernel
  /// is only accepted by kernel PCA.
  bool laplacian_admissible() const {
    return params_.family != KernelFamily::Linear && kappa_l_ > 0.0;
  }
  void require_laplacian_admissible() const;

  double operator()(Point x, Point y) const;

  /// Cross matrix C(i,j) = k(A_i, B_j).
  Matrix cross(const PointMatrix& a, const PointMatrix& b) const;
  /// k(x, B_j) for all rows of b.
  Vector row(Point x, const PointMatrix& b) const;

 private:
  friend KernelSpec make_kernel(const KernelParams& params);
  explicit KernelSpec(KernelParams params) : params_(std::move(params)) {}
  double radial(double dist_sq) const;

  KernelParams params_;
  double kappa_l_ = 0.0;
  double kappa_u_ = 0.0;
};

/// Validates params, certifies kappa bounds and returns the kernel.
KernelSpec make_kernel(const KernelParams& params);

/// n iid samples in a box, one per row.
struct SampleSet {
  PointMatrix points;
  std::uint64_t seed = 0;

  Eigen::Index n() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }
  Point operator[](Eigen::Index i) const { return row_of(points, i); }
};

/// Entry (i, j) = k(X_i, X_j) / n, exactly symmetric.
struct KernelMatrix {
  Matrix entries;
  Eigen::Index n() const { return entries.rows(); }
};

KernelMatrix kernel_matrix(const SampleSet& samples, const KernelSpec& kernel);

/// Sample degree function d_n(x) = (1/n) sum_j k(x, X_j), tabulated at the
/// samples and callable anywhere in the domain.
class DegreeVector {
 public:
  DegreeVector(std::shared_ptr<const SampleSet> samples, KernelSpec kernel, Vector values)
      : samples_(std::move(samples)), kernel_(std::move(kernel)), values_(std::move(values)) {}

  const Vector& values() const { return values_; }
  double operator()(Point x) const;
  const KernelSpec& kernel() const { return kernel_; }
  const SampleSet& samples() const { return *samples_; }

 private:
  std::shared_ptr<const SampleSet> samples_;
  KernelSpec kernel_;
  Vector values_;
};

DegreeVector degree(std::shared_ptr<const SampleSet> samples, const KernelSpec& kernel);

}  // namespace speclab
