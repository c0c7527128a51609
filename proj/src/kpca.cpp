#include "speclab/kpca.hpp"
#include "speclab/linalg.hpp"

#include "text.hpp"

#include <cmath>

namespace speclab {

KpcaSystem::KpcaSystem(std::shared_ptr<const SampleSet> samples, KernelSpec kernel, KernelMatrix kn,
                       Vector eigvals, Matrix eigvecs)
    : samples_(std::move(samples)),
      kernel_(std::move(kernel)),
      kn_(std::move(kn)),
      eigvals_(std::move(eigvals)),
      eigvecs_(std::move(eigvecs)) {
  const Eigen::Index n = samples_->n();
  if (eigvecs_.rows() != n || eigvecs_.cols() < 1 || eigvals_.size() < K()) {
    throw ConfigError("kpca: eigensystem does not match the samples");
  }
  for (Eigen::Index k = 0; k < K(); ++k) {
    if (!(eigvals_(k) > kKpcaRankFloor)) {
      throw ConfigError("kpca: K exceeds the numerical rank of the kernel matrix (eigenvalue " +
                        text::format_double(eigvals_(k)) + ")");
    }
  }
  scaled_ = eigvecs_ * (eigvals_.head(K()) * static_cast<double>(n)).cwiseInverse().asDiagonal();
}

double KpcaSystem::eigengap() const {
  if (eigvals_.size() <= K()) return std::numeric_limits<double>::quiet_NaN();
  return eigvals_(K() - 1) - eigvals_(K());
}

Matrix KpcaSystem::evaluate(const PointMatrix& points) const {
  if (points.cols() != samples_->dim()) throw ConfigError("kpca: point dimension mismatch");
  return kernel_.cross(points, samples_->points) * scaled_;
}

double KpcaSystem::restriction_residual() const {
  return (evaluate(samples_->points) - eigvecs_).cwiseAbs().maxCoeff();
}

double KpcaSystem::norm_residual() const {
  const Matrix f = evaluate(samples_->points);
  const Vector norms = (f.colwise().squaredNorm() / static_cast<double>(samples_->n())).cwiseSqrt();
  return (norms.array() - 1.0).abs().maxCoeff();
}

double KpcaSystem::covariance_residual(const PointMatrix& probe) const {
  const Matrix f = evaluate(samples_->points);
  const Matrix c = kernel_.cross(probe, samples_->points);
  const Matrix sigma_f = c * f / static_cast<double>(samples_->n());
  const Matrix lambda_f = evaluate(probe) * eigvals_.head(K()).asDiagonal();
  return (sigma_f - lambda_f).cwiseAbs().maxCoeff();
}

KpcaSystem kpca_fit(std::shared_ptr<const SampleSet> samples, const KernelSpec& kernel, Eigen::Index K) {
  if (!samples || samples->n() < 1) throw ConfigError("kpca: empty sample set");
  const Eigen::Index n = samples->n();
  if (K < 1 || K > n) throw ConfigError("kpca: need 1 <= K <= n");
  KernelMatrix kn = kernel_matrix(*samples, kernel);
  auto es = linalg::symmetric_top(kn.entries, std::min(K + 1, n), K);
  Matrix v = es.vectors * std::sqrt(static_cast<double>(n));
  linalg::apply_sign_convention(v);
  return KpcaSystem(std::move(samples), kernel, std::move(kn), std::move(es.values), std::move(v));
}

double kpca_extend(const KpcaSystem& sys, Eigen::Index index, Point x) {
  if (index < 0 || index >= sys.K()) throw ConfigError("kpca_extend: index out of range");
  PointMatrix p(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t k = 0; k < x.size(); ++k) p(0, static_cast<Eigen::Index>(k)) = x[k];
  return sys.evaluate(p)(0, index);
}

Vector second_moment_spectrum(const SampleSet& samples) {
  const Matrix x = samples.points;
  const Matrix m = x.transpose() * x / static_cast<double>(samples.n());
  return linalg::symmetric_full(m).values;
}

}  // namespace speclab
