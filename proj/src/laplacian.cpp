#include "speclab/laplacian.hpp"
#include "speclab/linalg.hpp"
#include "speclab/population.hpp"

#include "text.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace speclab {

LaplacianMatrix normalized_laplacian(const KernelMatrix& kn) {
  const Eigen::Index n = kn.n();
  if (n < 1 || kn.entries.cols() != n) throw ConfigError("normalized_laplacian: need a square kernel matrix");
  LaplacianMatrix lap;
  lap.degrees = kn.entries.rowwise().sum();
  if (!(lap.degrees.minCoeff() > 0.0)) {
    throw NumericalError("normalized_laplacian: non-positive degree");
  }
  lap.L.resize(n, n);
  // sqrt(d_i d_j) is symmetric in (i, j) bit for bit, so L is too.
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      lap.L(i, j) = kn.entries(i, j) / std::sqrt(lap.degrees(i) * lap.degrees(j));
    }
  }
  return lap;
}

EigenSystem eigensystem(const Matrix& symmetric, Eigen::Index K) {
  const Eigen::Index n = symmetric.rows();
  if (K < 1) throw ConfigError("eigensystem: K must be at least 1");
  if (K > n) throw ConfigError("eigensystem: K exceeds the number of samples");
  auto es = linalg::symmetric_top(symmetric, std::min(K + 1, n), K);
  EigenSystem out;
  out.eigvecs = es.vectors * std::sqrt(static_cast<double>(n));
  linalg::apply_sign_convention(out.eigvecs);
  out.eigvals = std::move(es.values);
  out.eigengap = K < n ? out.eigvals(K - 1) - out.eigvals(K) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

// ---------------------------------------------------------------- extension

namespace {

// Columns of `scaled` already carry v_i / (lambda n sqrt(d_i)).
Matrix extend_rows(const NystromContext& ctx, const PointMatrix& points, const Matrix& scaled) {
  if (points.cols() != ctx.samples->dim()) throw ConfigError("extension: point dimension mismatch");
  const Matrix c = ctx.kernel.cross(points, ctx.samples->points);
  const Vector dx = c.rowwise().mean();
  return dx.cwiseSqrt().cwiseInverse().asDiagonal() * (c * scaled);
}

PointMatrix probe_grid(const KernelSpec& kernel) {
  return make_eval_grid(kernel.domain(), kernel.domain().dim() == 1 ? 65 : 9);
}

}  // namespace

ExtendedEigenfunction::ExtendedEigenfunction(std::shared_ptr<const NystromContext> ctx,
                                             double eigenvalue, Vector v)
    : ctx_(std::move(ctx)), eigenvalue_(eigenvalue), v_(std::move(v)) {
  if (!ctx_ || v_.size() != ctx_->samples->n() || ctx_->degrees.size() != v_.size()) {
    throw ConfigError("extension: coefficient vector does not match the samples");
  }
  if (!(eigenvalue_ > kExtensionEigenFloor)) {
    throw ConfigError("extension: eigenvalue " + text::format_double(eigenvalue_) +
                      " is numerically zero");
  }
  const double n = static_cast<double>(v_.size());
  scaled_ = v_.cwiseQuotient(ctx_->degrees.cwiseSqrt()) / (eigenvalue_ * n);
}

double ExtendedEigenfunction::operator()(Point x) const {
  const Vector r = ctx_->kernel.row(x, ctx_->samples->points);
  return r.dot(scaled_) / std::sqrt(r.mean());
}

Vector ExtendedEigenfunction::evaluate(const PointMatrix& points) const {
  return extend_rows(*ctx_, points, scaled_).col(0);
}

ExtendedEigenfunction nystrom_extend(const EigenSystem& es, Eigen::Index index,
                                     std::shared_ptr<const SampleSet> samples,
                                     const KernelSpec& kernel, const DegreeVector& degrees) {
  if (index < 0 || index >= es.K()) throw ConfigError("nystrom_extend: index out of range");
  if (!samples || samples->n() != es.n() || degrees.values().size() != es.n()) {
    throw ConfigError("nystrom_extend: samples, degrees and eigensystem disagree");
  }
  kernel.require_laplacian_admissible();
  auto ctx = std::make_shared<const NystromContext>(NystromContext{samples, kernel, degrees.values()});
  ExtendedEigenfunction f(ctx, es.eigvals(index), es.eigvecs.col(index));

  const Vector at_samples = f.evaluate(samples->points);
  f.restriction_residual_ = (at_samples - f.v_).cwiseAbs().maxCoeff();
  f.empirical_norm_ = std::sqrt(at_samples.squaredNorm() / static_cast<double>(samples->n()));

  // (T_n f)(x) = 1/n sum_i k(x, X_i) f(X_i) / sqrt(d(x) d_i), using the
  // extension's own values at the samples.
  const PointMatrix probe = probe_grid(kernel);
  const Matrix tf = extend_rows(*ctx, probe, ctx->degrees.cwiseSqrt().cwiseInverse().cwiseProduct(at_samples) /
                                                 static_cast<double>(samples->n()));
  const Vector fx = f.evaluate(probe);
  f.probe_residual_ = (tf.col(0) - f.eigenvalue_ * fx).cwiseAbs().maxCoeff();
  if (!(f.probe_residual_ <= kProbeTolerance)) {
    throw NumericalError("nystrom_extend: eigenfunction residual " + text::format_double(f.probe_residual_) +
                         " exceeds tolerance");
  }
  return f;
}

SampleEmbedding::SampleEmbedding(std::vector<ExtendedEigenfunction> extensions) : ext_(std::move(extensions)) {
  if (ext_.empty()) throw ConfigError("embedding: no eigenfunctions");
}

Matrix SampleEmbedding::evaluate(const PointMatrix& points) const {
  Matrix out(points.rows(), size());
  for (std::size_t k = 0; k < ext_.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = ext_[k].evaluate(points);
  return out;
}

Vector sample_embedding(const SampleEmbedding& embedding, Point x) {
  Vector out(embedding.size());
  for (Eigen::Index k = 0; k < embedding.size(); ++k) out(k) = embedding[static_cast<std::size_t>(k)](x);
  return out;
}

LaplacianFit fit_laplacian_embedding(std::shared_ptr<const SampleSet> samples, const KernelSpec& kernel,
                                     Eigen::Index K) {
  kernel.require_laplacian_admissible();
  if (!samples || samples->n() < 1) throw ConfigError("fit: empty sample set");
  LaplacianMatrix lap = normalized_laplacian(kernel_matrix(*samples, kernel));
  EigenSystem es = eigensystem(lap, K);
  const DegreeVector deg(samples, kernel, lap.degrees);
  std::vector<ExtendedEigenfunction> ext;
  ext.reserve(static_cast<std::size_t>(K));
  for (Eigen::Index k = 0; k < K; ++k) ext.push_back(nystrom_extend(es, k, samples, kernel, deg));
  SampleEmbedding emb(std::move(ext));
  return {std::move(lap), std::move(es), std::move(emb)};
}

void write_embedding_csv(const std::filesystem::path& path, const PointMatrix& points, const Matrix& values) {
  if (points.rows() != values.rows()) throw ConfigError("embedding csv: row count mismatch");
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  for (Eigen::Index k = 0; k < points.cols(); ++k) out << 'x' << k << ',';
  for (Eigen::Index k = 0; k < values.cols(); ++k) out << (k ? "," : "") << "psi" << k + 1;
  out << '\n';
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index k = 0; k < points.cols(); ++k) out << text::format_double(points(i, k)) << ',';
    for (Eigen::Index k = 0; k < values.cols(); ++k) out << (k ? "," : "") << text::format_double(values(i, k));
    out << '\n';
  }
}

}  // namespace speclab
