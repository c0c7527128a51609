#include "speclab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace speclab {

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::Constant: return "constant";
    case KernelFamily::Linear: return "linear";
    case KernelFamily::Table: return "table";
  }
  return "unknown";
}

KernelFamily kernel_family_from_string(std::string_view name) {
  if (name == "gaussian") return KernelFamily::Gaussian;
  if (name == "constant") return KernelFamily::Constant;
  if (name == "linear") return KernelFamily::Linear;
  if (name == "table" || name == "user-table") return KernelFamily::Table;
  throw ConfigError("unknown kernel family '" + std::string(name) + "'");
}

namespace {

double squared_distance(Point x, Point y) {
  double s = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double diff = x[d] - y[d];
    s += diff * diff;
  }
  return s;
}

double dot(Point x, Point y) {
  double s = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) s += x[d] * y[d];
  return s;
}

void validate_table(const KernelParams& p) {
  const auto& dist = p.table_distances;
  const auto& val = p.table_values;
  if (dist.size() < 2 || dist.size() != val.size()) {
    throw ConfigError("table kernel: need at least two (distance, value) knots");
  }
  if (dist.front() != 0.0) throw ConfigError("table kernel: first knot must be at distance 0");
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (!std::isfinite(dist[i]) || !std::isfinite(val[i])) {
      throw ConfigError("table kernel: knots must be finite");
    }
    if (i > 0 && !(dist[i] > dist[i - 1])) {
      throw ConfigError("table kernel: distances must be strictly increasing");
    }
  }
  if (dist.back() < p.domain.diameter()) {
    throw ConfigError("table kernel: knots must cover the domain diameter");
  }
}

}  // namespace

double KernelSpec::radial(double dist_sq) const {
  switch (params_.family) {
    case KernelFamily::Gaussian: return params_.offset + std::exp(-dist_sq / params_.bandwidth);
    case KernelFamily::Constant: return params_.value;
    case KernelFamily::Table: {
      const auto& dist = params_.table_distances;
      const auto& val = params_.table_values;
      const double r = std::sqrt(dist_sq);
      if (r >= dist.back()) return val.back();
      const auto it = std::upper_bound(dist.begin(), dist.end(), r);
      const auto hi = static_cast<std::size_t>(it - dist.begin());
      const auto lo = hi - 1;
      const double t = (r - dist[lo]) / (dist[hi] - dist[lo]);
      return val[lo] + t * (val[hi] - val[lo]);
    }
    case KernelFamily::Linear: break;
  }
  throw std::logic_error("radial() called on a non-radial kernel");
}

double KernelSpec::operator()(Point x, Point y) const {
  if (params_.family == KernelFamily::Linear) return dot(x, y);
  return radial(squared_distance(x, y));
}

Matrix KernelSpec::cross(const PointMatrix& a, const PointMatrix& b) const {
  Matrix c(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    const Point y = row_of(b, j);
    for (Eigen::Index i = 0; i < a.rows(); ++i) c(i, j) = (*this)(row_of(a, i), y);
  }
  return c;
}

Vector KernelSpec::row(Point x, const PointMatrix& b) const {
  Vector r(b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) r(j) = (*this)(x, row_of(b, j));
  return r;
}

void KernelSpec::require_laplacian_admissible() const {
  if (!laplacian_admissible()) {
    throw ConfigError(std::string("kernel '") + std::string(to_string(family())) +
                      "' is not admissible for the normalized Laplacian (needs kappa_l > 0)");
  }
}

KernelSpec make_kernel(const KernelParams& params) {
  params.domain.validate();
  KernelSpec k(params);
  switch (params.family) {
    case KernelFamily::Gaussian: {
      if (!(params.bandwidth > 0.0) || !std::isfinite(params.bandwidth)) {
        throw ConfigError("gaussian kernel: bandwidth must be positive and finite");
      }
      if (!std::isfinite(params.offset)) throw ConfigError("gaussian kernel: offset must be finite");
      if (params.bound_grid_points < 2) throw ConfigError("bound_grid_points must be >= 2");
      // The kernel depends on |x - y| only, which ranges over [0, diameter].
      const double diam = params.domain.diameter();
      const int g = params.bound_grid_points;
      double lo = k.radial(0.0), hi = lo;
      for (int i = 1; i <= g; ++i) {
        const double r = diam * static_cast<double>(i) / g;
        const double v = k.radial(r * r);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      k.kappa_l_ = lo;
      k.kappa_u_ = hi;
      break;
    }
    case KernelFamily::Constant:
      if (!std::isfinite(params.value)) throw ConfigError("constant kernel: value must be finite");
      k.kappa_l_ = k.kappa_u_ = params.value;
      break;
    case KernelFamily::Linear: {
      // Each coordinate product x_d y_d attains its extremes at box corners.
      double lo = 0.0, hi = 0.0;
      for (Eigen::Index d = 0; d < params.domain.dim(); ++d) {
        const double a = params.domain.lo(d), b = params.domain.hi(d);
        const double c[] = {a * a, a * b, b * b};
        lo += *std::min_element(std::begin(c), std::end(c));
        hi += *std::max_element(std::begin(c), std::end(c));
      }
      k.kappa_l_ = lo;
      k.kappa_u_ = hi;
      return k;  // exempt from the positive lower bound
    }
    case KernelFamily::Table: {
      validate_table(params);
      const double diam = params.domain.diameter();
      double lo = params.table_values.front(), hi = lo;
      for (std::size_t i = 0; i < params.table_distances.size(); ++i) {
        if (params.table_distances[i] > diam) break;
        lo = std::min(lo, params.table_values[i]);
        hi = std::max(hi, params.table_values[i]);
      }
      const double end = k.radial(diam * diam);
      k.kappa_l_ = std::min(lo, end);
      k.kappa_u_ = std::max(hi, end);
      break;
    }
  }
  if (params.require_positive_lower_bound && !(k.kappa_l_ > 0.0)) {
    throw ConfigError("kernel lower bound kappa_l must be positive for the Laplacian pipeline");
  }
  return k;
}

KernelMatrix kernel_matrix(const SampleSet& samples, const KernelSpec& kernel) {
  const Eigen::Index n = samples.n();
  if (n < 1) throw ConfigError("kernel_matrix: empty sample set");
  const double inv_n = 1.0 / static_cast<double>(n);
  KernelMatrix km{Matrix(n, n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    const Point xj = samples[j];
    for (Eigen::Index i = 0; i <= j; ++i) {
      const double v = kernel(samples[i], xj) * inv_n;
      km.entries(i, j) = v;
      km.entries(j, i) = v;
    }
  }
  return km;
}

double DegreeVector::operator()(Point x) const {
  return kernel_.row(x, samples_->points).mean();
}

DegreeVector degree(std::shared_ptr<const SampleSet> samples, const KernelSpec& kernel) {
  kernel.require_laplacian_admissible();
  if (!samples || samples->n() < 1) throw ConfigError("degree: empty sample set");
  const KernelMatrix km = kernel_matrix(*samples, kernel);
  Vector values = km.entries.rowwise().sum();
  return DegreeVector(std::move(samples), kernel, std::move(values));
}

}  // namespace speclab
