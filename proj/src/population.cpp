#include "speclab/population.hpp"
#include "speclab/linalg.hpp"

#include "text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace speclab {

// ---------------------------------------------------------------- density

DensitySpec DensitySpec::uniform(DomainBox domain) {
  domain.validate();
  DensitySpec d;
  d.family_ = DensityFamily::Uniform;
  d.domain_ = std::move(domain);
  d.p_l_ = d.p_u_ = 1.0 / d.domain_.volume();
  return d;
}

DensitySpec DensitySpec::mixture(DomainBox domain, std::vector<MixtureComponent> components) {
  domain.validate();
  if (components.empty()) throw ConfigError("mixture density: no components");
  double total = 0.0;
  for (const auto& c : components) {
    c.box.validate();
    if (c.box.dim() != domain.dim()) throw ConfigError("mixture density: component dimension mismatch");
    if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
      throw ConfigError("mixture density: weights must be positive");
    }
    for (Eigen::Index k = 0; k < domain.dim(); ++k) {
      if (c.box.lo(k) < domain.lo(k) || c.box.hi(k) > domain.hi(k)) {
        throw ConfigError("mixture density: component box leaves the domain");
      }
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-10) throw ConfigError("mixture density: weights must sum to 1");
  DensitySpec d;
  d.family_ = DensityFamily::PiecewiseConstantMixture;
  d.domain_ = std::move(domain);
  d.components_ = std::move(components);
  d.certify_bounds();
  return d;
}

// The mixture is constant on the cells cut out by all box faces, so its
// extremes are attained at the cell centers.
void DensitySpec::certify_bounds() {
  const Eigen::Index dim = domain_.dim();
  std::vector<std::vector<double>> cuts(static_cast<std::size_t>(dim));
  for (Eigen::Index k = 0; k < dim; ++k) {
    auto& c = cuts[static_cast<std::size_t>(k)];
    c = {domain_.lo(k), domain_.hi(k)};
    for (const auto& comp : components_) {
      c.push_back(comp.box.lo(k));
      c.push_back(comp.box.hi(k));
    }
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  std::vector<std::size_t> idx(static_cast<std::size_t>(dim), 0);
  std::vector<double> center(static_cast<std::size_t>(dim));
  while (true) {
    for (std::size_t k = 0; k < idx.size(); ++k) {
      center[k] = 0.5 * (cuts[k][idx[k]] + cuts[k][idx[k] + 1]);
    }
    const double v = (*this)(Point(center));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    std::size_t k = 0;
    while (k < idx.size() && ++idx[k] == cuts[k].size() - 1) idx[k++] = 0;
    if (k == idx.size()) break;
  }
  if (!(lo > 0.0)) {
    throw ConfigError("mixture density: components must cover the domain (density lower bound is 0)");
  }
  p_l_ = lo;
  p_u_ = hi;
}

namespace {

// Half-open membership so that shared faces are not counted twice; the
// upper domain face is closed.
bool in_component(const DomainBox& box, const DomainBox& domain, Point x) {
  for (Eigen::Index k = 0; k < box.dim(); ++k) {
    if (x[k] < box.lo(k)) return false;
    if (x[k] > box.hi(k)) return false;
    if (x[k] == box.hi(k) && box.hi(k) != domain.hi(k)) return false;
  }
  return true;
}

}  // namespace

double DensitySpec::operator()(Point x) const {
  if (!domain_.contains(x, 0.0)) return 0.0;
  if (family_ == DensityFamily::Uniform) return p_l_;
  double p = 0.0;
  for (const auto& c : components_) {
    if (in_component(c.box, domain_, x)) p += c.weight / c.box.volume();
  }
  return p;
}

SampleSet DensitySpec::sample(Eigen::Index n, std::uint64_t seed) const {
  if (n < 1) throw ConfigError("sample: n must be positive");
  SplitMix64 rng(seed);
  const Eigen::Index dim = domain_.dim();
  SampleSet s{PointMatrix(n, dim), seed};
  for (Eigen::Index i = 0; i < n; ++i) {
    const DomainBox* box = &domain_;
    if (family_ == DensityFamily::PiecewiseConstantMixture) {
      const double u = rng.uniform();
      double acc = 0.0;
      box = &components_.back().box;
      for (const auto& c : components_) {
        acc += c.weight;
        if (u < acc) {
          box = &c.box;
          break;
        }
      }
    }
    for (Eigen::Index k = 0; k < dim; ++k) s.points(i, k) = rng.uniform(box->lo(k), box->hi(k));
  }
  return s;
}

// ---------------------------------------------------------------- grids

Eigen::Index QuadratureGrid::exact_node_index(Point x) const {
  const Eigen::Index dim = domain.dim();
  if (static_cast<Eigen::Index>(x.size()) != dim) return -1;
  Eigen::Index index = 0;
  for (Eigen::Index k = 0; k < dim; ++k) {
    const auto g = per_dim[static_cast<std::size_t>(k)];
    const double h = (domain.hi(k) - domain.lo(k)) / static_cast<double>(g);
    const double t = (x[k] - domain.lo(k)) / h - 0.5;
    if (!std::isfinite(t)) return -1;
    const auto i = static_cast<Eigen::Index>(std::llround(t));
    if (i < 0 || i >= g) return -1;
    index = index * g + i;
  }
  for (Eigen::Index k = 0; k < dim; ++k) {
    if (nodes(index, k) != x[k]) return -1;
  }
  return index;
}

QuadratureGrid make_quadrature_grid(const DensitySpec& density, Eigen::Index m) {
  const DomainBox& domain = density.domain();
  const Eigen::Index dim = domain.dim();
  if (dim > 2) throw ConfigError("quadrature grid: only 1-D and 2-D domains are supported");
  QuadratureGrid grid;
  grid.domain = domain;
  if (dim == 1) {
    grid.per_dim = {m};
  } else {
    const auto g = std::min<Eigen::Index>(64, static_cast<Eigen::Index>(std::sqrt(static_cast<double>(m))));
    grid.per_dim = {g, g};
  }
  Eigen::Index total = 1;
  for (auto g : grid.per_dim) {
    if (g < 1) throw ConfigError("quadrature grid: m too small");
    total *= g;
  }

  grid.nodes.resize(total, dim);
  grid.weights.resize(total);
  const double cell = domain.volume() / static_cast<double>(total);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(dim), 0);
  for (Eigen::Index a = 0; a < total; ++a) {
    // Last axis varies fastest, matching exact_node_index.
    Eigen::Index rem = a;
    for (Eigen::Index k = dim - 1; k >= 0; --k) {
      const auto g = grid.per_dim[static_cast<std::size_t>(k)];
      idx[static_cast<std::size_t>(k)] = rem % g;
      rem /= g;
    }
    for (Eigen::Index k = 0; k < dim; ++k) {
      const auto g = grid.per_dim[static_cast<std::size_t>(k)];
      const double h = (domain.hi(k) - domain.lo(k)) / static_cast<double>(g);
      grid.nodes(a, k) = domain.lo(k) + (static_cast<double>(idx[static_cast<std::size_t>(k)]) + 0.5) * h;
    }
    grid.weights(a) = density(row_of(grid.nodes, a)) * cell;
  }
  const double sum = grid.weights.sum();
  if (!(sum > 0.0) || grid.weights.minCoeff() <= 0.0) {
    throw NumericalError("quadrature grid: non-positive weights");
  }
  grid.weights /= sum;
  return grid;
}

PointMatrix make_eval_grid(const DomainBox& domain, Eigen::Index points_per_dim) {
  domain.validate();
  if (points_per_dim < 2) throw ConfigError("eval grid: need at least 2 points per axis");
  const Eigen::Index dim = domain.dim();
  Eigen::Index total = 1;
  for (Eigen::Index k = 0; k < dim; ++k) total *= points_per_dim;
  PointMatrix pts(total, dim);
  for (Eigen::Index a = 0; a < total; ++a) {
    Eigen::Index rem = a;
    for (Eigen::Index k = dim - 1; k >= 0; --k) {
      const Eigen::Index i = rem % points_per_dim;
      rem /= points_per_dim;
      const double t = static_cast<double>(i) / static_cast<double>(points_per_dim - 1);
      pts(a, k) = i == points_per_dim - 1 ? domain.hi(k) : domain.lo(k) + t * (domain.hi(k) - domain.lo(k));
    }
  }
  return pts;
}

Eigen::Index default_eval_points(Eigen::Index dim) {
  if (dim == 1) return 512;
  if (dim == 2) return 64;
  return 16;
}

// ---------------------------------------------------------------- oracle

std::string_view to_string(OperatorKind kind) {
  return kind == OperatorKind::NormalizedLaplacian ? "normalized_laplacian" : "covariance";
}

namespace {

OperatorKind operator_kind_from_string(std::string_view s) {
  if (s == "normalized_laplacian") return OperatorKind::NormalizedLaplacian;
  if (s == "covariance") return OperatorKind::Covariance;
  throw ConfigError("unknown operator kind '" + std::string(s) + "'");
}

}  // namespace

PopulationOracle::PopulationOracle(KernelSpec kernel, QuadratureGrid grid, OperatorKind kind,
                                   Vector eigvals, Matrix node_values)
    : kernel_(std::move(kernel)),
      grid_(std::move(grid)),
      kind_(kind),
      eigvals_(std::move(eigvals)),
      node_values_(std::move(node_values)) {
  const Eigen::Index m = grid_.size();
  if (node_values_.rows() != m || node_values_.cols() < 1) {
    throw ConfigError("oracle: node table does not match the grid");
  }
  if (eigvals_.size() < K() + 1) throw ConfigError("oracle: need at least K + 1 eigenvalues");
  if (kind_ == OperatorKind::NormalizedLaplacian) {
    pop_degree_ = kernel_.cross(grid_.nodes, grid_.nodes) * grid_.weights;
  } else {
    pop_degree_ = Vector::Ones(m);
  }
}

Matrix PopulationOracle::evaluate(const PointMatrix& points) const {
  if (points.cols() != grid_.domain.dim()) throw ConfigError("oracle: point dimension mismatch");
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    if (!grid_.domain.contains(row_of(points, i))) {
      throw ConfigError("oracle: evaluation point outside the domain");
    }
  }
  // f_i(x) = 1/lambda_i sum_a w_a k(x, x_a) f_i(x_a) [/ sqrt(d(x) d(x_a))]
  Matrix coef = grid_.weights.asDiagonal() * node_values_;
  if (kind_ == OperatorKind::NormalizedLaplacian) {
    coef = pop_degree_.cwiseSqrt().cwiseInverse().asDiagonal() * coef;
  }
  coef = coef * eigvals_.head(K()).cwiseInverse().asDiagonal();

  const Matrix c = kernel_.cross(points, grid_.nodes);
  Matrix f = c * coef;
  if (kind_ == OperatorKind::NormalizedLaplacian) {
    const Vector dx = c * grid_.weights;
    f = dx.cwiseSqrt().cwiseInverse().asDiagonal() * f;
  }
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Eigen::Index a = grid_.exact_node_index(row_of(points, i));
    if (a >= 0) f.row(i) = node_values_.row(a);
  }
  return f;
}

double PopulationOracle::orthonormality_residual() const {
  const Matrix g = node_values_.transpose() * grid_.weights.asDiagonal() * node_values_;
  return (g - Matrix::Identity(K(), K())).cwiseAbs().maxCoeff();
}

PopulationOracle build_oracle(const KernelSpec& kernel, const DensitySpec& density, Eigen::Index m,
                              Eigen::Index K, const OracleOptions& options) {
  if (options.kind == OperatorKind::NormalizedLaplacian) kernel.require_laplacian_admissible();
  if (K < 1) throw ConfigError("oracle: K must be at least 1");
  if (m < 16 * K) throw ConfigError("oracle: need m >= 16 K quadrature nodes");
  if (kernel.domain().dim() != density.domain().dim()) {
    throw ConfigError("oracle: kernel and density dimensions differ");
  }
  for (Eigen::Index k = 0; k < density.domain().dim(); ++k) {
    if (density.domain().lo(k) < kernel.domain().lo(k) || density.domain().hi(k) > kernel.domain().hi(k)) {
      throw ConfigError("oracle: density support leaves the kernel domain");
    }
  }

  QuadratureGrid grid = make_quadrature_grid(density, m);
  const Eigen::Index nodes = grid.size();
  if (K >= nodes) throw ConfigError("oracle: K must be smaller than the number of nodes");

  Matrix h = kernel.cross(grid.nodes, grid.nodes);
  const Vector sw = grid.weights.cwiseSqrt();
  if (options.kind == OperatorKind::NormalizedLaplacian) {
    const Vector d = h * grid.weights;
    const Vector s = sw.cwiseProduct(d.cwiseSqrt().cwiseInverse());
    h = s.asDiagonal() * h * s.asDiagonal();
  } else {
    h = sw.asDiagonal() * h * sw.asDiagonal();
  }
  h = 0.5 * (h + h.transpose());

  const Eigen::Index value_count = std::min<Eigen::Index>(nodes, K + 16);
  auto es = linalg::symmetric_top(h, value_count, K);
  linalg::apply_sign_convention(es.vectors);

  const double gap = es.values(K - 1) - es.values(K);
  if (!(gap >= options.gap_floor)) {
    throw ConfigError("oracle: eigengap " + text::format_double(gap) + " below floor " +
                      text::format_double(options.gap_floor));
  }
  Matrix f = sw.cwiseInverse().asDiagonal() * es.vectors;
  return PopulationOracle(kernel, std::move(grid), options.kind, std::move(es.values), std::move(f));
}

Vector pop_embedding(const PopulationOracle& oracle, Point x) {
  if (!oracle.grid().domain.contains(x)) throw ConfigError("pop_embedding: point outside the domain");
  PointMatrix p(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t k = 0; k < x.size(); ++k) p(0, static_cast<Eigen::Index>(k)) = x[k];
  return oracle.evaluate(p).row(0).transpose();
}

// ---------------------------------------------------------------- persistence

namespace {

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* suffix) {
  return stem.string() + suffix;
}

}  // namespace

void save_oracle(const PopulationOracle& oracle, const std::filesystem::path& stem) {
  const KernelParams& kp = oracle.kernel().params();
  const QuadratureGrid& grid = oracle.grid();
  std::ofstream meta(with_suffix(stem, ".meta.txt"));
  if (!meta) throw ConfigError("cannot write oracle metadata next to " + stem.string());
  meta << "kind=" << to_string(oracle.kind()) << '\n'
       << "kernel=" << to_string(kp.family) << '\n'
       << "bandwidth=" << text::format_double(kp.bandwidth) << '\n'
       << "offset=" << text::format_double(kp.offset) << '\n'
       << "value=" << text::format_double(kp.value) << '\n'
       << "table_distances=" << text::join(kp.table_distances) << '\n'
       << "table_values=" << text::join(kp.table_values) << '\n'
       << "kernel_domain_lo=" << text::join(kp.domain.lo) << '\n'
       << "kernel_domain_hi=" << text::join(kp.domain.hi) << '\n'
       << "require_positive_lower_bound=" << (kp.require_positive_lower_bound ? 1 : 0) << '\n'
       << "bound_grid_points=" << kp.bound_grid_points << '\n'
       << "grid_domain_lo=" << text::join(grid.domain.lo) << '\n'
       << "grid_domain_hi=" << text::join(grid.domain.hi) << '\n'
       << "per_dim=";
  for (std::size_t k = 0; k < grid.per_dim.size(); ++k) meta << (k ? "," : "") << grid.per_dim[k];
  meta << '\n' << "K=" << oracle.K() << '\n' << "eigvals=" << text::join(oracle.eigvals()) << '\n';

  std::ofstream csv(with_suffix(stem, ".nodes.csv"));
  if (!csv) throw ConfigError("cannot write oracle nodes next to " + stem.string());
  const Eigen::Index dim = grid.domain.dim();
  for (Eigen::Index k = 0; k < dim; ++k) csv << 'x' << k << ',';
  csv << "weight";
  for (Eigen::Index i = 0; i < oracle.K(); ++i) csv << ",f" << i + 1;
  csv << '\n';
  for (Eigen::Index a = 0; a < grid.size(); ++a) {
    for (Eigen::Index k = 0; k < dim; ++k) csv << text::format_double(grid.nodes(a, k)) << ',';
    csv << text::format_double(grid.weights(a));
    for (Eigen::Index i = 0; i < oracle.K(); ++i) csv << ',' << text::format_double(oracle.node_values()(a, i));
    csv << '\n';
  }
  if (!csv) throw NumericalError("oracle: write failed");
}

PopulationOracle load_oracle(const std::filesystem::path& stem) {
  const auto kv = text::parse_key_values(text::read_file(with_suffix(stem, ".meta.txt").string()));
  auto get = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError("oracle metadata: missing key '" + key + "'");
    return it->second;
  };
  auto to_vector = [](const std::vector<double>& v) {
    return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  auto list = [&](const std::string& key) {
    const std::string& s = get(key);
    return s.empty() ? std::vector<double>{} : text::parse_doubles(s, key);
  };

  KernelParams kp;
  kp.family = kernel_family_from_string(get("kernel"));
  kp.bandwidth = text::parse_double(get("bandwidth"), "bandwidth");
  kp.offset = text::parse_double(get("offset"), "offset");
  kp.value = text::parse_double(get("value"), "value");
  kp.table_distances = list("table_distances");
  kp.table_values = list("table_values");
  kp.domain = {to_vector(list("kernel_domain_lo")), to_vector(list("kernel_domain_hi"))};
  kp.require_positive_lower_bound = text::parse_int(get("require_positive_lower_bound"), "flag") != 0;
  kp.bound_grid_points = static_cast<int>(text::parse_int(get("bound_grid_points"), "bound_grid_points"));
  KernelSpec kernel = make_kernel(kp);

  QuadratureGrid grid;
  grid.domain = {to_vector(list("grid_domain_lo")), to_vector(list("grid_domain_hi"))};
  grid.domain.validate();
  Eigen::Index total = 1;
  for (double g : list("per_dim")) {
    grid.per_dim.push_back(static_cast<Eigen::Index>(g));
    total *= grid.per_dim.back();
  }
  const Eigen::Index dim = grid.domain.dim();
  if (static_cast<Eigen::Index>(grid.per_dim.size()) != dim) throw ConfigError("oracle metadata: bad per_dim");
  const auto K = static_cast<Eigen::Index>(text::parse_int(get("K"), "K"));
  const Vector eigvals = to_vector(list("eigvals"));

  std::ifstream csv(with_suffix(stem, ".nodes.csv"));
  if (!csv) throw ConfigError("cannot read oracle nodes for " + stem.string());
  std::string line;
  std::getline(csv, line);  // header
  grid.nodes.resize(total, dim);
  grid.weights.resize(total);
  Matrix values(total, K);
  for (Eigen::Index a = 0; a < total; ++a) {
    if (!std::getline(csv, line)) throw ConfigError("oracle nodes: truncated file");
    const auto cells = text::parse_doubles(line, "oracle node row");
    if (static_cast<Eigen::Index>(cells.size()) != dim + 1 + K) throw ConfigError("oracle nodes: bad row width");
    for (Eigen::Index k = 0; k < dim; ++k) grid.nodes(a, k) = cells[static_cast<std::size_t>(k)];
    grid.weights(a) = cells[static_cast<std::size_t>(dim)];
    for (Eigen::Index i = 0; i < K; ++i) values(a, i) = cells[static_cast<std::size_t>(dim + 1 + i)];
  }
  return PopulationOracle(std::move(kernel), std::move(grid), operator_kind_from_string(get("kind")),
                          eigvals, std::move(values));
}

}  // namespace speclab
