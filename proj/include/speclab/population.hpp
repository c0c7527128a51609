#pragma once

#include "speclab/basis.hpp"
#include "speclab/kernel.hpp"

#include <filesystem>
#include <vector>

namespace speclab {

enum class DensityFamily { Uniform, PiecewiseConstantMixture };

/// Mixture component: uniform on `box` with mass `weight`.
struct MixtureComponent {
  DomainBox box;
  double weight = 0.0;
};

/// A density bounded away from zero on a box.
///
/// Uniform: p = 1/vol(domain). Mixture: p(x) = sum_c w_c 1[x in box_c] / vol(box_c);
/// the component boxes must cover the domain so that p_l > 0.
class DensitySpec {
 public:
  static DensitySpec uniform(DomainBox domain);
  static DensitySpec mixture(DomainBox domain, std::vector<MixtureComponent> components);

  DensityFamily family() const { return family_; }
  const DomainBox& domain() const { return domain_; }
  const std::vector<MixtureComponent>& components() const { return components_; }
  double p_l() const { return p_l_; }
  double p_u() const { return p_u_; }

  double operator()(Point x) const;
  SampleSet sample(Eigen::Index n, std::uint64_t seed) const;

 private:
  DensitySpec() = default;
  void certify_bounds();

  DensityFamily family_ = DensityFamily::Uniform;
  DomainBox domain_;
  std::vector<MixtureComponent> components_;
  double p_l_ = 0.0;
  double p_u_ = 0.0;
};

/// Tensor midpoint grid with weights p(x_j) * cell volume, renormalized to 1.
struct QuadratureGrid {
  PointMatrix nodes;
  Vector weights;
  std::vector<Eigen::Index> per_dim;  // nodes per dimension
  DomainBox domain;

  Eigen::Index size() const { return nodes.rows(); }
  /// Index of a node that equals x bit for bit, or -1.
  Eigen::Index exact_node_index(Point x) const;
};

/// Midpoint grid of about m nodes: m in 1-D, min(64, floor(sqrt m))^2 in 2-D.
QuadratureGrid make_quadrature_grid(const DensitySpec& density, Eigen::Index m);

/// Evenly spaced evaluation grid including the box corners:
/// `points_per_dim` per axis (512 in 1-D, 64 per axis in 2-D by default).
PointMatrix make_eval_grid(const DomainBox& domain, Eigen::Index points_per_dim);
Eigen::Index default_eval_points(Eigen::Index dim);

/// Which integral operator the oracle discretizes.
enum class OperatorKind {
  NormalizedLaplacian,  // k(x,y) / sqrt(d(x) d(y))
  Covariance            // k(x,y), for kernel PCA
};

std::string_view to_string(OperatorKind kind);

struct OracleOptions {
  OperatorKind kind = OperatorKind::NormalizedLaplacian;
  double gap_floor = 1e-3;
};

/// Quadrature stand-in for the population operator and its top-K
/// eigenfunctions, orthonormal in L2(P).
class PopulationOracle : public FunctionBasis {
 public:
  PopulationOracle(KernelSpec kernel, QuadratureGrid grid, OperatorKind kind, Vector eigvals,
                   Matrix node_values);

  const KernelSpec& kernel() const { return kernel_; }
  const QuadratureGrid& grid() const { return grid_; }
  OperatorKind kind() const { return kind_; }
  /// Leading discretized eigenvalues (at least K + 1), descending.
  const Vector& eigvals() const { return eigvals_; }
  /// f_i(x_a), nodes x K.
  const Matrix& node_values() const { return node_values_; }
  /// Population degree d(x_a) on the nodes (ones for the covariance operator).
  const Vector& pop_degree() const { return pop_degree_; }
  Eigen::Index K() const { return node_values_.cols(); }
  double eigengap() const { return eigvals_(K() - 1) - eigvals_(K()); }

  Eigen::Index size() const override { return K(); }
  /// Nystrom extension of the tabulated eigenfunctions; exact table values at nodes.
  Matrix evaluate(const PointMatrix& points) const override;

  /// max_{a,b} |<f_a, f_b>_{L2(P)} - delta_ab| on the grid.
  double orthonormality_residual() const;

 private:
  KernelSpec kernel_;
  QuadratureGrid grid_;
  OperatorKind kind_;
  Vector eigvals_;
  Matrix node_values_;
  Vector pop_degree_;
};

PopulationOracle build_oracle(const KernelSpec& kernel, const DensitySpec& density,
                              Eigen::Index m, Eigen::Index K, const OracleOptions& options = {});

/// (f_1(x), ..., f_K(x)). Throws ConfigError when x is outside the domain.
Vector pop_embedding(const PopulationOracle& oracle, Point x);

/// Writes <stem>.meta.txt (kernel, kind, eigenvalues) and <stem>.nodes.csv
/// (node coordinates, weight, f_1..f_K) with round-trip precision.
void save_oracle(const PopulationOracle& oracle, const std::filesystem::path& stem);
PopulationOracle load_oracle(const std::filesystem::path& stem);

}  // namespace speclab
