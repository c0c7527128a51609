#include "speclab/alignment.hpp"
#include "speclab/linalg.hpp"

#include "text.hpp"

#include <cmath>

namespace speclab {

Matrix gram_L2P(const Matrix& a_on_nodes, const Matrix& b_on_nodes, const QuadratureGrid& grid) {
  if (a_on_nodes.rows() != grid.size() || b_on_nodes.rows() != grid.size()) {
    throw ConfigError("gram_L2P: values do not match the grid");
  }
  return a_on_nodes.transpose() * grid.weights.asDiagonal() * b_on_nodes;
}

AlignmentResult procrustes_align(const Matrix& gram) {
  if (gram.rows() != gram.cols() || gram.size() == 0) throw ConfigError("procrustes_align: need a square gram");
  if (!gram.allFinite()) throw NumericalError("procrustes_align: gram matrix is not finite");
  Eigen::JacobiSVD<Matrix> svd(gram, Eigen::ComputeFullU | Eigen::ComputeFullV);
  AlignmentResult r;
  r.gram = gram;
  r.singular_values = svd.singularValues();
  const double smin = r.singular_values(r.singular_values.size() - 1);
  if (!(smin > 0.0)) throw NumericalError("procrustes_align: gram matrix is rank deficient");
  r.Q = svd.matrixU() * svd.matrixV().transpose();
  r.frobenius_gap = linalg::spectral_norm(r.Q - gram);
  const double predicted = (r.singular_values.array() - 1.0).abs().maxCoeff();
  if (std::abs(r.frobenius_gap - predicted) > 1e-9 * (1.0 + predicted)) {
    throw NumericalError("procrustes_align: |Q - gram| = " + text::format_double(r.frobenius_gap) +
                         " disagrees with max|1 - sigma| = " + text::format_double(predicted));
  }
  r.singular_values_below_two = r.singular_values(0) < 2.0;
  return r;
}

double uniform_error(const Matrix& pop_values, const Matrix& sample_values, const Matrix& Q) {
  if (pop_values.rows() == 0) throw ConfigError("uniform_error: empty evaluation grid");
  if (pop_values.rows() != sample_values.rows() || pop_values.cols() != sample_values.cols() ||
      Q.rows() != pop_values.cols() || Q.cols() != pop_values.cols()) {
    throw ConfigError("uniform_error: shapes do not conform");
  }
  // Row x of (Q^T psi_hat(x))^T is psi_hat(x)^T Q.
  return linalg::norm_2inf(pop_values - sample_values * Q);
}

ConsistencyReport consistency_error(const PopulationOracle& oracle, const FunctionBasis& embedding,
                                    const PointMatrix& eval_grid, const Matrix& pop_on_eval) {
  if (embedding.size() != oracle.K()) throw ConfigError("consistency_error: embedding dimension differs from oracle K");
  const Matrix sample_nodes = embedding.evaluate(oracle.grid().nodes);
  ConsistencyReport rep;
  rep.alignment = procrustes_align(gram_L2P(sample_nodes, oracle.node_values(), oracle.grid()));
  const Matrix pop = pop_on_eval.size() ? pop_on_eval : oracle.evaluate(eval_grid);
  if (pop.rows() != eval_grid.rows()) throw ConfigError("consistency_error: precomputed values do not match the grid");
  rep.error = uniform_error(pop, embedding.evaluate(eval_grid), rep.alignment.Q);
  rep.alignment.aligned_error_2inf = rep.error;
  rep.eval_points = eval_grid.rows();
  return rep;
}

double random_search_2inf(const Matrix& pop_values, const Matrix& sample_values, const Matrix& closed_form_Q,
                          int candidates, std::uint64_t seed) {
  double best = uniform_error(pop_values, sample_values, closed_form_Q);
  SplitMix64 rng(seed);
  for (int c = 0; c < candidates; ++c) {
    const Matrix Q = linalg::random_orthogonal(closed_form_Q.rows(), rng);
    best = std::min(best, uniform_error(pop_values, sample_values, Q));
  }
  return best;
}

}  // namespace speclab
