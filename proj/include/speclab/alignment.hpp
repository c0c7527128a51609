#pragma once

#include "speclab/basis.hpp"
#include "speclab/population.hpp"

namespace speclab {

/// entry (i, j) = sum_a w_a A_i(x_a) B_j(x_a); A and B hold values on the nodes.
Matrix gram_L2P(const Matrix& a_on_nodes, const Matrix& b_on_nodes, const QuadratureGrid& grid);

struct AlignmentResult {
  Matrix Q;                // K x K orthogonal
  Matrix gram;             // <sample_i, pop_j>_{L2(P)}
  Vector singular_values;  // descending
  double frobenius_gap = 0.0;  // |Q - gram|_2
  /// Singular values below 2 (the hypothesis of the Q - gram bound); a
  /// violation is reported, not thrown.
  bool singular_values_below_two = true;
  double aligned_error_2inf = 0.0;
};

/// Q = A B^T from gram = A S B^T. Throws NumericalError if gram is not
/// finite or its smallest singular value is not positive.
AlignmentResult procrustes_align(const Matrix& gram);

/// max_x |Psi(x) - Q^T Psi_hat(x)|_2 with Psi, Psi_hat given row-wise on
/// the evaluation points.
double uniform_error(const Matrix& pop_values, const Matrix& sample_values, const Matrix& Q);

struct ConsistencyReport {
  /// 2->inf error after the closed-form Procrustes Q. An upper bound on the
  /// inf over orthogonal Q, evaluated on a grid.
  double error = 0.0;
  AlignmentResult alignment;
  Eigen::Index eval_points = 0;
};

/// gram_L2P(sample, oracle) on the oracle nodes, then Procrustes, then the
/// uniform error on `eval_grid`. `pop_on_eval` may be precomputed by the
/// caller (oracle.evaluate(eval_grid)); pass an empty matrix otherwise.
ConsistencyReport consistency_error(const PopulationOracle& oracle, const FunctionBasis& embedding,
                                    const PointMatrix& eval_grid, const Matrix& pop_on_eval = {});

/// Diagnostic only: best 2->inf error over `candidates` Haar-random
/// orthogonal matrices and the closed-form Q.
double random_search_2inf(const Matrix& pop_values, const Matrix& sample_values,
                          const Matrix& closed_form_Q, int candidates, std::uint64_t seed);

}  // namespace speclab
