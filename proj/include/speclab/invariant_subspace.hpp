#pragma once

#include "speclab/common.hpp"

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace speclab::nk {

/// Block partition of an operator pair (T, E) in the eigenbasis of T.
///
/// V = [V1 V2] holds the eigenvectors of T with eigenvalues descending, so
/// T11 = diag(lambda_1..lambda_K), T22 = diag(lambda_{K+1}..), T12 = T21 = 0,
/// and E_ij = V_i^T E V_j.
struct BlockOperator {
  Matrix T11, T12, T21, T22;
  Matrix E11, E12, E21, E22;
  Matrix V;           // full orthogonal basis
  Vector eigvals;     // of T, descending
  Matrix T;           // original coordinates
  Matrix E;
  Eigen::Index K = 0;

  Eigen::Index m() const { return T22.rows(); }
  auto V1() const { return V.leftCols(K); }
  auto V2() const { return V.rightCols(m()); }
  double eigengap() const { return eigvals(K - 1) - eigvals(K); }
};

BlockOperator block_partition(const Matrix& T, const Matrix& E, Eigen::Index K,
                              double gap_floor = 1e-3);

/// Largest K*m for which sep() builds the dense Kronecker matrix.
inline constexpr Eigen::Index kDenseSepLimit = 1024;
/// Largest K*m accepted at all (block-diagonal route for diagonal T11).
inline constexpr Eigen::Index kSepLimit = 1'000'000;

/// sep(T11, T22) = min over |Y|_F = 1 of |T22 Y - Y T11|_F, the smallest
/// singular value of I_K (x) T22 - T11^T (x) I_m.
double sep(const Matrix& T11, const Matrix& T22);

/// The vectorized Sylvester operator Y -> T22 Y - Y T11.
Matrix sylvester_kronecker(const Matrix& T11, const Matrix& T22);

/// Newton-Kantorovich certificate for the quadratic equation
/// E21 + (T22+E22) Y - Y (T11+E11) - Y E12 Y = 0.
struct NewtonCertificate {
  double delta = 0.0;  // sep(T11, T22)
  double norm_E11 = 0.0, norm_E12 = 0.0, norm_E21 = 0.0, norm_E22 = 0.0;
  double s_E = 0.0;    // delta - |E22| - |E11|
  double a = 0.0;      // |E21| / delta
  double b = 0.0;      // (|E22| + |E11|) / delta
  double c = 0.0;      // 2 |E12| / delta
  double h = 0.0;      // a c / (1 - b)^2
  std::optional<double> r0;  // 2a / ((1-b)(1 + sqrt(1-2h))), only when all pass

  bool b_below_one = false;
  bool h_below_half = false;
  bool s_E_positive = false;
  bool product_below_quarter = false;  // |E21||E12| / s_E^2 < 1/4

  bool passes() const {
    return b_below_one && h_below_half && s_E_positive && product_below_quarter;
  }
  /// 2 |E21| / s_E
  double y_bound() const { return 2.0 * norm_E21 / s_E; }

  /// key=value lines, fixed order.
  std::string to_text() const;
};

NewtonCertificate certify(const Matrix& T11, const Matrix& T22, const Matrix& E11,
                          const Matrix& E12, const Matrix& E21, const Matrix& E22);
inline NewtonCertificate certify(const BlockOperator& b) {
  return certify(b.T11, b.T22, b.E11, b.E12, b.E21, b.E22);
}

struct NewtonResult {
  NewtonCertificate certificate;
  std::optional<Matrix> Y;  // m x K, present only when the certificate passes
  int iterations = 0;
  double residual = 0.0;
};

/// |E21 + (T22+E22) Y - Y (T11+E11) - Y E12 Y|_F
double quadratic_residual(const BlockOperator& blocks, const Matrix& Y);

/// Newton's method from Y0 = 0; each step solves the vectorized Frechet
/// system by LU. Returns without Y when the certificate fails.
NewtonResult newton_solve(const BlockOperator& blocks, double tol = 1e-12, int max_iter = 50);

/// Largest m accepted by newton_solve.
inline constexpr Eigen::Index kNewtonMaxM = 1000;

/// |T~ W0 - W0 (T~11 + T~12 Y)|_F for W0 = V1 + V2 Y.
double verify_invariance(const BlockOperator& blocks, const Matrix& Y);

struct EigenvalueLocation {
  std::vector<std::complex<double>> eigenvalues;  // of T11 + E11 + E12 Y
  std::vector<double> distances;                  // to sigma(T11)
  double radius = 0.0;                            // |E11 + E12 Y|_2
  bool real_spectrum = true;                      // all |imag| <= 1e-10
  std::vector<bool> contained;

  bool all_contained() const;
};

EigenvalueLocation eigenvalue_location(const BlockOperator& blocks, const Matrix& Y);

/// Boundary of the rectangle (lambda_K + lambda_{K+1})/2 <= re <= |T| + 1,
/// |im| <= 1, with eta = 1 / sup over the boundary of |(z I - T)^{-1}|.
struct ContourSpec {
  double re_min = 0.0;
  double re_max = 0.0;
  double im_max = 1.0;
  double eta = 0.0;
  /// eta from sampling the boundary, kept for comparison with the exact value.
  double eta_sampled = 0.0;

  double length() const { return 2.0 * (re_max - re_min) + 4.0 * im_max; }
  /// Operator-norm perturbation bound eta^2 / (eta + l / 2 pi).
  double perturbation_bound() const;
  /// Distance from z to the boundary (0 on it).
  double boundary_distance(std::complex<double> z) const;
  bool strictly_inside(std::complex<double> z) const;
};

inline constexpr int kContourSamples = 400;

/// Contour for a symmetric T with gap at K. For symmetric T the resolvent
/// norm is 1/dist(z, sigma(T)), so eta is exact; eta_sampled uses 400 points.
ContourSpec make_contour(const Matrix& T, Eigen::Index K, int samples = kContourSamples);

/// Number of eigenvalues of A strictly inside the contour. Throws
/// NumericalError if an eigenvalue lies within 1e-9 of the boundary.
int count_in_contour(const Matrix& A, const ContourSpec& contour);

struct Orthonormalized {
  Matrix W;                     // (V1 + V2 Y)(I + Y^T Y)^{-1/2}
  double norm_Y = 0.0;          // |Y|_2
  double norm_inv_sqrt = 0.0;   // |(I + Y^T Y)^{-1/2}|_2
  double norm_I_minus = 0.0;    // |I - (I + Y^T Y)^{-1/2}|_2
  bool bound_inv_sqrt = false;  // norm_inv_sqrt <= 1
  bool bound_I_minus = false;   // norm_I_minus <= norm_Y
};

/// Requires |Y|_2 < 1.
Orthonormalized orthonormalize(const Matrix& V1, const Matrix& V2, const Matrix& Y);

struct ConstantInputs {
  double eigengap = 0.0;         // lambda_K - lambda_{K+1}
  double delta = 0.0;            // sep(T11, T22)
  double eta = 0.0;
  double contour_length = 0.0;
  double C_H = 1.0;              // |f|_inf <= C_H |f|_H
  double V1_2toH = 1.0;
  double V1_2toinf = 1.0;
};

struct TheoremConstants {
  double C1 = 0.0, C2 = 0.0, C3 = 0.0;
};

TheoremConstants theorem_constants(const ConstantInputs& in);

/// Inputs for the finite-dimensional model H = R^N with the Euclidean norm:
/// C_H = 1, |V1|_{2->H} = 1, |V1|_{2->inf} = max row norm of V1.
ConstantInputs euclidean_constant_inputs(const BlockOperator& blocks, const ContourSpec& contour);

}  // namespace speclab::nk
