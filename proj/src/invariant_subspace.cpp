#include "speclab/invariant_subspace.hpp"
#include "speclab/linalg.hpp"

#include "text.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace speclab::nk {

namespace {

double symmetry_defect(const Matrix& a) {
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

void require_symmetric(const Matrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0) throw ConfigError(std::string(what) + ": need a square matrix");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (symmetry_defect(a) > 1e-12 * scale) throw ConfigError(std::string(what) + ": matrix is not symmetric");
}

bool is_diagonal(const Matrix& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (i != j && a(i, j) != 0.0) return false;
  return true;
}

}  // namespace

BlockOperator block_partition(const Matrix& T, const Matrix& E, Eigen::Index K, double gap_floor) {
  require_symmetric(T, "block_partition");
  const Eigen::Index N = T.rows();
  if (E.rows() != N || E.cols() != N) throw ConfigError("block_partition: E and T differ in size");
  if (K < 1 || K >= N) throw ConfigError("block_partition: need 1 <= K < N");

  auto es = linalg::symmetric_full(T);
  BlockOperator b;
  b.K = K;
  b.T = T;
  b.E = E;
  b.eigvals = es.values;
  b.V = std::move(es.vectors);
  if (!(b.eigengap() >= gap_floor)) {
    throw ConfigError("block_partition: eigengap " + text::format_double(b.eigengap()) + " below floor");
  }
  const Eigen::Index m = N - K;
  b.T11 = b.eigvals.head(K).asDiagonal();
  b.T22 = b.eigvals.tail(m).asDiagonal();
  b.T12 = Matrix::Zero(K, m);
  b.T21 = Matrix::Zero(m, K);
  const Matrix e = b.V.transpose() * E * b.V;
  b.E11 = e.topLeftCorner(K, K);
  b.E12 = e.topRightCorner(K, m);
  b.E21 = e.bottomLeftCorner(m, K);
  b.E22 = e.bottomRightCorner(m, m);
  return b;
}

Matrix sylvester_kronecker(const Matrix& T11, const Matrix& T22) {
  const Eigen::Index K = T11.rows(), m = T22.rows();
  if (T11.cols() != K || T22.cols() != m) throw ConfigError("sylvester: blocks must be square");
  // vec(T22 Y) = (I_K (x) T22) vec Y,  vec(Y T11) = (T11^T (x) I_m) vec Y
  Matrix s = Matrix::Zero(K * m, K * m);
  for (Eigen::Index j = 0; j < K; ++j) {
    s.block(j * m, j * m, m, m) += T22;
    for (Eigen::Index i = 0; i < K; ++i) {
      s.block(j * m, i * m, m, m).diagonal().array() -= T11(i, j);
    }
  }
  return s;
}

double sep(const Matrix& T11, const Matrix& T22) {
  const Eigen::Index K = T11.rows(), m = T22.rows();
  if (T11.cols() != K || T22.cols() != m || K == 0 || m == 0) {
    throw ConfigError("sep: blocks must be non-empty and square");
  }
  if (K * m <= kDenseSepLimit) return linalg::min_singular_value(sylvester_kronecker(T11, T22));
  if (K * m > kSepLimit || !is_diagonal(T11)) {
    throw ConfigError("sep: vectorized system too large (K*m = " + std::to_string(K * m) + ")");
  }
  // Diagonal T11 decouples the columns: sep = min_j sigma_min(T22 - t_j I).
  double best = std::numeric_limits<double>::infinity();
  if (is_diagonal(T22) || symmetry_defect(T22) == 0.0) {
    const Vector mu = is_diagonal(T22) ? Vector(T22.diagonal()) : linalg::symmetric_top(T22, m, 0).values;
    for (Eigen::Index j = 0; j < K; ++j) best = std::min(best, (mu.array() - T11(j, j)).abs().minCoeff());
    return best;
  }
  for (Eigen::Index j = 0; j < K; ++j) {
    Matrix shifted = T22;
    shifted.diagonal().array() -= T11(j, j);
    best = std::min(best, linalg::min_singular_value(shifted));
  }
  return best;
}

// ---------------------------------------------------------------- certificate

NewtonCertificate certify(const Matrix& T11, const Matrix& T22, const Matrix& E11, const Matrix& E12,
                          const Matrix& E21, const Matrix& E22) {
  const Eigen::Index K = T11.rows(), m = T22.rows();
  if (E11.rows() != K || E11.cols() != K || E12.rows() != K || E12.cols() != m || E21.rows() != m ||
      E21.cols() != K || E22.rows() != m || E22.cols() != m) {
    throw ConfigError("certify: blocks do not conform");
  }
  NewtonCertificate c;
  c.delta = sep(T11, T22);
  c.norm_E11 = E11.norm();
  c.norm_E12 = E12.norm();
  c.norm_E21 = E21.norm();
  c.norm_E22 = E22.norm();
  c.s_E = c.delta - c.norm_E22 - c.norm_E11;
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (c.delta > 0.0) {
    c.a = c.norm_E21 / c.delta;
    c.b = (c.norm_E22 + c.norm_E11) / c.delta;
    c.c = 2.0 * c.norm_E12 / c.delta;
  } else {
    c.a = c.b = c.c = inf;
  }
  c.b_below_one = c.b < 1.0;
  c.h = c.b_below_one ? c.a * c.c / ((1.0 - c.b) * (1.0 - c.b)) : inf;
  c.h_below_half = c.h < 0.5;
  c.s_E_positive = c.s_E > 0.0;
  c.product_below_quarter = c.s_E_positive && c.norm_E21 * c.norm_E12 / (c.s_E * c.s_E) < 0.25;
  if (c.passes()) c.r0 = 2.0 * c.a / ((1.0 - c.b) * (1.0 + std::sqrt(1.0 - 2.0 * c.h)));
  return c;
}

std::string NewtonCertificate::to_text() const {
  std::ostringstream out;
  auto put = [&](const char* key, double v) { out << key << '=' << text::format_double(v) << '\n'; };
  put("delta", delta);
  put("norm_E11", norm_E11);
  put("norm_E12", norm_E12);
  put("norm_E21", norm_E21);
  put("norm_E22", norm_E22);
  put("s_E", s_E);
  put("a", a);
  put("b", b);
  put("c", c);
  put("h", h);
  out << "r0=" << (r0 ? text::format_double(*r0) : std::string("undefined")) << '\n';
  out << "b_below_one=" << b_below_one << '\n'
      << "h_below_half=" << h_below_half << '\n'
      << "s_E_positive=" << s_E_positive << '\n'
      << "product_below_quarter=" << product_below_quarter << '\n'
      << "passes=" << passes() << '\n';
  return out.str();
}

// ---------------------------------------------------------------- Newton

double quadratic_residual(const BlockOperator& bl, const Matrix& Y) {
  const Matrix r = bl.E21 + (bl.T22 + bl.E22) * Y - Y * (bl.T11 + bl.E11) - Y * bl.E12 * Y;
  return r.norm();
}

NewtonResult newton_solve(const BlockOperator& bl, double tol, int max_iter) {
  NewtonResult out;
  out.certificate = certify(bl);
  if (!out.certificate.passes()) return out;
  const Eigen::Index K = bl.K, m = bl.m();
  if (m > kNewtonMaxM) throw ConfigError("newton_solve: m exceeds " + std::to_string(kNewtonMaxM));

  const Matrix A = bl.T22 + bl.E22;
  const Matrix B = bl.T11 + bl.E11;
  auto newton_step = [&](const Matrix& Y) -> Matrix {
    // f'(Y) dY = (A - Y E12) dY - dY (B + E12 Y), vectorized column-major.
    const Matrix F = bl.E21 + A * Y - Y * B - Y * bl.E12 * Y;
    const Matrix J = sylvester_kronecker(B + bl.E12 * Y, A - Y * bl.E12);
    Eigen::PartialPivLU<Matrix> lu(J);
    if (!(lu.rcond() > 1e-14)) throw NumericalError("newton_solve: singular Newton step");
    const Vector step = lu.solve(-Eigen::Map<const Vector>(F.data(), F.size()));
    return Y + Eigen::Map<const Matrix>(step.data(), m, K);
  };

  Matrix Y = Matrix::Zero(m, K);
  double res = quadratic_residual(bl, Y);
  int it = 0;
  while (res > tol) {
    if (it >= max_iter) {
      throw NumericalError("newton_solve: no convergence after " + std::to_string(max_iter) +
                           " iterations (residual " + text::format_double(res) + ")");
    }
    Y = newton_step(Y);
    res = quadratic_residual(bl, Y);
    ++it;
  }
  // The residual test leaves Y accurate to about tol / delta. Quadratic
  // convergence means one or two more steps reach working precision; keep a
  // step only if it lowers the residual.
  for (int polish = 0; polish < 2 && res > 0.0 && it < max_iter; ++polish) {
    Matrix next = newton_step(Y);
    const double next_res = quadratic_residual(bl, next);
    if (!(next_res < res)) break;
    Y = std::move(next);
    res = next_res;
    ++it;
  }
  out.Y = std::move(Y);
  out.iterations = it;
  out.residual = res;
  return out;
}

double verify_invariance(const BlockOperator& bl, const Matrix& Y) {
  const Matrix Tt = bl.T + bl.E;
  const Matrix W0 = bl.V1() + bl.V2() * Y;
  const Matrix right = (bl.T11 + bl.E11) + (bl.T12 + bl.E12) * Y;
  return (Tt * W0 - W0 * right).norm();
}

// ---------------------------------------------------------------- location

bool EigenvalueLocation::all_contained() const {
  return std::all_of(contained.begin(), contained.end(), [](bool b) { return b; });
}

EigenvalueLocation eigenvalue_location(const BlockOperator& bl, const Matrix& Y) {
  EigenvalueLocation loc;
  const Matrix pert = bl.E11 + bl.E12 * Y;
  const Matrix M = bl.T11 + pert;
  loc.radius = linalg::spectral_norm(pert);
  Eigen::EigenSolver<Matrix> es(M, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue_location: eigensolver failed");
  const Vector t = bl.T11.diagonal();
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const std::complex<double> z = es.eigenvalues()(i);
    if (std::abs(z.imag()) > 1e-10) loc.real_spectrum = false;
    double d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < t.size(); ++j) d = std::min(d, std::abs(z - t(j)));
    loc.eigenvalues.push_back(z);
    loc.distances.push_back(d);
    // rounding slack of a few ulps of the operands
    loc.contained.push_back(d <= loc.radius + 1e-14 * (1.0 + t.cwiseAbs().maxCoeff()));
  }
  return loc;
}

// ---------------------------------------------------------------- contour

double ContourSpec::perturbation_bound() const {
  return eta * eta / (eta + length() / (2.0 * std::numbers::pi));
}

double ContourSpec::boundary_distance(std::complex<double> z) const {
  const double x = z.real(), y = z.imag();
  const bool inside = x >= re_min && x <= re_max && std::abs(y) <= im_max;
  if (inside) return std::min({x - re_min, re_max - x, im_max - y, y + im_max});
  const double dx = std::max({re_min - x, 0.0, x - re_max});
  const double dy = std::max({-im_max - y, 0.0, y - im_max});
  return std::hypot(dx, dy);
}

bool ContourSpec::strictly_inside(std::complex<double> z) const {
  return z.real() > re_min && z.real() < re_max && std::abs(z.imag()) < im_max;
}

ContourSpec make_contour(const Matrix& T, Eigen::Index K, int samples) {
  require_symmetric(T, "make_contour");
  const Eigen::Index N = T.rows();
  if (K < 1 || K >= N) throw ConfigError("make_contour: need 1 <= K < N");
  if (samples < 4) throw ConfigError("make_contour: need at least 4 boundary samples");
  const Vector lambda = linalg::symmetric_top(T, N, 0).values;
  if (!(lambda(K - 1) > lambda(K))) throw ConfigError("make_contour: no gap at K");

  ContourSpec c;
  c.re_min = 0.5 * (lambda(K - 1) + lambda(K));
  c.re_max = lambda.cwiseAbs().maxCoeff() + 1.0;
  c.im_max = 1.0;
  // Symmetric T: |(zI - T)^{-1}| = 1 / dist(z, sigma(T)).
  c.eta = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < N; ++i) c.eta = std::min(c.eta, c.boundary_distance(lambda(i)));

  const double w = c.re_max - c.re_min, hgt = 2.0 * c.im_max, perim = 2.0 * (w + hgt);
  c.eta_sampled = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    double t = perim * s / samples;
    std::complex<double> z;
    if (t < w) {
      z = {c.re_min + t, -c.im_max};
    } else if ((t -= w) < hgt) {
      z = {c.re_max, -c.im_max + t};
    } else if ((t -= hgt) < w) {
      z = {c.re_max - t, c.im_max};
    } else {
      t -= w;
      z = {c.re_min, c.im_max - t};
    }
    double d = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < N; ++i) d = std::min(d, std::abs(z - lambda(i)));
    c.eta_sampled = std::min(c.eta_sampled, d);
  }
  if (!(c.eta > 0.0)) throw NumericalError("make_contour: eta is zero");
  return c;
}

int count_in_contour(const Matrix& A, const ContourSpec& contour) {
  if (A.rows() != A.cols()) throw ConfigError("count_in_contour: need a square matrix");
  Eigen::EigenSolver<Matrix> es(A, false);
  if (es.info() != Eigen::Success) throw NumericalError("count_in_contour: eigensolver failed");
  int count = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const std::complex<double> z = es.eigenvalues()(i);
    if (contour.boundary_distance(z) < 1e-9) {
      throw NumericalError("count_in_contour: eigenvalue on the contour");
    }
    if (contour.strictly_inside(z)) ++count;
  }
  return count;
}

// ---------------------------------------------------------------- orthonormalization

Orthonormalized orthonormalize(const Matrix& V1, const Matrix& V2, const Matrix& Y) {
  const Eigen::Index K = V1.cols();
  if (V2.cols() != Y.rows() || Y.cols() != K || V1.rows() != V2.rows()) {
    throw ConfigError("orthonormalize: blocks do not conform");
  }
  Orthonormalized o;
  o.norm_Y = linalg::spectral_norm(Y);
  if (!(o.norm_Y < 1.0)) throw ConfigError("orthonormalize: need |Y|_2 < 1");

  Eigen::SelfAdjointEigenSolver<Matrix> es(Y.transpose() * Y);
  if (es.info() != Eigen::Success) throw NumericalError("orthonormalize: eigensolver failed");
  // Y^T Y is PSD; clamp rounding negatives so (1 + mu)^{-1/2} <= 1 holds exactly.
  const Vector mu = es.eigenvalues().cwiseMax(0.0);
  const Vector s = (1.0 + mu.array()).sqrt().inverse().matrix();
  const Matrix& U = es.eigenvectors();
  const Matrix S = U * s.asDiagonal() * U.transpose();
  o.W = (V1 + V2 * Y) * S;
  o.norm_inv_sqrt = s.maxCoeff();
  o.norm_I_minus = (1.0 - s.array()).maxCoeff();
  o.bound_inv_sqrt = o.norm_inv_sqrt <= 1.0;
  o.bound_I_minus = o.norm_I_minus <= o.norm_Y;
  return o;
}

// ---------------------------------------------------------------- constants

TheoremConstants theorem_constants(const ConstantInputs& in) {
  if (!(in.delta > 0.0)) throw ConfigError("theorem_constants: delta must be positive");
  if (!(in.eta > 0.0)) throw ConfigError("theorem_constants: eta must be positive");
  if (!(in.C_H > 0.0)) throw ConfigError("theorem_constants: C_H must be positive");
  TheoremConstants c;
  c.C3 = std::max({in.C_H, 1.0 + in.C_H * in.V1_2toH, in.V1_2toH * (1.0 + in.C_H * in.V1_2toH)});
  const double contour_term = c.C3 * in.eta * in.eta / (in.eta + in.contour_length / (2.0 * std::numbers::pi));
  c.C1 = std::min({in.eigengap / 8.0, 0.5, in.delta / 4.0, in.delta / (4.0 * in.C_H), contour_term}) / c.C3;
  c.C2 = 4.0 * c.C3 * in.C_H * (in.V1_2toinf + 1.0) / in.delta;
  return c;
}

ConstantInputs euclidean_constant_inputs(const BlockOperator& bl, const ContourSpec& contour) {
  ConstantInputs in;
  in.eigengap = bl.eigengap();
  in.delta = sep(bl.T11, bl.T22);
  in.eta = contour.eta;
  in.contour_length = contour.length();
  in.C_H = 1.0;
  in.V1_2toH = 1.0;
  in.V1_2toinf = linalg::norm_2inf(bl.V1());
  return in;
}

}  // namespace speclab::nk
