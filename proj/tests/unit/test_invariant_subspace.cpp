#include "speclab/alignment.hpp"
#include "speclab/experiments.hpp"
#include "speclab/invariant_subspace.hpp"
#include "speclab/linalg.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace speclab;
using namespace speclab::nk;

namespace {

// Blocks for T = diag(t11, t22) in the standard basis with the given E entries.
BlockOperator scalar_blocks(double t11, double t22, double e11, double e12, double e21, double e22) {
  BlockOperator b;
  b.K = 1;
  b.T = Matrix{{t11, 0.0}, {0.0, t22}};
  b.E = Matrix{{e11, e12}, {e21, e22}};
  b.V = Matrix::Identity(2, 2);
  b.eigvals = Eigen::Vector2d(t11, t22);
  b.T11 = Matrix::Constant(1, 1, t11);
  b.T22 = Matrix::Constant(1, 1, t22);
  b.T12 = b.T21 = Matrix::Zero(1, 1);
  b.E11 = Matrix::Constant(1, 1, e11);
  b.E12 = Matrix::Constant(1, 1, e12);
  b.E21 = Matrix::Constant(1, 1, e21);
  b.E22 = Matrix::Constant(1, 1, e22);
  return b;
}

Matrix random_perturbation(Eigen::Index n, double frob, SplitMix64& rng) {
  Matrix e = linalg::random_symmetric(n, rng);
  return e * (frob / e.norm());
}

}  // namespace

TEST_SUITE("invariant_subspace") {

TEST_CASE("block partition examples") {
  SUBCASE("E = 0") {
    SplitMix64 rng(1);
    const Matrix T = random_gapped_symmetric(6, 2, 0.2, rng);
    const BlockOperator b = block_partition(T, Matrix::Zero(6, 6), 2);
    CHECK(b.E11.norm() == 0.0);
    CHECK(b.E12.norm() == 0.0);
    CHECK(b.E21.norm() == 0.0);
    CHECK(b.E22.norm() == 0.0);
  }
  SUBCASE("T = diag(2, 1)") {
    const BlockOperator b = block_partition(Matrix{{2.0, 0.0}, {0.0, 1.0}}, Matrix::Zero(2, 2), 1);
    CHECK(b.T11(0, 0) == doctest::Approx(2.0));
    CHECK(b.T22(0, 0) == doctest::Approx(1.0));
    CHECK(b.T12(0, 0) == 0.0);
    CHECK(b.T21(0, 0) == 0.0);
  }
  SUBCASE("random symmetric 6x6 round trip") {
    SplitMix64 rng(2);
    const Matrix T = random_gapped_symmetric(6, 2, 0.3, rng);
    const BlockOperator b = block_partition(T, Matrix::Zero(6, 6), 2);
    Matrix blocks(6, 6);
    blocks << b.T11, b.T12, b.T21, b.T22;
    CHECK((b.V * blocks * b.V.transpose() - T).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("gap below floor") {
    CHECK_THROWS_AS(block_partition(Matrix{{1.0, 0.0}, {0.0, 1.0}}, Matrix::Zero(2, 2), 1), ConfigError);
    CHECK_THROWS_AS(block_partition(Matrix{{1.0, 2.0}, {0.0, 1.0}}, Matrix::Zero(2, 2), 1), ConfigError);
  }
}

TEST_CASE("sep examples") {
  CHECK(sep(Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 1.0)) == doctest::Approx(1.0));
  const Matrix T11 = Eigen::Vector2d(3.0, 2.0).asDiagonal();
  const Matrix T22 = Eigen::Vector2d(1.0, 0.5).asDiagonal();
  CHECK(sep(T11, T22) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(oracle::sigma_min(oracle::sylvester_matrix(T11, T22)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Kronecker form matches the textbook identity") {
  SplitMix64 rng(3);
  const Matrix T11 = linalg::random_gaussian(3, 3, rng), T22 = linalg::random_gaussian(4, 4, rng);
  CHECK((sylvester_kronecker(T11, T22) - oracle::sylvester_matrix(T11, T22)).cwiseAbs().maxCoeff() <= 1e-15);
  // and it really is the map Y -> T22 Y - Y T11
  const Matrix Y = linalg::random_gaussian(4, 3, rng);
  const Matrix direct = T22 * Y - Y * T11;
  const Eigen::VectorXd vec = sylvester_kronecker(T11, T22) * Eigen::Map<const Eigen::VectorXd>(Y.data(), 12);
  CHECK((Eigen::Map<const Eigen::VectorXd>(direct.data(), 12) - vec).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("sep recovers the eigengap for symmetric T22") {
  SplitMix64 rng(4);
  for (int t = 0; t < 20; ++t) {
    // eigenvalues of T22 at most 0.9, T11 = diag(1.0, 1.3)
    Eigen::VectorXd mu(5);
    for (int i = 0; i < 5; ++i) mu(i) = rng.uniform(-0.5, 0.9);
    mu(0) = 0.9;
    const Matrix U = linalg::random_orthogonal(5, rng);
    const Matrix T22 = U * mu.asDiagonal() * U.transpose();
    const Matrix T11 = Eigen::Vector2d(1.0, 1.3).asDiagonal();
    const double s = sep(T11, T22);
    CHECK(s >= 0.1 - 1e-12);
    CHECK(std::abs(s - oracle::sigma_min(oracle::sylvester_matrix(T11, T22))) <= 1e-8);
  }
}

TEST_CASE("sep above the dense limit uses the column route") {
  SplitMix64 rng(5);
  Eigen::VectorXd t(3), mu(600);
  for (int i = 0; i < 3; ++i) t(i) = rng.uniform(1.0, 2.0);
  for (int i = 0; i < 600; ++i) mu(i) = rng.uniform(0.0, 0.95);
  const double expected = [&] {
    double best = 1e300;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 600; ++j) best = std::min(best, std::abs(t(i) - mu(j)));
    return best;
  }();
  CHECK(std::abs(sep(t.asDiagonal(), mu.asDiagonal()) - expected) <= 1e-14);
  const Matrix U = linalg::random_orthogonal(600, rng);
  const Matrix T22 = U * mu.asDiagonal() * U.transpose();
  CHECK(std::abs(sep(t.asDiagonal(), 0.5 * (T22 + T22.transpose())) - expected) <= 1e-10);
  CHECK_THROWS_AS(sep(linalg::random_gaussian(3, 3, rng), mu.asDiagonal()), ConfigError);
}

TEST_CASE("certificate quantities follow their definitions") {
  const BlockOperator b = scalar_blocks(2.0, 1.0, 0.01, 0.02, 0.03, 0.04);
  const NewtonCertificate c = certify(b);
  CHECK(c.delta == doctest::Approx(1.0));
  CHECK(c.s_E == doctest::Approx(1.0 - 0.04 - 0.01));
  CHECK(c.a == doctest::Approx(0.03));
  CHECK(c.b == doctest::Approx(0.05));
  CHECK(c.c == doctest::Approx(0.04));
  CHECK(c.h == doctest::Approx(0.03 * 0.04 / (0.95 * 0.95)));
  REQUIRE(c.r0.has_value());
  CHECK(*c.r0 == doctest::Approx(2 * 0.03 / (0.95 * (1 + std::sqrt(1 - 2 * c.h)))));
  CHECK(c.passes());
  CHECK(c.to_text().find("passes=1") != std::string::npos);

  const NewtonCertificate bad = certify(scalar_blocks(2.0, 1.0, 0.6, 0.0, 0.1, 0.6));
  CHECK_FALSE(bad.b_below_one);
  CHECK_FALSE(bad.s_E_positive);
  CHECK_FALSE(bad.r0.has_value());
  const NewtonResult r = newton_solve(scalar_blocks(2.0, 1.0, 0.6, 0.0, 0.1, 0.6));
  CHECK_FALSE(r.Y.has_value());
}

TEST_CASE("Newton solve: E = 0 gives Y = 0") {
  SplitMix64 rng(6);
  const BlockOperator b = block_partition(random_gapped_symmetric(6, 2, 0.3, rng), Matrix::Zero(6, 6), 2);
  const NewtonResult r = newton_solve(b);
  REQUIRE(r.Y.has_value());
  CHECK(r.Y->norm() == 0.0);
  CHECK(r.residual == 0.0);
  CHECK(verify_invariance(b, *r.Y) <= 1e-14);
  const EigenvalueLocation loc = eigenvalue_location(b, *r.Y);
  CHECK(loc.all_contained());
  for (double d : loc.distances) CHECK(d <= 1e-15);
}

TEST_CASE("Newton solve: scalar closed forms") {
  const double eps = 1e-3;
  SUBCASE("linear case") {
    const BlockOperator b = scalar_blocks(2.0, 1.0, 0.0, 0.0, eps, 0.0);
    const NewtonResult r = newton_solve(b);
    REQUIRE(r.Y.has_value());
    CHECK(std::abs((*r.Y)(0, 0) - eps) <= 1e-14);
    CHECK(verify_invariance(b, *r.Y) <= 1e-12);
  }
  SUBCASE("quadratic case") {
    const double e12 = 0.2;
    const BlockOperator b = scalar_blocks(2.0, 1.0, 0.0, e12, eps, 0.0);
    const NewtonResult r = newton_solve(b);
    REQUIRE(r.Y.has_value());
    const double y = (-1.0 + std::sqrt(1.0 + 4.0 * e12 * eps)) / (2.0 * e12);
    CHECK(std::abs((*r.Y)(0, 0) - y) <= 1e-14);
    CHECK(std::abs(y) <= r.certificate.y_bound());
    CHECK(verify_invariance(b, *r.Y) <= 1e-12);
    const EigenvalueLocation loc = eigenvalue_location(b, *r.Y);
    CHECK(loc.real_spectrum);
    // T11 + E12 Y = 2 + e12 y
    CHECK(std::abs(loc.eigenvalues[0].real() - (2.0 + e12 * y)) <= 1e-14);
    CHECK(loc.all_contained());
  }
}

TEST_CASE("Newton solve: random instances inside the certificate") {
  SplitMix64 rng(7);
  int solved = 0;
  for (int t = 0; t < 40; ++t) {
    const Eigen::Index n = 8, K = 1 + t % 3;
    const Matrix T = random_gapped_symmetric(n, K, 0.3, rng);
    const BlockOperator b = block_partition(T, random_perturbation(n, rng.uniform(1e-4, 0.1), rng), K);
    const NewtonResult r = newton_solve(b);
    if (!r.Y) continue;
    ++solved;
    CHECK(r.residual <= 1e-12);
    CHECK(r.iterations <= 30);
    CHECK(r.Y->norm() <= r.certificate.y_bound());
    CHECK(verify_invariance(b, *r.Y) <= 1e-10);
    CHECK(eigenvalue_location(b, *r.Y).all_contained());
  }
  CHECK(solved >= 30);
}

TEST_CASE("contour and eigenvalue counting") {
  SplitMix64 rng(8);
  const Matrix T = random_gapped_symmetric(10, 3, 0.3, rng);
  const ContourSpec c = make_contour(T, 3);
  CHECK(c.eta > 0.0);
  CHECK(c.eta_sampled >= c.eta - 1e-15);
  CHECK(c.length() == doctest::Approx(2 * (c.re_max - c.re_min) + 4));
  CHECK(count_in_contour(T, c) == 3);
  const Matrix E = random_perturbation(10, 1.0, rng);
  const double op = linalg::spectral_norm(E);
  const Matrix Tt = T + E * (0.99 * c.perturbation_bound() / op);
  CHECK(count_in_contour(Tt, c) == 3);
  // exact eta: distance from the spectrum to the rectangle
  const Eigen::VectorXd lambda = linalg::symmetric_full(T).values;
  double eta = 1e300;
  for (int i = 0; i < 10; ++i) {
    const double x = lambda(i);
    const double d = (x > c.re_min && x < c.re_max) ? std::min({x - c.re_min, c.re_max - x, 1.0})
                                                    : (x <= c.re_min ? c.re_min - x : x - c.re_max);
    eta = std::min(eta, d);
  }
  CHECK(c.eta == doctest::Approx(eta).epsilon(1e-14));
  // an eigenvalue on the boundary
  Matrix on = Matrix::Zero(2, 2);
  on(0, 0) = c.re_min;
  CHECK_THROWS_AS(count_in_contour(on, c), NumericalError);
}

TEST_CASE("orthonormalization") {
  SplitMix64 rng(9);
  const Matrix V = linalg::random_orthogonal(7, rng);
  const Matrix V1 = V.leftCols(2), V2 = V.rightCols(5);
  SUBCASE("Y = 0") {
    const Orthonormalized o = orthonormalize(V1, V2, Matrix::Zero(5, 2));
    CHECK((o.W - V1).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("scalar Y") {
    const Matrix W = Matrix::Identity(2, 2);
    const double y = 0.4;
    const Orthonormalized o = orthonormalize(W.col(0), W.col(1), Matrix::Constant(1, 1, y));
    CHECK(o.W(0, 0) == doctest::Approx(1.0 / std::sqrt(1 + y * y)));
    CHECK(o.W(1, 0) == doctest::Approx(y / std::sqrt(1 + y * y)));
  }
  SUBCASE("random Y with |Y| = 0.5") {
    Matrix Y = linalg::random_gaussian(5, 2, rng);
    Y *= 0.5 / linalg::spectral_norm(Y);
    const Orthonormalized o = orthonormalize(V1, V2, Y);
    CHECK(o.bound_inv_sqrt);
    CHECK(o.bound_I_minus);
    CHECK((o.W.transpose() * o.W - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-12);
    // same range as V1 + V2 Y
    const Matrix W0 = V1 + V2 * Y;
    const Matrix proj = o.W * o.W.transpose();
    CHECK((proj * W0 - W0).cwiseAbs().maxCoeff() <= 1e-12);
    // independent norms
    const Matrix S = linalg::inverse_sqrt_spd(Matrix::Identity(2, 2) + Y.transpose() * Y);
    CHECK(o.norm_inv_sqrt == doctest::Approx(oracle::sigma_max(S)).epsilon(1e-12));
    CHECK(o.norm_I_minus == doctest::Approx(oracle::sigma_max(Matrix::Identity(2, 2) - S)).epsilon(1e-10));
  }
  SUBCASE("|Y| >= 1 rejected") {
    CHECK_THROWS_AS(orthonormalize(V1, V2, Matrix::Constant(5, 2, 1.0)), ConfigError);
  }
}

TEST_CASE("theorem constants") {
  ConstantInputs in;
  in.eigengap = 1.0;
  in.delta = 100.0;
  in.eta = 10.0;
  in.contour_length = 4.0;
  const TheoremConstants c = theorem_constants(in);
  CHECK(c.C3 == 2.0);
  CHECK(c.C2 == doctest::Approx(16.0 / 100.0));
  in.eigengap = 1e-4;
  CHECK(theorem_constants(in).C1 == doctest::Approx(1e-4 / 16.0));
  in.delta = 0.0;
  CHECK_THROWS_AS(theorem_constants(in), ConfigError);
  in.delta = 1.0;
  in.eta = 0.0;
  CHECK_THROWS_AS(theorem_constants(in), ConfigError);
}

TEST_CASE("end-to-end bound on a few instances") {
  SplitMix64 rng(10);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index n = 12, K = 2;
    const Matrix T = random_gapped_symmetric(n, K, 0.2, rng);
    const ContourSpec contour = make_contour(T, K);
    const BlockOperator b0 = block_partition(T, Matrix::Zero(n, n), K);
    const TheoremConstants c = theorem_constants(euclidean_constant_inputs(b0, contour));
    const Matrix E = random_perturbation(n, rng.uniform(0.0, 1.0) * c.C1, rng);
    const BlockOperator b = block_partition(T, E, K);
    const NewtonResult r = newton_solve(b);
    REQUIRE(r.Y.has_value());
    const Orthonormalized o = orthonormalize(b.V1(), b.V2(), *r.Y);
    const Matrix V1 = b.V1();
    const AlignmentResult al = procrustes_align(o.W.transpose() * V1);
    CHECK(uniform_error(V1, o.W, al.Q) <= c.C2 * E.norm());
  }
}

}  // TEST_SUITE
