#include "speclab/laplacian.hpp"
#include "speclab/linalg.hpp"
#include "speclab/population.hpp"

#include "../support/helpers.hpp"
#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace speclab;
using testing::points_1d;
using testing::shared;

TEST_SUITE("laplacian_embed") {

TEST_CASE("normalized Laplacian examples") {
  SUBCASE("constant kernel, n = 4") {
    const LaplacianMatrix lap = normalized_laplacian(kernel_matrix(points_1d({0.1, 0.4, 0.6, 0.9}), testing::constant(1.0)));
    CHECK((lap.L.array() - 0.25).abs().maxCoeff() <= 1e-15);
    const EigenSystem es = eigensystem(lap, 4);
    CHECK(es.eigvals(0) == doctest::Approx(1.0).epsilon(1e-14));
    for (int k = 1; k < 4; ++k) CHECK(std::abs(es.eigvals(k)) <= 1e-14);
  }
  SUBCASE("n = 1") {
    const LaplacianMatrix lap = normalized_laplacian(kernel_matrix(points_1d({0.3}), testing::gaussian(0.3, 0.1)));
    CHECK(lap.L(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("gaussian bw = 1 on {0, 1}") {
    const LaplacianMatrix lap = normalized_laplacian(kernel_matrix(points_1d({0.0, 1.0}), testing::gaussian(1.0, 0.0)));
    const double e = std::exp(-1.0);
    // by hand: d_1 = d_2 = (1+e)/2, L = [[1, e], [e, 1]] / (1 + e)
    CHECK(lap.L(0, 0) == doctest::Approx(1.0 / (1.0 + e)));
    CHECK(lap.L(0, 1) == doctest::Approx(e / (1.0 + e)));
    const EigenSystem es = eigensystem(lap, 2);
    CHECK(es.eigvals(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(es.eigvals(1) == doctest::Approx((1.0 - e) / (1.0 + e)).epsilon(1e-14));
  }
}

TEST_CASE("eigensystem examples and preconditions") {
  const auto s = points_1d({0.1, 0.4, 0.6, 0.9});
  const LaplacianMatrix lap = normalized_laplacian(kernel_matrix(s, testing::constant(1.0)));
  const EigenSystem es = eigensystem(lap, 1);
  CHECK(es.eigvals(0) == doctest::Approx(1.0));
  CHECK((es.eigvecs.col(0).array() - 1.0).abs().maxCoeff() <= 1e-14);
  CHECK(es.eigengap == doctest::Approx(1.0));
  CHECK_THROWS_AS(eigensystem(lap, 5), ConfigError);
  CHECK_THROWS_AS(eigensystem(lap, 0), ConfigError);
  CHECK(std::isnan(eigensystem(lap, 4).eigengap));
}

TEST_CASE("full spectrum satisfies the trace identity") {
  const SampleSet s = DensitySpec::uniform(DomainBox::unit(1)).sample(40, 8);
  const LaplacianMatrix lap = normalized_laplacian(kernel_matrix(s, testing::gaussian(0.3, 0.1)));
  const EigenSystem es = eigensystem(lap, 40);
  CHECK(std::abs(es.eigvals.sum() - lap.L.trace()) <= 1e-9);
}

TEST_CASE("random 5-point instance matches an independent Jacobi eigensolver") {
  const SampleSet s = DensitySpec::uniform(DomainBox::unit(1)).sample(5, 21);
  const LaplacianMatrix lap = normalized_laplacian(kernel_matrix(s, testing::gaussian(0.2, 0.1)));
  const EigenSystem es = eigensystem(lap, 5);
  const oracle::Eig ref = oracle::jacobi_eigen(lap.L);
  for (int k = 0; k < 5; ++k) {
    CHECK(std::abs(es.eigvals(k) - ref.values(k)) <= 1e-8);
    const Eigen::VectorXd v = oracle::sign_fixed(ref.vectors.col(k) * std::sqrt(5.0));
    CHECK((es.eigvecs.col(k) - v).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("Laplacian and eigensystem invariants on a seeded sample") {
  const auto s = shared(DensitySpec::uniform(DomainBox::unit(1)).sample(120, 4));
  const KernelSpec k = testing::gaussian(0.3, 0.1);
  const LaplacianMatrix lap = normalized_laplacian(kernel_matrix(*s, k));
  CHECK((lap.L.array() == lap.L.transpose().array()).all());
  const EigenSystem full = eigensystem(lap, s->n());
  CHECK(full.eigvals(s->n() - 1) >= -1e-10);
  CHECK(std::abs(full.eigvals(0) - 1.0) <= 1e-10);
  const Eigen::VectorXd root_d = lap.degrees.cwiseSqrt().normalized();
  CHECK((lap.L * root_d - root_d).norm() <= 1e-10);

  const EigenSystem es = eigensystem(lap, 3);
  const double n = static_cast<double>(s->n());
  for (int j = 0; j < 3; ++j) {
    CHECK((lap.L * es.eigvecs.col(j) - es.eigvals(j) * es.eigvecs.col(j)).norm() <= 1e-9 * std::sqrt(n));
  }
  const Matrix gram = es.eigvecs.transpose() * es.eigvecs / n;
  CHECK((gram - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("Nystrom extension: constant kernel gives f = 1") {
  const auto s = shared(points_1d({0.1, 0.4, 0.6, 0.9}));
  const LaplacianFit fit = fit_laplacian_embedding(s, testing::constant(1.0), 1);
  const PointMatrix grid = make_eval_grid(DomainBox::unit(1), 11);
  CHECK((fit.embedding.evaluate(grid).array() - 1.0).abs().maxCoeff() <= 1e-14);
  const double x[] = {0.77};
  CHECK(sample_embedding(fit.embedding, Point(x))(0) == doctest::Approx(1.0));
  // lambda_2 = 0: extension rejected
  const EigenSystem es = eigensystem(fit.laplacian, 2);
  const DegreeVector d = degree(s, testing::constant(1.0));
  CHECK_THROWS_AS(nystrom_extend(es, 1, s, testing::constant(1.0), d), ConfigError);
}

TEST_CASE("Nystrom extension: two-point gaussian instance by hand") {
  const auto s = shared(points_1d({0.0, 1.0}));
  const KernelSpec k = testing::gaussian(1.0, 0.0);
  const LaplacianFit fit = fit_laplacian_embedding(s, k, 2);
  const double e = std::exp(-1.0);
  const double lambda2 = (1.0 - e) / (1.0 + e);
  const double d = (1.0 + e) / 2.0;
  // v_1 = (1, 1), v_2 = (1, -1) under the sqrt(n) normalization and sign convention
  CHECK(fit.eigensystem.eigvecs(0, 1) == doctest::Approx(1.0));
  CHECK(fit.eigensystem.eigvecs(1, 1) == doctest::Approx(-1.0));

  auto kk = [](double a, double b) { return std::exp(-(a - b) * (a - b)); };
  for (double x : {0.25, 0.5, 0.8}) {
    const double dx = (kk(x, 0.0) + kk(x, 1.0)) / 2.0;
    const double f1 = (kk(x, 0.0) + kk(x, 1.0)) / (2.0 * 1.0 * std::sqrt(dx * d));
    const double f2 = (kk(x, 0.0) - kk(x, 1.0)) / (2.0 * lambda2 * std::sqrt(dx * d));
    const double px[] = {x};
    const Eigen::VectorXd psi = sample_embedding(fit.embedding, Point(px));
    CHECK(psi(0) == doctest::Approx(f1).epsilon(1e-13));
    CHECK(std::abs(psi(1) - f2) <= 1e-13);
  }
}

TEST_CASE("Nystrom extension: restriction identity, norm and probe residual") {
  const auto s = shared(DensitySpec::uniform(DomainBox::unit(1)).sample(300, 12));
  const KernelSpec k = testing::gaussian(0.3, 0.1);
  const LaplacianFit fit = fit_laplacian_embedding(s, k, 3);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(fit.embedding[j].restriction_residual() <= 1e-10);
    CHECK(std::abs(fit.embedding[j].empirical_norm() - 1.0) <= 1e-10);
    CHECK(fit.embedding[j].probe_residual() <= kProbeTolerance);
  }
  // row i of V at X_i
  const Matrix at_samples = fit.embedding.evaluate(s->points);
  CHECK((at_samples - fit.eigensystem.eigvecs).cwiseAbs().maxCoeff() <= 1e-10);
  for (Eigen::Index i : {0, 17, 299}) {
    const Eigen::VectorXd psi = sample_embedding(fit.embedding, (*s)[i]);
    CHECK((psi - fit.eigensystem.eigvecs.row(i).transpose()).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("out-of-sample values equal a termwise recomputation") {
  const auto s = shared(DensitySpec::uniform(DomainBox::unit(1)).sample(50, 77));
  const KernelSpec k = testing::gaussian(0.3, 0.1);
  const LaplacianFit fit = fit_laplacian_embedding(s, k, 2);
  const double n = 50.0;
  for (double x : {0.013, 0.5, 0.999}) {
    double dx = 0.0;
    for (Eigen::Index i = 0; i < s->n(); ++i) dx += (0.1 + std::exp(-std::pow(x - s->points(i, 0), 2) / 0.3)) / n;
    const double px[] = {x};
    const Eigen::VectorXd psi = sample_embedding(fit.embedding, Point(px));
    for (int j = 0; j < 2; ++j) {
      double f = 0.0;
      for (Eigen::Index i = 0; i < s->n(); ++i) {
        const double kxi = 0.1 + std::exp(-std::pow(x - s->points(i, 0), 2) / 0.3);
        f += kxi / std::sqrt(dx * fit.laplacian.degrees(i)) * fit.eigensystem.eigvecs(i, j);
      }
      f /= fit.eigensystem.eigvals(j) * n;
      CHECK(std::abs(psi(j) - f) <= 1e-12);
    }
  }
}

TEST_CASE("probe eigenfunction restricts to an eigenvector of L_n") {
  const auto s = shared(DensitySpec::uniform(DomainBox::unit(1)).sample(80, 5));
  const KernelSpec k = testing::gaussian(0.3, 0.1);
  const LaplacianFit fit = fit_laplacian_embedding(s, k, 2);
  const Eigen::VectorXd r = fit.embedding[1].evaluate(s->points);  // restriction of f_2
  const double lambda = fit.eigensystem.eigvals(1);
  CHECK((fit.laplacian.L * r - lambda * r).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("embedding CSV export") {
  const auto path = std::filesystem::temp_directory_path() / "speclab_embedding.csv";
  PointMatrix p(2, 1);
  p << 0.0, 1.0;
  Matrix v(2, 2);
  v << 1.0, 2.0, 3.0, 4.0;
  write_embedding_csv(path, p, v);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "x0,psi1,psi2");
  CHECK(row == "0,1,2");
  std::filesystem::remove(path);
}

}  // TEST_SUITE
