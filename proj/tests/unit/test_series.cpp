#include "draformer/log.hpp"
#include "draformer/series.hpp"
#include "unit/test_util.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

using namespace draformer;
using draformer::testing::max_abs_diff;
using draformer::testing::random_matrix;

namespace {

Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Index>(v.size()), 1);
  Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

}  // namespace

TEST_CASE("make_windows count and boundaries") {
  const Matrix s100 = Matrix::Random(100, 2);
  const auto w = make_windows(s100, 96, 4, 1);
  REQUIRE(w.size() == 1);
  CHECK(w[0].origin == 0);

  const Matrix exact = Matrix::Random(10, 1);
  const auto e = make_windows(exact, 7, 3, 1);
  REQUIRE(e.size() == 1);
  CHECK(e[0].x == exact.topRows(7));
  CHECK(e[0].y == exact.bottomRows(3));

  CHECK_THROWS_AS(make_windows(Matrix(Matrix::Random(95, 1)), 96, 1, 1), InsufficientDataError);
  try {
    make_windows(Matrix(Matrix::Random(95, 1)), 96, 4, 1);
  } catch (const InsufficientDataError& err) {
    CHECK(std::string(err.what()).find("100") != std::string::npos);
  }

  const auto strided = make_windows(Matrix(Matrix::Random(50, 1)), 10, 5, 4);
  CHECK(strided.size() == static_cast<std::size_t>((50 - 15) / 4 + 1));
  for (std::size_t i = 0; i < strided.size(); ++i) CHECK(strided[i].origin == static_cast<Index>(4 * i));
}

TEST_CASE("difference examples") {
  const DiffTriple a = difference(column({1, 3, 2}));
  CHECK(a.d_fwd == column({2, -1, 0}));
  CHECK(a.d_bwd == column({0, 2, -1}));

  const DiffTriple c = difference(Matrix(Matrix::Constant(5, 3, 4.2)));
  CHECK(c.d_fwd.isZero(0.0));
  CHECK(c.d_bwd.isZero(0.0));

  const DiffTriple r = difference(column({0, 1, 2, 3}));
  CHECK(r.d_fwd == column({1, 1, 1, 0}));
  CHECK(r.d_bwd == column({0, 1, 1, 1}));

  CHECK_THROWS_AS(difference(column({1})), InsufficientDataError);
}

TEST_CASE("difference identities hold exactly on random series") {
  // Values on a 1/64 grid keep every sum and difference exactly representable,
  // so the identities can be checked with operator==.
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const Index L = 2 + trial % 20;
    const Matrix x = (random_matrix(rng, L, 1 + trial % 4) * 64.0).array().round() / 64.0;
    const DiffTriple d = difference(x);
    for (Index t = 0; t + 1 < L; ++t) CHECK(d.d_fwd.row(t) == d.d_bwd.row(t + 1));

    const DiffTriple shifted = difference(Matrix(x.array() + 17.25));
    CHECK(shifted.d_fwd == d.d_fwd);
    CHECK(shifted.d_bwd == d.d_bwd);

    Matrix acc = x.row(0);
    for (Index t = 1; t < L; ++t) {
      acc += d.d_bwd.row(t);
      CHECK(acc == x.row(t));
    }
  }
}

TEST_CASE("estimate_covariance examples") {
  const DiffTriple c = difference(Matrix(Matrix::Constant(6, 2, 3.0)));
  const CovarianceContext zero = estimate_covariance(c.d_fwd, c.d_bwd, 0.01);
  CHECK(zero.sigma.isZero(0.0));
  CHECK(max_abs_diff(zero.sigma_inv_reg, 100.0 * Matrix::Identity(2, 2)) < 1e-10);

  const DiffTriple d = difference(column({1, 3, 2}));
  const CovarianceContext one = estimate_covariance(d.d_fwd, d.d_bwd, 0.01);
  // Pooled samples {2, -1, 0, 0, 2, -1}: mean 1/3, sum of squared deviations 84/9.
  CHECK(one.sigma(0, 0) == doctest::Approx(28.0 / 15.0).epsilon(1e-14));
  CHECK(one.sigma_inv_reg(0, 0) == doctest::Approx(1.0 / (28.0 / 15.0 + 0.01)).epsilon(1e-12));

  std::mt19937_64 rng(8);
  const DiffTriple r = difference(random_matrix(rng, 12, 3));
  const CovarianceContext ab = estimate_covariance(r.d_fwd, r.d_bwd, 0.01);
  const CovarianceContext ba = estimate_covariance(r.d_bwd, r.d_fwd, 0.01);
  CHECK(max_abs_diff(ab.sigma, ba.sigma) < 1e-14);
}

TEST_CASE("estimate_covariance is positive semidefinite") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const DiffTriple d = difference(random_matrix(rng, 3 + trial % 10, 1 + trial % 5, 3.0));
    const CovarianceContext ctx = estimate_covariance(d.d_fwd, d.d_bwd, 0.01);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ctx.sigma);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("embed examples") {
  std::mt19937_64 rng(1);
  const DiffTriple d = difference(random_matrix(rng, 3, 2));
  Tape t;
  Var zero = t.constant(Matrix::Zero(2, 4));
  const EmbeddedTriple z = embed(t, d, zero, zero, zero);
  CHECK(z.ex_fwd.value().isZero(0.0));
  CHECK(z.ex_raw.value().isZero(0.0));

  Var id = t.constant(Matrix::Identity(2, 2));
  const EmbeddedTriple i = embed(t, d, id, id, id);
  CHECK(i.ex_raw.value() == d.raw);
  CHECK(i.ex_bwd.value() == d.d_bwd);

  const Matrix w = random_matrix(rng, 2, 4);
  Var wv = t.constant(w);
  const EmbeddedTriple e = embed(t, d, wv, wv, wv);
  CHECK(max_abs_diff(e.ex_fwd.value(), d.d_fwd * w) < 1e-15);

  CHECK_THROWS_AS(embed(t, d, t.constant(Matrix::Zero(3, 4)), wv, wv), DimensionError);
}

TEST_CASE("normalize examples") {
  NormStats s;
  s.mean = Vector::Constant(1, 5.0);
  s.scale = Vector::Constant(1, 2.0);
  CHECK(normalize(column({7}), s)(0, 0) == 1.0);
  CHECK(denormalize(column({1}), s)(0, 0) == 7.0);

  std::mt19937_64 rng(2);
  const Matrix raw = random_matrix(rng, 200, 3, 4.0);
  const NormStats fitted = fit_normalization(raw);
  const Matrix z = normalize(raw, fitted);
  const NormStats again = fit_normalization(z);
  CHECK(max_abs_diff(normalize(z, again), z) < 1e-12);
  CHECK(max_abs_diff(denormalize(z, fitted), raw) < 1e-12);

  Matrix with_constant = raw;
  with_constant.col(1).setConstant(3.0);
  log::WarningCapture capture;
  const NormStats cs = fit_normalization(with_constant, {"a", "b", "c"});
  CHECK(capture.contains("'b'"));
  CHECK(normalize(with_constant, cs).col(1).isZero(0.0));
}
