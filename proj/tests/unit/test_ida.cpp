#include "draformer/gradcheck.hpp"
#include "draformer/ida.hpp"
#include "oracle/convert.hpp"
#include "unit/test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace draformer;
using draformer::testing::max_abs_diff;
using draformer::testing::random_matrix;

namespace {

struct Fixture {
  Matrix x_raw;
  Matrix x_emb;
  Matrix w_sigma;
  Matrix w_v;
};

Fixture make_fixture(std::uint64_t seed, Index L, Index N, Index d) {
  std::mt19937_64 rng(seed);
  return Fixture{random_matrix(rng, L, N), random_matrix(rng, L, d), random_matrix(rng, N, 1, 0.5),
                 random_matrix(rng, d, d, 0.5)};
}

IdaScores run(Tape& t, const Fixture& f, double lambda = 0.01, IdaOptions opts = {}) {
  const DiffTriple tri = difference(f.x_raw);
  const CovarianceContext cov = estimate_covariance(tri.d_fwd, tri.d_bwd, lambda);
  IdaParams p{t.constant(f.w_sigma), t.constant(f.w_v)};
  return ida_forward(t, t.constant(f.x_emb), tri, cov, p, opts);
}

}  // namespace

TEST_CASE("mahalanobis_sq examples") {
  std::mt19937_64 rng(3);
  const Matrix a = random_matrix(rng, 4, 3);
  const Matrix eye = Matrix::Identity(3, 3);
  const Matrix same = mahalanobis_sq(a, a, eye);
  CHECK(same.diagonal().cwiseAbs().maxCoeff() < 1e-12);

  const Matrix b = random_matrix(rng, 4, 3);
  const Matrix euclid = mahalanobis_sq(a, b, eye);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) CHECK(euclid(i, j) == doctest::Approx((a.row(i) - b.row(j)).squaredNorm()).epsilon(1e-12));

  Matrix s(1, 1);
  s << 2.5;
  Matrix fa(1, 1), fb(1, 1);
  fa << 1.5;
  fb << -0.5;
  CHECK(mahalanobis_sq(fa, fb, s)(0, 0) == doctest::Approx(4.0 * 2.5));

  CHECK_THROWS_AS(mahalanobis_sq(a, Matrix(random_matrix(rng, 4, 2)), eye), DimensionError);
}

TEST_CASE("sigma_vector examples") {
  Tape t;
  const Matrix x = Matrix::Random(5, 3);
  const Matrix s0 = sigma_vector(t, x, t.constant(Matrix::Zero(3, 1))).value();
  for (Index i = 0; i < 5; ++i) CHECK(s0(i, 0) == doctest::Approx(std::log(2.0) + 1e-3).epsilon(1e-14));
  CHECK(s0(0, 0) == doctest::Approx(0.6941).epsilon(1e-4));

  Matrix row(1, 1);
  row << 1.0;
  CHECK(sigma_vector(t, row, t.constant(Matrix::Constant(1, 1, 50.0))).value()(0, 0) ==
        doctest::Approx(50.001).epsilon(1e-12));
  CHECK(sigma_vector(t, row, t.constant(Matrix::Constant(1, 1, -50.0))).value()(0, 0) ==
        doctest::Approx(1e-3).epsilon(1e-9));
}

TEST_CASE("ida_forward examples") {
  const Fixture f = make_fixture(5, 6, 2, 4);
  Tape t;
  const IdaScores s = run(t, f);
  for (Index i = 0; i < 6; ++i) {
    const double sigma = s.sigma.value()(i, 0);
    CHECK(s.kernel.value()(i, i) == doctest::Approx(1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma)).epsilon(1e-13));
  }

  Tape t1;
  Matrix one_raw = Matrix::Random(1, 2);
  Matrix one_emb = Matrix::Random(1, 4);
  IdaParams p{t1.constant(f.w_sigma), t1.constant(f.w_v)};
  const IdaScores single = ida_forward(t1, t1.constant(one_emb), one_raw, Matrix::Zero(1, 1), p);
  CHECK(single.weights.value()(0, 0) == 1.0);
  CHECK(max_abs_diff(single.output.value(), one_emb * f.w_v) < 1e-14);

  // Hand-set MD^2 and sigma on three steps, evaluated directly.
  Tape t3;
  Matrix md2(3, 3);
  md2 << 0.0, 0.5, 2.0, 0.25, 0.0, 1.0, 3.0, 0.75, 0.0;
  Matrix raw3 = Matrix::Ones(3, 1);
  Matrix ws(1, 1);
  ws << 0.0;
  Matrix emb3 = Matrix::Identity(3, 3);
  IdaParams p3{t3.constant(ws), t3.constant(Matrix::Identity(3, 3))};
  const IdaScores hand = ida_forward(t3, t3.constant(emb3), raw3, md2, p3);
  const double sigma = std::log(2.0) + 1e-3;
  for (Index i = 0; i < 3; ++i) {
    double expect[3];
    double total = 0.0;
    for (Index j = 0; j < 3; ++j) {
      const double dt = static_cast<double>(i - j);
      expect[j] = std::exp(std::exp(-dt * dt * md2(i, j) / (2 * sigma * sigma)) / (std::sqrt(2 * std::numbers::pi) * sigma));
      total += expect[j];
    }
    for (Index j = 0; j < 3; ++j) CHECK(hand.weights.value()(i, j) == doctest::Approx(expect[j] / total).epsilon(1e-13));
  }
}

TEST_CASE("ida_forward matches the scalar oracle") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Fixture f = make_fixture(100 + seed, 3, 2, 4);
    Tape t;
    const IdaScores s = run(t, f);
    const oracle::IdaResult r = oracle::ida(oracle::to_grid(f.x_raw), oracle::to_grid(f.x_emb), oracle::to_vec(f.w_sigma),
                                            oracle::to_grid(f.w_v), 0.01, 1e-3);
    CHECK(oracle::max_abs_diff(r.md2, s.md2) < 1e-10);
    CHECK(oracle::max_abs_diff(r.kernel, s.kernel.value()) < 1e-10);
    CHECK(oracle::max_abs_diff(r.output, s.output.value()) < 1e-10);
  }
}

TEST_CASE("ida weights are row-stochastic and md2 non-negative") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Fixture f = make_fixture(seed, 2 + static_cast<Index>(seed % 9), 1 + static_cast<Index>(seed % 4), 4);
    Tape t;
    const IdaScores s = run(t, f);
    CHECK(s.md2.minCoeff() >= -1e-10);
    const Vector sums = s.weights.value().rowwise().sum();
    CHECK((sums.array() - 1.0).abs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("ida kernel is local in the temporal distance") {
  Tape t;
  const Index L = 8;
  Matrix md2 = Matrix::Constant(L, L, 0.3);
  IdaParams p{t.constant(Matrix::Constant(1, 1, 0.2)), t.constant(Matrix::Identity(2, 2))};
  const IdaScores s = ida_forward(t, t.constant(Matrix::Zero(L, 2)), Matrix::Ones(L, 1), md2, p);
  for (Index i = 0; i < L; ++i)
    for (Index j = 0; j < L; ++j)
      for (Index k = 0; k < L; ++k)
        if (std::abs(i - j) < std::abs(i - k)) CHECK(s.kernel.value()(i, j) >= s.kernel.value()(i, k));
}

TEST_CASE("ida weights approach uniform as md2 vanishes") {
  Tape t;
  const Index L = 5;
  IdaParams p{t.constant(Matrix::Constant(1, 1, 0.4)), t.constant(Matrix::Identity(2, 2))};
  const IdaScores s = ida_forward(t, t.constant(Matrix::Zero(L, 2)), Matrix::Ones(L, 1), Matrix::Zero(L, L), p);
  CHECK(max_abs_diff(s.weights.value(), Matrix::Constant(L, L, 1.0 / L)) < 1e-15);
  const IdaScores tiny = ida_forward(t, t.constant(Matrix::Zero(L, 2)), Matrix::Ones(L, 1), Matrix::Constant(L, L, 1e-9), p);
  CHECK(max_abs_diff(tiny.weights.value(), Matrix::Constant(L, L, 1.0 / L)) < 1e-6);
}

TEST_CASE("ida gaussian prefactor scales the kernel before the softmax") {
  const Fixture f = make_fixture(300, 6, 3, 4);
  Tape t;
  const IdaScores with = run(t, f);
  const IdaScores without = run(t, f, 0.01, IdaOptions{1e-3, false});
  const Matrix& sigma = with.sigma.value();
  for (Index i = 0; i < 6; ++i) {
    const double c = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma(i, 0));
    for (Index j = 0; j < 6; ++j) CHECK(with.kernel.value()(i, j) == doctest::Approx(c * without.kernel.value()(i, j)).epsilon(1e-14));
  }
  // The factor multiplies the softmax argument, so the weights generally move.
  CHECK(max_abs_diff(with.weights.value(), without.weights.value()) > 1e-6);

  // With a constant row the scaled argument is still constant and both agree.
  Tape u;
  IdaParams p{u.constant(Matrix::Constant(1, 1, 0.4)), u.constant(Matrix::Identity(2, 2))};
  const IdaScores a = ida_forward(u, u.constant(Matrix::Zero(4, 2)), Matrix::Ones(4, 1), Matrix::Zero(4, 4), p);
  const IdaScores b = ida_forward(u, u.constant(Matrix::Zero(4, 2)), Matrix::Ones(4, 1), Matrix::Zero(4, 4), p, IdaOptions{1e-3, false});
  CHECK(max_abs_diff(a.weights.value(), b.weights.value()) < 1e-15);
}

TEST_CASE("ida gradient check") {
  const Fixture f = make_fixture(11, 6, 3, 4);
  const DiffTriple tri = difference(f.x_raw);
  const CovarianceContext cov = estimate_covariance(tri.d_fwd, tri.d_bwd, 0.01);
  ParamStore store;
  store.add("w_sigma", f.w_sigma);
  store.add("w_v", f.w_v);
  store.add("x", f.x_emb);
  const auto loss = [&](Tape& t, const ParamStore& s) {
    IdaParams p{t.param(s, "w_sigma"), t.param(s, "w_v")};
    return sum(ida_forward(t, t.param(s, "x"), tri, cov, p).output);
  };
  const ParamGradReport rep = grad_check_params(loss, store, 1e-6);
  CAPTURE(rep.worst_param);
  CHECK(rep.max_rel_error <= 1e-4);
}

TEST_CASE("md2 is nearly scale invariant on standardized data") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix raw = random_matrix(rng, 48, 3);
    const Matrix centered = raw.rowwise() - raw.colwise().mean();
    const Matrix x = centered.array().rowwise() / centered.array().square().colwise().mean().sqrt();
    const DiffTriple base = difference(x);
    const Matrix ref = mahalanobis_sq(base, estimate_covariance(base.d_fwd, base.d_bwd, 0.01));
    for (double c : {0.5, 0.8, 1.25, 2.0}) {
      const DiffTriple scaled = difference(Matrix(c * x));
      const Matrix md = mahalanobis_sq(scaled, estimate_covariance(scaled.d_fwd, scaled.d_bwd, 0.01));
      const double rel = (md - ref).norm() / ref.norm();
      CHECK(rel < 0.05);
    }
    const DiffTriple exact = difference(Matrix(3.0 * x));
    const Matrix md0 = mahalanobis_sq(exact, estimate_covariance(exact.d_fwd, exact.d_bwd, 0.0));
    const Matrix ref0 = mahalanobis_sq(base, estimate_covariance(base.d_fwd, base.d_bwd, 0.0));
    CHECK((md0 - ref0).norm() / ref0.norm() < 1e-9);
  }
}
