#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rpres/eigensolver.hpp"
#include "rpres/error.hpp"
#include "support.hpp"

using namespace rpres;

namespace {

EigenOptions opts_k(int k, EigenMethod method = EigenMethod::Auto) {
  EigenOptions o;
  o.k = k;
  o.method = method;
  return o;
}

void check_triples(const CscMatrix& T, const std::vector<EigenPair>& pairs, double tol) {
  const Eigen::MatrixXcd D = T.to_dense().cast<cplx>();
  for (const auto& p : pairs) {
    CHECK(std::abs(p.right.norm() - 1.0) <= 1e-12);
    CHECK((D * p.right - p.value * p.right).norm() <= tol);
    CHECK((D.adjoint() * p.left - std::conj(p.value) * p.left).norm() <= tol * p.left.norm());
    CHECK(std::abs(p.left.dot(p.right) - 1.0) <= 1e-8);
    CHECK(p.residual <= tol);
  }
}

void check_conjugate_closed(const std::vector<EigenPair>& pairs) {
  for (const auto& p : pairs) {
    double best = 1e300;
    for (const auto& q : pairs) best = std::min(best, std::abs(q.value - std::conj(p.value)));
    CHECK(best <= 1e-10);
  }
}

} // namespace

TEST_CASE("identity has unit eigenvalues") {
  const auto T = CscMatrix::from_dense(Eigen::MatrixXd::Identity(5, 5));
  const auto pairs = leading_eigenpairs(T, opts_k(3));
  REQUIRE(pairs.size() == 3);
  for (const auto& p : pairs) CHECK(std::abs(p.value - 1.0) <= 1e-14);
}

TEST_CASE("two-state matrix has eigenvalues 1 and 0.7") {
  Eigen::MatrixXd D(2, 2);
  D << 0.9, 0.2, 0.1, 0.8;
  const auto pairs = leading_eigenpairs(CscMatrix::from_dense(D), opts_k(2));
  REQUIRE(pairs.size() == 2);
  CHECK(std::abs(pairs[0].value - 1.0) <= 1e-12);
  CHECK(std::abs(pairs[1].value - 0.7) <= 1e-12);
  // Stationary density (2/3, 1/3).
  const Eigen::VectorXcd r = pairs[0].right / pairs[0].right.sum();
  CHECK(std::abs(r[0] - 2.0 / 3.0) <= 1e-12);
}

TEST_CASE("three-cycle has the cube roots of unity") {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(3, 3);
  D(1, 0) = D(2, 1) = D(0, 2) = 1.0;
  const auto pairs = leading_eigenpairs(CscMatrix::from_dense(D), opts_k(3));
  REQUIRE(pairs.size() == 3);
  const std::vector<cplx> roots{1.0, std::polar(1.0, 2 * std::numbers::pi / 3),
                                std::polar(1.0, -2 * std::numbers::pi / 3)};
  CHECK(testing::matched_distance(testing::values_of(pairs), roots) <= 1e-12);
  for (const auto& p : pairs) CHECK(std::abs(std::abs(p.value) - 1.0) <= 1e-12);
}

TEST_CASE("k outside [1, dim] is rejected") {
  const auto T = CscMatrix::from_dense(Eigen::MatrixXd::Identity(4, 4));
  CHECK_THROWS_AS(leading_eigenpairs(T, opts_k(0)), Error);
  CHECK_THROWS_AS(leading_eigenpairs(T, opts_k(5)), Error);
}

TEST_CASE("Arnoldi matches the dense oracle on random chains") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const std::int64_t dim = 40 + static_cast<std::int64_t>((seed * 37) % 161);
    const auto T = testing::random_stochastic(dim, 4, seed);
    const auto arn = leading_eigenpairs(T, opts_k(8, EigenMethod::Arnoldi));
    const auto full = dense_eigenvalues(T.to_dense());
    CAPTURE(seed);
    // Each Arnoldi value is an eigenvalue, and none of larger modulus was skipped.
    for (const auto& p : arn) CHECK((full.array() - p.value).abs().minCoeff() <= 1e-8);
    const double smallest = std::abs(arn.back().value);
    CHECK(smallest >= std::abs(full[static_cast<Eigen::Index>(arn.size()) - 1]) - 1e-8);
  }
}

TEST_CASE("eigentriples satisfy their defining equations") {
  const auto T = testing::random_stochastic(150, 5, 77);
  for (auto method : {EigenMethod::Dense, EigenMethod::Arnoldi}) {
    const auto pairs = leading_eigenpairs(T, opts_k(10, method));
    CHECK(pairs.size() >= 10);
    check_triples(T, pairs, 1e-9);
    check_conjugate_closed(pairs);
  }
}

TEST_CASE("leading eigenpair is the stationary density") {
  const auto T = testing::random_stochastic(120, 6, 5);
  const auto pairs = leading_eigenpairs(T, opts_k(4, EigenMethod::Arnoldi));
  CHECK(std::abs(pairs[0].value - 1.0) <= 1e-12);
  for (Eigen::Index i = 0; i < pairs[0].right.size(); ++i) {
    CHECK(pairs[0].right[i].real() >= -1e-12);
    CHECK(std::abs(pairs[0].right[i].imag()) <= 1e-12);
  }
  for (const auto& p : pairs) CHECK(std::abs(p.value) <= 1.0 + 1e-10);
}

TEST_CASE("spectrum is sorted by descending modulus") {
  const auto pairs = leading_eigenpairs(testing::random_stochastic(90, 4, 9), opts_k(12));
  for (std::size_t i = 1; i < pairs.size(); ++i)
    CHECK(std::abs(pairs[i].value) <= std::abs(pairs[i - 1].value) + 1e-12);
}

TEST_CASE("exhausted restart budget reports non-convergence") {
  const auto T = testing::random_stochastic(400, 8, 3);
  EigenOptions o = opts_k(30, EigenMethod::Arnoldi);
  o.max_restarts = 0;
  o.krylov_dim = 34;
  try {
    leading_eigenpairs(T, o);
    FAIL("expected non-convergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonConvergence);
    CHECK(e.category() == ErrorCategory::Numerical);
  }
}

TEST_CASE("Arnoldi on a diagonal operator finds the largest entries") {
  const std::int64_t n = 300;
  const LinearOperator op = [n](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
    y.resize(n);
    for (std::int64_t i = 0; i < n; ++i) y[i] = x[i] * (1.0 - static_cast<double>(i) / n);
  };
  EigenOptions o;
  const auto r = arnoldi_largest(op, n, 5, o);
  for (int i = 0; i < 5; ++i) CHECK(std::abs(r.values[i] - (1.0 - i / 300.0)) <= 1e-10);
}
