#include "doctest.h"

#include <random>

#include "rpres/sparse.hpp"
#include "support.hpp"

using namespace rpres;

TEST_CASE("duplicate triplets are summed and rows sorted") {
  const CscMatrix A(3, {{2, 0, 1.0}, {0, 0, 2.0}, {2, 0, 0.5}, {1, 2, 4.0}});
  CHECK(A.nonzeros() == 3);
  CHECK(A.col_ptr() == std::vector<std::int64_t>{0, 2, 2, 3});
  CHECK(A.row_idx() == std::vector<std::int64_t>{0, 2, 1});
  CHECK(A.values() == std::vector<double>{2.0, 1.5, 4.0});
}

TEST_CASE("products agree with the dense matrix") {
  const auto A = testing::random_stochastic(60, 6, 4);
  const Eigen::MatrixXd D = A.to_dense();
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Eigen::VectorXd x(60);
  Eigen::VectorXcd z(60);
  for (int i = 0; i < 60; ++i) {
    x[i] = g(rng);
    z[i] = {g(rng), g(rng)};
  }
  CHECK((A.apply(x) - D * x).norm() <= 1e-13);
  CHECK((A.apply_transpose(x) - D.transpose() * x).norm() <= 1e-13);
  CHECK((A.apply(z) - D.cast<cplx>() * z).norm() <= 1e-13);
  CHECK((A.transposed().to_dense() - D.transpose()).norm() == 0.0);
}

TEST_CASE("dense round trip drops small entries") {
  Eigen::MatrixXd D(2, 2);
  D << 1.0, 1e-20, 0.0, 3.0;
  const auto A = CscMatrix::from_dense(D, 1e-15);
  CHECK(A.nonzeros() == 2);
  CHECK(A.column_sums()[1] == 3.0);
}
