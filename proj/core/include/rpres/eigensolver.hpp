#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "rpres/sparse.hpp"
#include "rpres/transfer.hpp"

namespace rpres {

using cplx = std::complex<double>;

/// One eigentriple of a real square matrix T.
///   right: T right = value right, unit 2-norm, largest entry real positive.
///   left:  left^H T = value left^H, scaled so that left^H right = 1.
struct EigenPair {
  cplx value;
  Eigen::VectorXcd right;
  Eigen::VectorXcd left;
  double residual = 0.0;       // ||T right - value right||_2
  double left_residual = 0.0;  // ||T^H left - conj(value) left||_2 / ||left||_2
};

enum class EigenMethod { Auto, Dense, Arnoldi };

struct EigenOptions {
  int k = 15;
  double tol = 1e-10;
  int max_restarts = 30;
  int krylov_dim = 0;          // 0 selects max(2k + 10, 40)
  std::int64_t dense_threshold = 512;
  EigenMethod method = EigenMethod::Auto;
  std::uint64_t start_seed = 0x9e3779b97f4a7c15ULL;
};

/// Linear operator y = A x on complex vectors of length n.
using LinearOperator = std::function<void(const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

struct RitzPairs {
  Eigen::VectorXcd values;     // descending modulus
  Eigen::MatrixXcd vectors;    // unit columns
  Eigen::VectorXd residuals;   // Ritz residual estimates
  int restarts = 0;
};

/// Implicitly restarted Arnoldi iteration (exact shifts, complex
/// arithmetic) for the `nev` eigenvalues of largest modulus. Converged
/// Ritz values stay in the retained subspace across restarts, and the
/// retained dimension grows with the number converged.
/// Throws Error(NonConvergence) when the restart budget is exhausted.
RitzPairs arnoldi_largest(const LinearOperator& op, std::int64_t n, int nev,
                          const EigenOptions& opts);

/// Leading eigentriples of T, sorted by descending modulus. The result is
/// closed under complex conjugation: a missing partner of a complex pair
/// is synthesized by conjugation, so up to k + 1 pairs may be returned.
/// Dense QR is used when dim <= dense_threshold (method Auto).
std::vector<EigenPair> leading_eigenpairs(const CscMatrix& T, const EigenOptions& opts);
std::vector<EigenPair> leading_eigenpairs(const TransitionMatrix& T, const EigenOptions& opts);

/// Full dense spectrum, descending modulus.
Eigen::VectorXcd dense_eigenvalues(const Eigen::MatrixXd& A);

} // namespace rpres
