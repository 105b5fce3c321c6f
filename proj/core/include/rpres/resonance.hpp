#pragma once

#include <complex>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "rpres/eigensolver.hpp"

namespace rpres {

/// m-weighted inner product <u, v>_m = sum_i conj(u_i) v_i m_i.
cplx weighted_dot(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v, std::span<const double> m);
double weighted_norm(const Eigen::VectorXcd& u, std::span<const double> m);

/// Right eigenvector of the density-propagating T expressed as a function
/// in L^2(m): psi_i / m_i, zero where m_i = 0.
Eigen::VectorXcd as_weighted_function(const Eigen::VectorXcd& right, std::span<const double> m);

/// kappa = ||left||_m ||right_fn||_m / |<left, right_fn>_m| >= 1.
/// Returns +infinity when the normalized pairing falls below 1e-14.
double condition_number(const Eigen::VectorXcd& left_fn, const Eigen::VectorXcd& right_fn,
                        std::span<const double> m);
/// Same, for an eigenpair of T (the right vector is converted to a function).
double condition_number(const EigenPair& pair, std::span<const double> m);

/// lambda = (log|zeta| + i arg zeta) / tau with arg in [-pi, pi).
cplx to_generator(cplx zeta, double tau);

struct Resonance {
  cplx lambda;              // ratio estimate
  cplx lambda_single;       // single-lag estimate at tau (may be aliased)
  cplx zeta_a, zeta_b;      // eigenvalues at tau and tau + dtau
  double kappa = 1.0;
  double pair_quality = 1.0;
  Eigen::VectorXcd right;   // from the tau matrix
  Eigen::VectorXcd left;
};

struct ResonanceSet {
  double lag = 0.0;
  double dlag = 0.0;
  std::vector<Resonance> resonances;
  std::vector<int> unmatched_a;  // indices into the tau set
  std::vector<int> unmatched_b;  // indices into the tau + dtau set
};

struct PairingOptions {
  double quality_threshold = 0.5;
  double cluster_tol = 1e-10;
};

/// Pairs eigenvectors at tau and tau + dtau (one-to-one), and converts each
/// matched pair to lambda = log(zeta_b / zeta_a) / dtau.
///
/// quality q = |<u_a, u_b>_m| / (||u_a||_m ||u_b||_m) with u the right
/// eigenvectors as L^2(m) functions. Pairing is greedy on descending q;
/// when greedy leaves an above-threshold candidate unmatched the
/// maximum-total-quality assignment (Hungarian) is used instead. Clusters
/// of eigenvalues closer than cluster_tol are paired as blocks by the
/// smallest principal cosine between their spans.
/// Throws Error(EmptyPairing) when no pair reaches the threshold.
ResonanceSet pair_and_ratio(std::span<const EigenPair> set_a, std::span<const EigenPair> set_b,
                            double tau, double dtau, std::span<const double> m,
                            const PairingOptions& opts = {});

/// Drops kappa > kappa_max, then sorts by descending Re lambda with ties
/// broken by ascending |Im lambda| (positive imaginary part first).
ResonanceSet filter_and_sort(ResonanceSet set, double kappa_max = 5.0);

void sort_resonances(std::vector<Resonance>& r);

/// Maximum-weight perfect-as-possible assignment on a rectangular score
/// matrix. Returns for each row the assigned column or -1.
std::vector<int> max_weight_assignment(const Eigen::MatrixXd& score);

} // namespace rpres
