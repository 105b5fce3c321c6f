#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "rpres/hopf_sde.hpp"

namespace rpres {

using cplx = std::complex<double>;

/// Generalized Laguerre polynomial L_n^alpha(x), three-term recurrence.
double laguerre(int n, double alpha, double x);
/// Physicists' Hermite polynomial H_n(x), three-term recurrence.
double hermite(int n, double x);

enum class Regime { Subcritical, Supercritical };

struct LatticeEntry {
  int l = 0;
  int n = 0;
  std::vector<int> index;  // full multi-index; (l, n) are its Hopf-pair components
  cplx lambda;
  int multiplicity = 1;
};

struct ResonanceLattice {
  Regime regime = Regime::Subcritical;
  std::vector<LatticeEntry> entries;
};

/// Small-noise lattice of a stable fixed point: all sums sum_i l_i alpha_i
/// with sum_i l_i <= max_order. Points generated by several multi-indices
/// appear once with their multiplicity. Throws Error(Regime) unless every
/// Re alpha < 0.
ResonanceLattice fp_lattice(const std::vector<cplx>& alphas, int max_order);

/// Hopf fixed-point lattice lambda_ln = (l + n) delta + i (n - l) gamma.
/// Uses alphas {delta - i gamma, delta + i gamma}, so index = (l, n).
ResonanceLattice hopf_fp_lattice(const HopfParams& p, int max_order);

/// Laguerre-harmonic eigenfunction about the stable origin (delta < 0, epsilon > 0).
cplx fp_eigenfunction(int l, int n, const HopfParams& p, double r, double theta);

double phase_diffusion_analytic(const HopfParams& p);

/// Parabolic lattice of the limit cycle, n in [-max_n, max_n], l in [0, max_l]:
///   l = 0: -Phi n^2 + i n (gamma - beta delta);  l > 0: -2 l delta + i n (gamma - beta delta).
ResonanceLattice po_lattice(const HopfParams& p, int max_n, int max_l);

/// Hermite-harmonic eigenfunction centred on the cycle r = sqrt(delta).
cplx po_eigenfunction(int l, int n, const HopfParams& p, double r, double theta);

/// Same lattice from Floquet data: nu are the transverse contraction rates
/// (positive), so lambda = -sum_i l_i nu_i + i n omega for l != 0.
ResonanceLattice po_lattice_general(const std::vector<double>& nu, double omega, double phi,
                                    int max_n, int max_l);

/// Fundamental matrix M(t) of the variational flow along the deterministic
/// cycle at n_steps + 1 uniform times over one period (RK4).
std::vector<Eigen::Matrix2d> fundamental_matrix(const HopfParams& p, int n_steps);

struct FloquetData {
  double period = 0.0;
  double omega = 0.0;
  Eigen::Matrix2d monodromy;
  std::array<double, 2> floquet_exponents{};  // descending: ~0, then ~-2 delta
  Eigen::Vector2d e_vec;  // flow tangent at the base point, scaled as the velocity
  Eigen::Vector2d f_vec;  // left eigenvector with <e, f> = 1
  Eigen::Matrix2d c_period;
  double phi = 0.0;
};

/// Floquet analysis of the Hopf cycle with n_quad quadrature/integration steps.
FloquetData floquet_analysis(const HopfParams& p, int n_quad);
double phase_diffusion_numeric(const HopfParams& p, int n_quad);

} // namespace rpres
