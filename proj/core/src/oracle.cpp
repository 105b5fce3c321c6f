#include "rpres/oracle.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include <Eigen/Dense>

#include "rpres/error.hpp"

namespace rpres {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

void add_entry(ResonanceLattice& lat, LatticeEntry e) {
  for (auto& existing : lat.entries) {
    if (std::abs(existing.lambda - e.lambda) <= 1e-12 * std::max(1.0, std::abs(e.lambda))) {
      ++existing.multiplicity;
      return;
    }
  }
  lat.entries.push_back(std::move(e));
}

void enumerate_multi(int dims, int max_total, const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> idx(static_cast<std::size_t>(dims), 0);
  // Visit by increasing total order so low orders come first.
  for (int total = 0; total <= max_total; ++total) {
    std::function<void(int, int)> rec = [&](int pos, int remaining) {
      if (pos == dims - 1) {
        idx[static_cast<std::size_t>(pos)] = remaining;
        visit(idx);
        return;
      }
      for (int v = remaining; v >= 0; --v) {
        idx[static_cast<std::size_t>(pos)] = v;
        rec(pos + 1, remaining - v);
      }
    };
    if (dims == 0) {
      if (total == 0) visit(idx);
      continue;
    }
    rec(0, total);
  }
}

void require_supercritical(const HopfParams& p, const char* what) {
  p.validate();
  if (!(p.delta > 0.0)) fail(ErrorKind::Regime, std::string(what) + ": requires delta > 0");
}

void require_subcritical(const HopfParams& p, const char* what) {
  p.validate();
  if (!(p.delta < 0.0)) fail(ErrorKind::Regime, std::string(what) + ": requires delta < 0");
}

} // namespace

ResonanceLattice fp_lattice(const std::vector<cplx>& alphas, int max_order) {
  if (max_order < 0) fail(ErrorKind::InvalidArgument, "fp_lattice: max_order must be >= 0");
  for (const auto& a : alphas)
    if (!(a.real() < 0.0)) fail(ErrorKind::Regime, "fp_lattice: stationary point is not stable");
  ResonanceLattice lat;
  lat.regime = Regime::Subcritical;
  enumerate_multi(static_cast<int>(alphas.size()), max_order, [&](const std::vector<int>& idx) {
    LatticeEntry e;
    e.index = idx;
    e.l = idx.size() > 0 ? idx[0] : 0;
    e.n = idx.size() > 1 ? idx[1] : 0;
    cplx lam(0.0);
    for (std::size_t i = 0; i < idx.size(); ++i) lam += static_cast<double>(idx[i]) * alphas[i];
    e.lambda = lam;
    add_entry(lat, std::move(e));
  });
  return lat;
}

ResonanceLattice hopf_fp_lattice(const HopfParams& p, int max_order) {
  require_subcritical(p, "hopf_fp_lattice");
  return fp_lattice({cplx(p.delta, -p.gamma), cplx(p.delta, p.gamma)}, max_order);
}

cplx fp_eigenfunction(int l, int n, const HopfParams& p, double r, double theta) {
  require_subcritical(p, "fp_eigenfunction");
  if (!(p.epsilon > 0.0)) fail(ErrorKind::InvalidArgument, "fp_eigenfunction: requires epsilon > 0");
  if (l < 0 || n < 0 || r < 0.0) fail(ErrorKind::InvalidArgument, "fp_eigenfunction: bad arguments");
  const double c = std::sqrt(-p.delta / (p.epsilon * p.epsilon));
  const double x = c * c * r * r;
  const int lo = std::min(l, n);
  const int hi = std::max(l, n);
  const int alpha = hi - lo;
  const double norm = std::sqrt(factorial(lo) / factorial(hi));
  const double radial = norm * std::pow(c * r, alpha) * laguerre(lo, alpha, x);
  // Harmonic e^{i (n - l) theta} in both branches keeps psi_{nl} = conj(psi_{ln}).
  return std::polar(1.0, static_cast<double>(n - l) * theta) * radial;
}

double phase_diffusion_analytic(const HopfParams& p) {
  require_supercritical(p, "phase_diffusion_analytic");
  return p.epsilon * p.epsilon * (1.0 + p.beta * p.beta) / (2.0 * p.delta);
}

ResonanceLattice po_lattice(const HopfParams& p, int max_n, int max_l) {
  require_supercritical(p, "po_lattice");
  if (max_n < 0 || max_l < 0) fail(ErrorKind::InvalidArgument, "po_lattice: orders must be >= 0");
  const double phi = phase_diffusion_analytic(p);
  const double omega = p.gamma - p.beta * p.delta;
  ResonanceLattice lat;
  lat.regime = Regime::Supercritical;
  for (int l = 0; l <= max_l; ++l) {
    for (int n = -max_n; n <= max_n; ++n) {
      LatticeEntry e;
      e.l = l;
      e.n = n;
      e.index = {l};
      const double re = l == 0 ? -phi * n * n : -2.0 * l * p.delta;
      e.lambda = cplx(re, n * omega);
      add_entry(lat, std::move(e));
    }
  }
  return lat;
}

cplx po_eigenfunction(int l, int n, const HopfParams& p, double r, double theta) {
  require_supercritical(p, "po_eigenfunction");
  if (!(p.epsilon > 0.0)) fail(ErrorKind::InvalidArgument, "po_eigenfunction: requires epsilon > 0");
  if (l < 0 || !(r > 0.0)) fail(ErrorKind::InvalidArgument, "po_eigenfunction: bad arguments");
  const double rc = std::sqrt(p.delta);
  const double phase = theta - p.beta * std::log(r / rc);
  const double scaled = std::sqrt(2.0 * p.delta) / p.epsilon * (r - rc);
  const double norm = 1.0 / std::sqrt(std::pow(2.0, l) * factorial(l));
  return std::polar(norm * hermite(l, scaled), static_cast<double>(n) * phase);
}

ResonanceLattice po_lattice_general(const std::vector<double>& nu, double omega, double phi,
                                    int max_n, int max_l) {
  for (const double v : nu)
    if (!(v > 0.0)) fail(ErrorKind::Regime, "po_lattice_general: limit cycle is not transversally stable");
  if (!(phi >= 0.0)) fail(ErrorKind::InvalidArgument, "po_lattice_general: Phi must be >= 0");
  if (max_n < 0 || max_l < 0) fail(ErrorKind::InvalidArgument, "po_lattice_general: orders must be >= 0");
  ResonanceLattice lat;
  lat.regime = Regime::Supercritical;
  enumerate_multi(static_cast<int>(nu.size()), max_l, [&](const std::vector<int>& idx) {
    double transverse = 0.0;
    int order = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      transverse += idx[i] * nu[i];
      order += idx[i];
    }
    for (int n = -max_n; n <= max_n; ++n) {
      LatticeEntry e;
      e.index = idx;
      e.l = order;
      e.n = n;
      const double re = order == 0 ? -phi * n * n : -transverse;
      e.lambda = cplx(re, n * omega);
      add_entry(lat, std::move(e));
    }
  });
  return lat;
}

std::vector<Eigen::Matrix2d> fundamental_matrix(const HopfParams& p, int n_steps) {
  require_supercritical(p, "fundamental_matrix");
  if (n_steps < 16) fail(ErrorKind::InvalidArgument, "fundamental_matrix: n_steps must be >= 16");
  const double omega = p.gamma - p.beta * p.delta;
  if (std::abs(omega) < 1e-12) fail(ErrorKind::Regime, "fundamental_matrix: cycle has zero angular frequency");
  const double period = 2.0 * std::numbers::pi / std::abs(omega);
  const double rc = std::sqrt(p.delta);
  const double h = period / n_steps;
  auto A = [&](double t) {
    return jacobian(p, {rc * std::cos(omega * t), rc * std::sin(omega * t)});
  };
  std::vector<Eigen::Matrix2d> out;
  out.reserve(static_cast<std::size_t>(n_steps) + 1);
  Eigen::Matrix2d M = Eigen::Matrix2d::Identity();
  out.push_back(M);
  for (int k = 0; k < n_steps; ++k) {
    const double t = k * h;
    const Eigen::Matrix2d a0 = A(t), am = A(t + 0.5 * h), a1 = A(t + h);
    const Eigen::Matrix2d k1 = a0 * M;
    const Eigen::Matrix2d k2 = am * (M + 0.5 * h * k1);
    const Eigen::Matrix2d k3 = am * (M + 0.5 * h * k2);
    const Eigen::Matrix2d k4 = a1 * (M + h * k3);
    M += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.push_back(M);
  }
  return out;
}

FloquetData floquet_analysis(const HopfParams& p, int n_quad) {
  const auto Ms = fundamental_matrix(p, n_quad);
  FloquetData fd;
  fd.omega = p.gamma - p.beta * p.delta;
  fd.period = 2.0 * std::numbers::pi / std::abs(fd.omega);
  fd.monodromy = Ms.back();

  Eigen::EigenSolver<Eigen::Matrix2d> es(fd.monodromy);
  const Eigen::Vector2cd mu = es.eigenvalues();
  const int unit = std::abs(mu[0] - 1.0) <= std::abs(mu[1] - 1.0) ? 0 : 1;
  if (std::abs(mu[unit] - 1.0) > 1e-4 || std::abs(mu[unit].imag()) > 1e-12)
    fail(ErrorKind::NonConvergence, "floquet_analysis: unit Floquet multiplier not found within 1e-4");
  fd.floquet_exponents = {std::log(std::abs(mu[unit])) / fd.period,
                          std::log(std::abs(mu[1 - unit])) / fd.period};

  // Right eigenvector scaled to the velocity at the base point (sqrt(delta), 0).
  const State base{std::sqrt(p.delta), 0.0};
  const State vel = drift(p, base);
  const Eigen::Vector2d velocity(vel[0], vel[1]);
  Eigen::Vector2d e = es.eigenvectors().col(unit).real();
  e *= velocity.dot(e) / e.squaredNorm();
  fd.e_vec = e;

  Eigen::EigenSolver<Eigen::Matrix2d> est(fd.monodromy.transpose());
  const Eigen::Vector2cd mut = est.eigenvalues();
  const int unit_t = std::abs(mut[0] - 1.0) <= std::abs(mut[1] - 1.0) ? 0 : 1;
  Eigen::Vector2d f = est.eigenvectors().col(unit_t).real();
  f /= e.dot(f);
  fd.f_vec = f;

  // C(T) = int_0^T M(T) M(s)^{-1} M(s)^{-T} M(T)^T ds (unit diffusion), trapezoid rule.
  const double h = fd.period / n_quad;
  Eigen::Matrix2d C = Eigen::Matrix2d::Zero();
  for (int k = 0; k <= n_quad; ++k) {
    const Eigen::Matrix2d G = fd.monodromy * Ms[static_cast<std::size_t>(k)].inverse();
    const double wk = (k == 0 || k == n_quad) ? 0.5 : 1.0;
    C += wk * h * (G * G.transpose());
  }
  fd.c_period = 0.5 * (C + C.transpose());
  // Phase diffusion with <e, f> = 1 and e scaled as the flow velocity; the
  // sign is chosen so that Phi >= 0.
  fd.phi = p.epsilon * p.epsilon * fd.omega * fd.omega / (2.0 * fd.period) *
           f.dot(fd.c_period * f);
  return fd;
}

double phase_diffusion_numeric(const HopfParams& p, int n_quad) {
  require_supercritical(p, "phase_diffusion_numeric");
  if (n_quad < 64) fail(ErrorKind::InvalidArgument, "phase_diffusion_numeric: n_quad must be >= 64");
  return floquet_analysis(p, n_quad).phi;
}

} // namespace rpres
