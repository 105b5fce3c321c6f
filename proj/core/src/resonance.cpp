#include "rpres/resonance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "rpres/error.hpp"

namespace rpres {

cplx weighted_dot(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v, std::span<const double> m) {
  if (static_cast<std::size_t>(u.size()) != m.size() || static_cast<std::size_t>(v.size()) != m.size())
    fail(ErrorKind::InvalidArgument, "weighted_dot: dimension mismatch");
  cplx acc(0.0, 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    acc += std::conj(u[k]) * v[k] * m[i];
  }
  return acc;
}

double weighted_norm(const Eigen::VectorXcd& u, std::span<const double> m) {
  return std::sqrt(std::max(0.0, weighted_dot(u, u, m).real()));
}

Eigen::VectorXcd as_weighted_function(const Eigen::VectorXcd& right, std::span<const double> m) {
  if (static_cast<std::size_t>(right.size()) != m.size())
    fail(ErrorKind::InvalidArgument, "as_weighted_function: dimension mismatch");
  Eigen::VectorXcd u(right.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    u[k] = m[i] > 0.0 ? right[k] / m[i] : cplx(0.0);
  }
  return u;
}

double condition_number(const Eigen::VectorXcd& left_fn, const Eigen::VectorXcd& right_fn,
                        std::span<const double> m) {
  const double nl2 = weighted_dot(left_fn, left_fn, m).real();
  const double nr2 = weighted_dot(right_fn, right_fn, m).real();
  if (!(nl2 > 0.0) || !(nr2 > 0.0)) return std::numeric_limits<double>::infinity();
  // sqrt(a * a) == a in IEEE arithmetic, so left == right yields exactly 1.
  const double norms = std::sqrt(nl2 * nr2);
  const double overlap = std::abs(weighted_dot(left_fn, right_fn, m));
  if (overlap < 1e-14 * norms) return std::numeric_limits<double>::infinity();
  return std::max(1.0, norms / overlap);
}

double condition_number(const EigenPair& pair, std::span<const double> m) {
  return condition_number(pair.left, as_weighted_function(pair.right, m), m);
}

cplx to_generator(cplx zeta, double tau) {
  if (!(tau > 0.0)) fail(ErrorKind::InvalidArgument, "to_generator: tau must be positive");
  if (zeta == cplx(0.0, 0.0)) fail(ErrorKind::ZeroEigenvalue, "to_generator: zero eigenvalue");
  double arg = std::arg(zeta);
  if (arg >= std::numbers::pi) arg -= 2.0 * std::numbers::pi;
  return cplx(std::log(std::abs(zeta)), arg) / tau;
}

std::vector<int> max_weight_assignment(const Eigen::MatrixXd& score) {
  // Hungarian algorithm (shortest augmenting path) on cost = max - score,
  // padded to a square matrix.
  const int rows = static_cast<int>(score.rows());
  const int cols = static_cast<int>(score.cols());
  const int n = std::max(rows, cols);
  std::vector<int> result(static_cast<std::size_t>(rows), -1);
  if (n == 0) return result;
  const double top = score.size() > 0 ? score.maxCoeff() : 0.0;
  auto cost = [&](int i, int j) {
    return (i < rows && j < cols) ? top - score(i, j) : top;
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (int j = 1; j <= n; ++j)
    if (p[j] >= 1 && p[j] <= rows && j <= cols) result[static_cast<std::size_t>(p[j] - 1)] = j - 1;
  return result;
}

namespace {

struct Cluster {
  std::vector<int> members;
  cplx center;
  bool real = false;
  int conj = -1;  // index of the conjugate cluster (itself when real)
};

std::vector<Cluster> make_clusters(std::span<const EigenPair> set, double tol) {
  std::vector<Cluster> out;
  std::vector<int> owner(set.size(), -1);
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (owner[i] >= 0) continue;
    Cluster c;
    c.center = set[i].value;
    c.real = set[i].value.imag() == 0.0;
    const int id = static_cast<int>(out.size());
    for (std::size_t j = i; j < set.size(); ++j) {
      if (owner[j] >= 0) continue;
      if (std::abs(set[j].value - c.center) <= tol * std::max(1.0, std::abs(c.center))) {
        owner[j] = id;
        c.members.push_back(static_cast<int>(j));
      }
    }
    out.push_back(std::move(c));
  }
  for (std::size_t p = 0; p < out.size(); ++p) {
    if (out[p].real) {
      out[p].conj = static_cast<int>(p);
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < out.size(); ++q) {
      if (q == p || out[q].real) continue;
      const double d = std::abs(out[q].center - std::conj(out[p].center));
      if (d < best) {
        best = d;
        out[p].conj = static_cast<int>(q);
      }
    }
    if (best > 1e-8 * std::max(1.0, std::abs(out[p].center))) out[p].conj = -1;
  }
  return out;
}

// Orthonormal basis (in the m-weighted product) of the cluster's functions,
// represented as sqrt(m) * u so the ordinary product applies.
Eigen::MatrixXcd cluster_basis(std::span<const EigenPair> set, const Cluster& c,
                               std::span<const double> m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXcd B(n, static_cast<Eigen::Index>(c.members.size()));
  for (std::size_t q = 0; q < c.members.size(); ++q) {
    const auto u = as_weighted_function(set[c.members[q]].right, m);
    for (Eigen::Index i = 0; i < n; ++i) B(i, static_cast<Eigen::Index>(q)) = u[i] * std::sqrt(m[i]);
  }
  if (B.cols() == 1) {
    const double nrm = B.col(0).norm();
    if (nrm > 0.0) B.col(0) /= nrm;
    return B;
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(B);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(n, B.cols());
}

double block_quality(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
  const Eigen::MatrixXcd G = A.adjoint() * B;
  if (G.rows() == 1 && G.cols() == 1) return std::abs(G(0, 0));
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(G);
  const auto& s = svd.singularValues();
  return s.size() > 0 ? s[s.size() - 1] : 0.0;
}

} // namespace

ResonanceSet pair_and_ratio(std::span<const EigenPair> set_a, std::span<const EigenPair> set_b,
                            double tau, double dtau, std::span<const double> m,
                            const PairingOptions& opts) {
  if (!(dtau > 0.0)) fail(ErrorKind::InvalidArgument, "pair_and_ratio: dtau must be positive");
  if (!(tau > 0.0)) fail(ErrorKind::InvalidArgument, "pair_and_ratio: tau must be positive");
  for (const auto& p : set_a)
    if (static_cast<std::size_t>(p.right.size()) != m.size())
      fail(ErrorKind::InvalidArgument, "pair_and_ratio: set_a dimension differs from density");
  for (const auto& p : set_b)
    if (static_cast<std::size_t>(p.right.size()) != m.size())
      fail(ErrorKind::InvalidArgument, "pair_and_ratio: set_b dimension differs from density");

  const auto ca = make_clusters(set_a, opts.cluster_tol);
  const auto cb = make_clusters(set_b, opts.cluster_tol);
  std::vector<Eigen::MatrixXcd> ba, bb;
  for (const auto& c : ca) ba.push_back(cluster_basis(set_a, c, m));
  for (const auto& c : cb) bb.push_back(cluster_basis(set_b, c, m));

  Eigen::MatrixXd score = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ca.size()),
                                                static_cast<Eigen::Index>(cb.size()));
  for (std::size_t p = 0; p < ca.size(); ++p)
    for (std::size_t q = 0; q < cb.size(); ++q)
      if (ca[p].real == cb[q].real) score(p, q) = block_quality(ba[p], bb[q]);

  const double thr = opts.quality_threshold;
  auto conjugate_consistent = [&](int p, int q) {
    // Both clusters real, or both complex with known conjugates.
    return ca[p].real == cb[q].real && (ca[p].real || (ca[p].conj >= 0 && cb[q].conj >= 0));
  };

  // Greedy on descending quality; a match also fixes its conjugate match.
  std::vector<int> match_a(ca.size(), -1), match_b(cb.size(), -1);
  {
    std::vector<std::tuple<double, int, int>> cand;
    for (int p = 0; p < score.rows(); ++p)
      for (int q = 0; q < score.cols(); ++q)
        if (score(p, q) >= thr && conjugate_consistent(p, q)) cand.emplace_back(score(p, q), p, q);
    std::stable_sort(cand.begin(), cand.end(),
                     [](const auto& x, const auto& y) { return std::get<0>(x) > std::get<0>(y); });
    for (const auto& [s, p, q] : cand) {
      const int pc = ca[p].conj, qc = cb[q].conj;
      if (match_a[p] >= 0 || match_b[q] >= 0) continue;
      if (pc != p && (match_a[pc] >= 0 || match_b[qc] >= 0)) continue;
      match_a[p] = q;
      match_b[q] = p;
      match_a[pc] = qc;
      match_b[qc] = pc;
    }
  }

  // Optimal-assignment fallback when greedy blocked an admissible candidate.
  bool blocked = false;
  for (int p = 0; p < score.rows() && !blocked; ++p)
    if (match_a[p] < 0)
      for (int q = 0; q < score.cols(); ++q)
        if (score(p, q) >= thr && conjugate_consistent(p, q)) blocked = true;
  if (blocked) {
    Eigen::MatrixXd s = score;
    for (int p = 0; p < s.rows(); ++p)
      for (int q = 0; q < s.cols(); ++q)
        if (s(p, q) < thr || !conjugate_consistent(p, q)) s(p, q) = 0.0;
    const auto opt = max_weight_assignment(s);
    double total_greedy = 0.0, total_opt = 0.0;
    bool consistent = true;
    for (int p = 0; p < s.rows(); ++p) {
      if (match_a[p] >= 0) total_greedy += score(p, match_a[p]);
      const int q = opt[p];
      if (q >= 0 && s(p, q) > 0.0) {
        total_opt += s(p, q);
        const int pc = ca[p].conj;
        const int qc = cb[q].conj;
        if (opt[pc] != qc) consistent = false;
      }
    }
    if (consistent && total_opt > total_greedy) {
      std::fill(match_a.begin(), match_a.end(), -1);
      std::fill(match_b.begin(), match_b.end(), -1);
      for (int p = 0; p < s.rows(); ++p)
        if (opt[p] >= 0 && s(p, opt[p]) > 0.0) {
          match_a[p] = opt[p];
          match_b[opt[p]] = p;
        }
    }
  }

  ResonanceSet out;
  out.lag = tau;
  out.dlag = dtau;
  std::vector<char> used_a(set_a.size(), 0), used_b(set_b.size(), 0);
  for (std::size_t p = 0; p < ca.size(); ++p) {
    const int q = match_a[p];
    if (q < 0) continue;
    // Conjugate cluster pairs are emitted from the upper member.
    if (!ca[p].real && ca[p].center.imag() < 0.0 && ca[p].conj >= 0 && match_a[ca[p].conj] == cb[q].conj)
      continue;
    const auto& ma = ca[p].members;
    const auto& mb = cb[static_cast<std::size_t>(q)].members;
    const std::size_t s = std::min(ma.size(), mb.size());
    for (std::size_t r = 0; r < s; ++r) {
      const auto& pa = set_a[ma[r]];
      const auto& pb = set_b[mb[r]];
      if (pa.value == cplx(0.0) || pb.value == cplx(0.0)) continue;
      used_a[ma[r]] = 1;
      used_b[mb[r]] = 1;
      Resonance res;
      res.zeta_a = pa.value;
      res.zeta_b = pb.value;
      res.lambda = to_generator(pb.value / pa.value, dtau);
      res.lambda_single = to_generator(pa.value, tau);
      res.kappa = condition_number(pa, m);
      res.pair_quality = score(static_cast<Eigen::Index>(p), q);
      res.right = pa.right;
      res.left = pa.left;
      if (ca[p].real) {
        res.lambda = cplx(res.lambda.real(), 0.0);
        res.lambda_single = cplx(res.lambda_single.real(), 0.0);
      }
      out.resonances.push_back(res);
      if (!ca[p].real && ca[p].conj >= 0 && match_a[ca[p].conj] == cb[q].conj) {
        Resonance mirror = res;
        mirror.zeta_a = std::conj(res.zeta_a);
        mirror.zeta_b = std::conj(res.zeta_b);
        mirror.lambda = std::conj(res.lambda);
        mirror.lambda_single = std::conj(res.lambda_single);
        mirror.right = pa.right.conjugate();
        mirror.left = pa.left.conjugate();
        out.resonances.push_back(std::move(mirror));
        const auto& mac = ca[ca[p].conj].members;
        const auto& mbc = cb[cb[q].conj].members;
        if (r < mac.size()) used_a[mac[r]] = 1;
        if (r < mbc.size()) used_b[mbc[r]] = 1;
      }
    }
  }
  for (std::size_t i = 0; i < set_a.size(); ++i)
    if (!used_a[i]) out.unmatched_a.push_back(static_cast<int>(i));
  for (std::size_t j = 0; j < set_b.size(); ++j)
    if (!used_b[j]) out.unmatched_b.push_back(static_cast<int>(j));
  if (out.resonances.empty())
    fail(ErrorKind::EmptyPairing, "pair_and_ratio: no eigenvector pair reached quality " + std::to_string(thr));
  return out;
}

void sort_resonances(std::vector<Resonance>& r) {
  std::stable_sort(r.begin(), r.end(), [](const Resonance& a, const Resonance& b) {
    if (a.lambda.real() != b.lambda.real()) return a.lambda.real() > b.lambda.real();
    const double ia = std::abs(a.lambda.imag()), ib = std::abs(b.lambda.imag());
    if (ia != ib) return ia < ib;
    return a.lambda.imag() > b.lambda.imag();
  });
}

ResonanceSet filter_and_sort(ResonanceSet set, double kappa_max) {
  std::erase_if(set.resonances, [&](const Resonance& r) { return !(r.kappa <= kappa_max); });
  sort_resonances(set.resonances);
  return set;
}

} // namespace rpres
