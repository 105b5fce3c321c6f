#include "rpres/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "rpres/error.hpp"

namespace rpres {

namespace {

Eigen::VectorXcd random_unit(std::int64_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXcd v(n);
  for (std::int64_t i = 0; i < n; ++i) v[i] = cplx(u(rng), 0.0);
  return v / v.norm();
}

std::vector<int> modulus_order(const Eigen::VectorXcd& values) {
  std::vector<int> idx(static_cast<std::size_t>(values.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    const double ma = std::abs(values[a]);
    const double mb = std::abs(values[b]);
    if (ma != mb) return ma > mb;
    return values[a].imag() > values[b].imag();
  });
  return idx;
}

// Rotates v so that its largest-modulus entry is real and positive.
void fix_phase(Eigen::VectorXcd& v) {
  Eigen::Index imax = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > best * (1.0 + 1e-12)) {
      best = a;
      imax = i;
    }
  }
  if (best > 0.0) v *= std::conj(v[imax]) / best;
}

Eigen::VectorXcd realify(Eigen::VectorXcd v) {
  fix_phase(v);
  Eigen::VectorXcd r = v.real().cast<cplx>();
  const double nrm = r.norm();
  return nrm > 0.0 ? Eigen::VectorXcd(r / nrm) : v;
}

struct Candidates {
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;
};

Candidates dense_candidates(const Eigen::MatrixXd& A) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, true);
  if (es.info() != Eigen::Success)
    fail(ErrorKind::NonConvergence, "dense eigensolver: QR iteration failed");
  Candidates c{es.eigenvalues(), es.eigenvectors()};
  const auto order = modulus_order(c.values);
  Candidates sorted{Eigen::VectorXcd(c.values.size()), Eigen::MatrixXcd(c.vectors.rows(), c.vectors.cols())};
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted.values[static_cast<Eigen::Index>(i)] = c.values[order[i]];
    sorted.vectors.col(static_cast<Eigen::Index>(i)) = c.vectors.col(order[i]);
  }
  return sorted;
}

// Left eigenvector with eigenvalue zeta by inverse iteration on T^T.
Eigen::VectorXcd inverse_iteration_left(const CscMatrix& T, cplx zeta, std::uint64_t seed) {
  const std::int64_t n = T.dim();
  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(T.nonzeros() + static_cast<std::size_t>(n));
  for (std::int64_t j = 0; j < n; ++j)
    for (auto k = T.col_ptr()[j]; k < T.col_ptr()[j + 1]; ++k)
      trip.emplace_back(static_cast<int>(j), static_cast<int>(T.row_idx()[k]), cplx(T.values()[k]));
  // Perturb the shift so the factorization stays nonsingular.
  const cplx shift = zeta * (1.0 + 1e-10) + cplx(1e-12, 1e-12);
  for (std::int64_t i = 0; i < n; ++i) trip.emplace_back(static_cast<int>(i), static_cast<int>(i), -shift);
  Eigen::SparseMatrix<cplx> B(n, n);
  B.setFromTriplets(trip.begin(), trip.end());
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
  lu.compute(B);
  if (lu.info() != Eigen::Success)
    fail(ErrorKind::NonConvergence, "left eigenvector: factorization failed");
  std::mt19937_64 rng(seed);
  Eigen::VectorXcd v = random_unit(n, rng);
  for (int it = 0; it < 4; ++it) {
    v = lu.solve(v);
    v /= v.norm();
  }
  return v;
}

struct Assembled {
  cplx value;
  Eigen::VectorXcd right;
};

// Conjugate-closed list of the leading right pairs (at least k entries if
// available, never splitting a complex pair).
std::vector<Assembled> assemble_right(const Candidates& c, int k, double real_tol) {
  std::vector<Assembled> out;
  std::vector<char> used(static_cast<std::size_t>(c.values.size()), 0);
  for (Eigen::Index i = 0; i < c.values.size() && static_cast<int>(out.size()) < k; ++i) {
    if (used[i]) continue;
    used[i] = 1;
    const cplx z = c.values[i];
    const double scale = std::max(1.0, std::abs(z));
    if (std::abs(z.imag()) <= real_tol * scale) {
      out.push_back({cplx(z.real(), 0.0), realify(c.vectors.col(i))});
      continue;
    }
    // Locate the conjugate partner among the remaining candidates.
    Eigen::Index partner = -1;
    double best = 1e-6 * scale;
    for (Eigen::Index j = 0; j < c.values.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(c.values[j] - std::conj(z));
      if (d <= best) {
        best = d;
        partner = j;
      }
    }
    if (partner >= 0) used[partner] = 1;
    Eigen::VectorXcd v = c.vectors.col(i);
    cplx zu = z;
    if (zu.imag() < 0.0) {
      zu = std::conj(zu);
      v = v.conjugate();
    }
    if (partner >= 0) {
      // Symmetrize: average the two estimates of the upper eigenvalue.
      zu = 0.5 * (zu + std::conj(c.values[partner].imag() < 0.0 ? c.values[partner]
                                                                 : std::conj(c.values[partner])));
    }
    fix_phase(v);
    v /= v.norm();
    out.push_back({zu, v});
    out.push_back({std::conj(zu), v.conjugate()});
  }
  return out;
}

std::vector<EigenPair> finalize(const CscMatrix& T, std::vector<Assembled> right,
                                const Candidates& left_cand, const EigenOptions& opts) {
  const std::int64_t n = T.dim();
  std::vector<EigenPair> pairs(right.size());
  for (std::size_t i = 0; i < right.size(); ++i) {
    pairs[i].value = right[i].value;
    pairs[i].right = right[i].right;
  }

  // Clusters among entries with Im >= 0; conjugates are filled afterwards.
  std::vector<int> cluster(right.size(), -1);
  int n_clusters = 0;
  for (std::size_t i = 0; i < right.size(); ++i) {
    if (right[i].value.imag() < 0.0) continue;
    if (cluster[i] < 0) cluster[i] = n_clusters++;
    for (std::size_t j = i + 1; j < right.size(); ++j) {
      if (right[j].value.imag() < 0.0) continue;
      const double tol = 1e-10 * std::max(1.0, std::abs(right[i].value));
      if (std::abs(right[i].value - right[j].value) <= tol) {
        if (cluster[j] < 0)
          cluster[j] = cluster[i];
      }
    }
  }

  std::vector<char> left_used(static_cast<std::size_t>(left_cand.values.size()), 0);
  for (int c = 0; c < n_clusters; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < right.size(); ++i)
      if (cluster[i] == c) members.push_back(i);
    const auto s = static_cast<Eigen::Index>(members.size());
    const cplx center = right[members.front()].value;
    const bool is_real = center.imag() == 0.0;

    Eigen::MatrixXcd R(n, s);
    for (Eigen::Index q = 0; q < s; ++q) R.col(q) = right[members[q]].right;
    // Every unused left candidate at this eigenvalue (T^T phi = mu phi, left = conj(phi)).
    std::vector<Eigen::VectorXcd> cols;
    const double dist = 1e-6 * std::max(1.0, std::abs(center));
    for (Eigen::Index j = 0; j < left_cand.values.size(); ++j) {
      if (left_used[j] || std::abs(left_cand.values[j] - center) > dist) continue;
      left_used[j] = 1;
      cols.push_back(left_cand.vectors.col(j));
    }
    for (Eigen::Index q = static_cast<Eigen::Index>(cols.size()); q < s; ++q)
      cols.push_back(inverse_iteration_left(T, center, opts.start_seed + static_cast<std::uint64_t>(q)));
    Eigen::MatrixXcd L(n, static_cast<Eigen::Index>(cols.size()));
    for (Eigen::Index q = 0; q < L.cols(); ++q) {
      Eigen::VectorXcd phi = cols[static_cast<std::size_t>(q)];
      if (is_real) phi = realify(phi);
      L.col(q) = phi.conjugate();
    }
    // Left basis within the left eigenspace with Lb^H R = I:
    // Lb = L G (G^H G)^{-1}, G = L^H R.
    const Eigen::MatrixXcd G = L.adjoint() * R;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(G.adjoint() * G);
    if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-300)
      fail(ErrorKind::Normalization, "leading_eigenpairs: left and right eigenvectors are orthogonal");
    const Eigen::MatrixXcd Lb = L * G * lu.inverse();
    for (Eigen::Index q = 0; q < s; ++q) pairs[members[q]].left = Lb.col(q);
  }

  // Conjugate partners of complex entries.
  for (std::size_t i = 0; i < right.size(); ++i) {
    if (right[i].value.imag() >= 0.0) continue;
    // right list places each upper entry directly before its conjugate.
    pairs[i].left = pairs[i - 1].left.conjugate();
  }

  // Two-sided Rayleigh quotient refinement and residuals.
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto& p = pairs[i];
    if (p.value.imag() < 0.0) continue;
    const Eigen::VectorXcd Tr = T.apply(p.right);
    const cplx denom = p.left.dot(p.right);
    const double lnorm = p.left.norm();
    const Eigen::VectorXcd Tl = T.apply_transpose(Eigen::VectorXcd(p.left.conjugate())).conjugate();
    p.left_residual = (Tl - std::conj(p.value) * p.left).norm() / lnorm;
    if (p.left_residual <= std::max(opts.tol, 1e-8) && std::abs(denom) > 1e-14 * lnorm) {
      cplx rq = p.left.dot(Tr) / denom;
      if (p.value.imag() == 0.0) rq = cplx(rq.real(), 0.0);
      p.value = rq;
    }
    p.residual = (Tr - p.value * p.right).norm();
    if (i + 1 < pairs.size() && p.value.imag() > 0.0) {
      pairs[i + 1].value = std::conj(p.value);
      pairs[i + 1].residual = p.residual;
      pairs[i + 1].left_residual = p.left_residual;
    }
  }
  return pairs;
}

} // namespace

RitzPairs arnoldi_largest(const LinearOperator& op, std::int64_t n, int nev,
                          const EigenOptions& opts) {
  if (nev < 1 || nev >= n) fail(ErrorKind::InvalidArgument, "arnoldi: need 1 <= nev < n");
  int m = opts.krylov_dim > 0 ? opts.krylov_dim : std::max(2 * nev + 10, 40);
  m = static_cast<int>(std::min<std::int64_t>(m, n));
  if (m < nev + 2 && m < n)
    fail(ErrorKind::InvalidArgument, "arnoldi: Krylov dimension must exceed nev + 1");

  std::mt19937_64 rng(opts.start_seed);
  Eigen::MatrixXcd V = Eigen::MatrixXcd::Zero(n, m);
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m, m);
  Eigen::VectorXcd f = Eigen::VectorXcd::Zero(n);
  Eigen::VectorXcd w(n);
  V.col(0) = random_unit(n, rng);

  auto orthogonalize = [&](Eigen::VectorXcd& x, Eigen::Index cols) {
    Eigen::VectorXcd h = V.leftCols(cols).adjoint() * x;
    x -= V.leftCols(cols) * h;
    // Second classical Gram-Schmidt pass (DGKS).
    Eigen::VectorXcd h2 = V.leftCols(cols).adjoint() * x;
    x -= V.leftCols(cols) * h2;
    return Eigen::VectorXcd(h + h2);
  };

  auto extend = [&](int from) {
    for (int j = from; j < m; ++j) {
      if (j > 0) {
        const double beta = f.norm();
        const double hscale = std::max(1.0, H.topLeftCorner(j, j).cwiseAbs().maxCoeff());
        if (beta <= 1e-13 * hscale) {
          // Invariant subspace found: continue with a fresh direction.
          Eigen::VectorXcd r = random_unit(n, rng);
          orthogonalize(r, j);
          V.col(j) = r / r.norm();
          H(j, j - 1) = 0.0;
        } else {
          V.col(j) = f / beta;
          H(j, j - 1) = beta;
        }
      }
      op(V.col(j), w);
      const Eigen::VectorXcd h = orthogonalize(w, j + 1);
      H.col(j).head(j + 1) = h;
      f = w;
    }
  };

  int kcur = 0;
  for (int restart = 0;; ++restart) {
    extend(kcur);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(H, true);
    if (es.info() != Eigen::Success)
      fail(ErrorKind::NonConvergence, "arnoldi: Hessenberg eigensolver failed");
    const Eigen::VectorXcd theta = es.eigenvalues();
    const Eigen::MatrixXcd Y = es.eigenvectors();
    const double beta_m = (m == n) ? 0.0 : f.norm();
    const auto order = modulus_order(theta);

    Eigen::VectorXd resid(m);
    for (int i = 0; i < m; ++i) resid[i] = beta_m * std::abs(Y(m - 1, i)) / Y.col(i).norm();

    int nconv = 0;
    for (int q = 0; q < nev; ++q) {
      const int i = order[q];
      if (resid[i] <= opts.tol * std::max(1.0, std::abs(theta[i]))) ++nconv;
    }
    if (nconv == nev || m == n) {
      RitzPairs out;
      out.values.resize(nev);
      out.vectors.resize(n, nev);
      out.residuals.resize(nev);
      out.restarts = restart;
      for (int q = 0; q < nev; ++q) {
        const int i = order[q];
        Eigen::VectorXcd x = V * Y.col(i);
        out.values[q] = theta[i];
        out.vectors.col(q) = x / x.norm();
        out.residuals[q] = resid[i];
      }
      return out;
    }
    if (restart >= opts.max_restarts)
      fail(ErrorKind::NonConvergence,
           "arnoldi: " + std::to_string(nconv) + " of " + std::to_string(nev) +
               " eigenpairs converged after " + std::to_string(restart) + " restarts");

    int keep = nev + std::min(nconv, (m - nev) / 2);
    keep = std::min(keep, m - 1);
    keep = std::max(keep, 1);

    // Exact shifts: the unwanted Ritz values.
    Eigen::MatrixXcd Q = Eigen::MatrixXcd::Identity(m, m);
    for (int q = keep; q < m; ++q) {
      const cplx mu = theta[order[q]];
      Eigen::MatrixXcd Hs = H;
      Hs.diagonal().array() -= mu;
      Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Hs);
      const Eigen::MatrixXcd Qi = qr.householderQ();
      H = Qi.adjoint() * H * Qi;
      Q = Q * Qi;
    }
    for (int j = 0; j < m; ++j)
      for (int i = j + 2; i < m; ++i) H(i, j) = 0.0;

    const Eigen::VectorXcd fnew = V * Q.col(keep) * H(keep, keep - 1) + f * Q(m - 1, keep - 1);
    const Eigen::MatrixXcd Vk = V * Q.leftCols(keep);
    V.leftCols(keep) = Vk;
    V.rightCols(m - keep).setZero();
    Eigen::MatrixXcd Hk = H.topLeftCorner(keep, keep);
    H.setZero();
    H.topLeftCorner(keep, keep) = Hk;
    f = fnew;
    kcur = keep;
  }
}

Eigen::VectorXcd dense_eigenvalues(const Eigen::MatrixXd& A) {
  return dense_candidates(A).values;
}

std::vector<EigenPair> leading_eigenpairs(const CscMatrix& T, const EigenOptions& opts) {
  const std::int64_t n = T.dim();
  if (opts.k < 1 || opts.k > n)
    fail(ErrorKind::InvalidArgument, "leading_eigenpairs: need 1 <= k <= dim (k=" +
                                         std::to_string(opts.k) + ", dim=" + std::to_string(n) + ")");
  // k == dim asks for the whole spectrum, which only the dense path provides.
  const bool dense = opts.method == EigenMethod::Dense || opts.k == n ||
                     (opts.method == EigenMethod::Auto && n <= opts.dense_threshold);
  const double real_tol = std::max(1e-8, 100.0 * opts.tol);

  Candidates right_cand, left_cand;
  if (dense) {
    const Eigen::MatrixXd A = T.to_dense();
    right_cand = dense_candidates(A);
    left_cand = dense_candidates(A.transpose());
  } else {
    const LinearOperator apply = [&T](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) { y = T.apply(x); };
    const LinearOperator apply_t = [&T](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
      y = T.apply_transpose(x);
    };
    // One extra wanted pair so the conjugate partner of the k-th is usually
    // computed rather than synthesized.
    const int nev = static_cast<int>(std::min<std::int64_t>(opts.k + 1, n - 1));
    auto r = arnoldi_largest(apply, n, nev, opts);
    right_cand = {r.values, r.vectors};
    EigenOptions lopts = opts;
    const int nev_left = static_cast<int>(std::min<std::int64_t>(opts.k + 3, n - 1));
    if (lopts.krylov_dim > 0 && lopts.krylov_dim < nev_left + 2) lopts.krylov_dim = nev_left + 2;
    auto l = arnoldi_largest(apply_t, n, nev_left, lopts);
    left_cand = {l.values, l.vectors};
  }
  auto right = assemble_right(right_cand, opts.k, real_tol);
  return finalize(T, std::move(right), left_cand, opts);
}

std::vector<EigenPair> leading_eigenpairs(const TransitionMatrix& T, const EigenOptions& opts) {
  return leading_eigenpairs(T.matrix, opts);
}

} // namespace rpres
