#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "rpres/resonance.hpp"
#include "rpres/sparse.hpp"

namespace rpres::testing {

/// Random column-stochastic sparse matrix: each column has between 1 and
/// max_per_col nonzeros, always including the diagonal so the chain is aperiodic.
inline CscMatrix random_stochastic(std::int64_t dim, int max_per_col, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> row(0, dim - 1);
  std::uniform_int_distribution<int> count(1, max_per_col);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<Triplet> t;
  for (std::int64_t j = 0; j < dim; ++j) {
    std::vector<std::int64_t> rows{j, (j + 1) % dim};
    const int c = count(rng);
    for (int k = 0; k < c; ++k) rows.push_back(row(rng));
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    std::vector<double> w;
    double sum = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      w.push_back(u(rng));
      sum += w.back();
    }
    for (std::size_t k = 0; k < rows.size(); ++k) t.push_back({rows[k], j, w[k] / sum});
  }
  return CscMatrix(dim, std::move(t));
}

/// Largest distance after optimally matching two equal-size spectra.
inline double matched_distance(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  const auto n = static_cast<Eigen::Index>(a.size());
  if (static_cast<Eigen::Index>(b.size()) != n) return std::numeric_limits<double>::infinity();
  Eigen::MatrixXd score(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) score(i, j) = -std::abs(a[i] - b[j]);
  const auto assign = max_weight_assignment(score);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (assign[i] < 0) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, std::abs(a[i] - b[assign[i]]));
  }
  return worst;
}

/// Resonance order: descending Re, then ascending |Im|, positive Im first.
inline void sort_like_resonances(std::vector<cplx>& v) {
  std::sort(v.begin(), v.end(), [](cplx a, cplx b) {
    if (a.real() != b.real()) return a.real() > b.real();
    if (std::abs(a.imag()) != std::abs(b.imag())) return std::abs(a.imag()) < std::abs(b.imag());
    return a.imag() > b.imag();
  });
}

inline std::vector<cplx> values_of(const std::vector<EigenPair>& pairs) {
  std::vector<cplx> v;
  for (const auto& p : pairs) v.push_back(p.value);
  return v;
}

} // namespace rpres::testing
