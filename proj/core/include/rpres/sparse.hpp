#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace rpres {

struct Triplet {
  std::int64_t row;
  std::int64_t col;
  double value;
};

/// Square compressed-sparse-column matrix. Row indices within a column are
/// strictly increasing; every product accumulates in a fixed order.
class CscMatrix {
public:
  CscMatrix() = default;
  /// Triplets may come in any order; duplicates are summed.
  CscMatrix(std::int64_t dim, std::vector<Triplet> triplets);

  static CscMatrix from_dense(const Eigen::MatrixXd& dense, double drop_below = 0.0);

  std::int64_t dim() const { return dim_; }
  std::size_t nonzeros() const { return values_.size(); }

  const std::vector<std::int64_t>& col_ptr() const { return col_ptr_; }
  const std::vector<std::int64_t>& row_idx() const { return row_idx_; }
  const std::vector<double>& values() const { return values_; }

  /// y = A x
  template <typename Vec> Vec apply(const Vec& x) const;
  /// y = A^T x
  template <typename Vec> Vec apply_transpose(const Vec& x) const;

  Eigen::VectorXd column_sums() const;
  Eigen::MatrixXd to_dense() const;
  CscMatrix transposed() const;

private:
  std::int64_t dim_ = 0;
  std::vector<std::int64_t> col_ptr_{0};
  std::vector<std::int64_t> row_idx_;
  std::vector<double> values_;
};

template <typename Vec> Vec CscMatrix::apply(const Vec& x) const {
  Vec y = Vec::Zero(dim_);
  for (std::int64_t j = 0; j < dim_; ++j) {
    const auto xj = x[j];
    for (auto k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) y[row_idx_[k]] += values_[k] * xj;
  }
  return y;
}

template <typename Vec> Vec CscMatrix::apply_transpose(const Vec& x) const {
  Vec y(dim_);
  for (std::int64_t j = 0; j < dim_; ++j) {
    typename Vec::Scalar acc(0);
    for (auto k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) acc += values_[k] * x[row_idx_[k]];
    y[j] = acc;
  }
  return y;
}

} // namespace rpres
