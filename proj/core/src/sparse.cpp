#include "rpres/sparse.hpp"

#include <algorithm>

#include "rpres/error.hpp"

namespace rpres {

CscMatrix::CscMatrix(std::int64_t dim, std::vector<Triplet> triplets) : dim_(dim) {
  if (dim < 0) fail(ErrorKind::InvalidArgument, "CscMatrix: negative dimension");
  for (const auto& t : triplets)
    if (t.row < 0 || t.row >= dim || t.col < 0 || t.col >= dim)
      fail(ErrorKind::InvalidArgument, "CscMatrix: triplet index out of range");
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });
  col_ptr_.assign(static_cast<std::size_t>(dim) + 1, 0);
  row_idx_.reserve(triplets.size());
  values_.reserve(triplets.size());
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const auto& t = triplets[k];
    if (!row_idx_.empty() && k > 0 && triplets[k - 1].col == t.col &&
        triplets[k - 1].row == t.row) {
      values_.back() += t.value;
      continue;
    }
    row_idx_.push_back(t.row);
    values_.push_back(t.value);
    ++col_ptr_[static_cast<std::size_t>(t.col) + 1];
  }
  for (std::size_t j = 0; j < static_cast<std::size_t>(dim); ++j) col_ptr_[j + 1] += col_ptr_[j];
}

CscMatrix CscMatrix::from_dense(const Eigen::MatrixXd& dense, double drop_below) {
  if (dense.rows() != dense.cols()) fail(ErrorKind::InvalidArgument, "CscMatrix: not square");
  std::vector<Triplet> t;
  for (Eigen::Index j = 0; j < dense.cols(); ++j)
    for (Eigen::Index i = 0; i < dense.rows(); ++i)
      if (dense(i, j) != 0.0 && std::abs(dense(i, j)) >= drop_below) t.push_back({i, j, dense(i, j)});
  return CscMatrix(dense.rows(), std::move(t));
}

Eigen::VectorXd CscMatrix::column_sums() const {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(dim_);
  for (std::int64_t j = 0; j < dim_; ++j)
    for (auto k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) s[j] += values_[k];
  return s;
}

Eigen::MatrixXd CscMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(dim_, dim_);
  for (std::int64_t j = 0; j < dim_; ++j)
    for (auto k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) d(row_idx_[k], j) = values_[k];
  return d;
}

CscMatrix CscMatrix::transposed() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (std::int64_t j = 0; j < dim_; ++j)
    for (auto k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) t.push_back({j, row_idx_[k], values_[k]});
  return CscMatrix(dim_, std::move(t));
}

} // namespace rpres
