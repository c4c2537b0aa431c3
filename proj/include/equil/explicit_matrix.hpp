#pragma once

#include <utility>
#include <vector>

#include "equil/linop.hpp"

namespace equil {

/// Concrete matrix with entrywise access, either dense (column-major Eigen
/// storage) or sparse (CSR). Sparse construction rejects duplicate and
/// out-of-range coordinates.
class ExplicitMatrix final : public LinearOperator {
 public:
  struct Entry {
    Index row;
    Index col;
    double value;
  };

  static ExplicitMatrix dense(Mat values);
  static ExplicitMatrix sparse(Index rows, Index cols,
                               std::vector<Entry> entries);
  static ExplicitMatrix identity(Index n);

  Index rows() const override { return rows_; }
  Index cols() const override { return cols_; }
  Vec apply(const Vec& x) const override;
  Vec apply_adjoint(const Vec& y) const override;

  bool is_sparse() const { return sparse_; }

  /// Stored entry count: m*n when dense, structural nonzeros when sparse.
  Index stored_entries() const;

  /// Visits every stored entry as f(row, col, value).
  template <class F>
  void for_each_entry(F&& f) const {
    if (sparse_) {
      for (Index i = 0; i < rows_; ++i) {
        for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
          f(i, col_idx_[k], values_[k]);
        }
      }
    } else {
      for (Index i = 0; i < rows_; ++i) {
        for (Index j = 0; j < cols_; ++j) f(i, j, dense_(i, j));
      }
    }
  }

  /// Visits the stored entries of one row as f(col, value).
  template <class F>
  void for_each_in_row(Index i, F&& f) const {
    detail::require(i >= 0 && i < rows_, "for_each_in_row: row out of range");
    if (sparse_) {
      for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
        f(col_idx_[k], values_[k]);
      }
    } else {
      for (Index j = 0; j < cols_; ++j) f(j, dense_(i, j));
    }
  }

  Vec row_norms_sq() const;
  Vec col_norms_sq() const;
  double frobenius_sq() const;

  ExplicitMatrix transposed() const;

  Mat to_dense() const;

  /// diag(d) * A * diag(e) materialized densely; diagnostic use only.
  Mat scaled_dense(const Vec& d, const Vec& e) const;

 private:
  ExplicitMatrix() = default;

  Index rows_ = 0;
  Index cols_ = 0;
  bool sparse_ = false;
  Mat dense_;
  std::vector<Index> row_ptr_;
  std::vector<Index> col_idx_;
  std::vector<double> values_;
};

/// Exact row norms squared |A|^2 1 from entrywise access; the deterministic
/// counterpart of the stochastic estimator.
Vec row_norms_sq_exact(const ExplicitMatrix& A);

}  // namespace equil
