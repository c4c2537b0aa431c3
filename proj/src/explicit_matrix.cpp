#include "equil/explicit_matrix.hpp"

#include <algorithm>
#include <string>

namespace equil {

ExplicitMatrix ExplicitMatrix::dense(Mat values) {
  detail::require(values.rows() > 0 && values.cols() > 0,
                  "ExplicitMatrix::dense: dimensions must be positive");
  ExplicitMatrix A;
  A.rows_ = values.rows();
  A.cols_ = values.cols();
  A.sparse_ = false;
  A.dense_ = std::move(values);
  return A;
}

ExplicitMatrix ExplicitMatrix::sparse(Index rows, Index cols,
                                      std::vector<Entry> entries) {
  detail::require(rows > 0 && cols > 0,
                  "ExplicitMatrix::sparse: dimensions must be positive");
  for (const Entry& e : entries) {
    detail::require(e.row >= 0 && e.row < rows && e.col >= 0 && e.col < cols,
                    "ExplicitMatrix::sparse: entry (" + std::to_string(e.row) +
                        ", " + std::to_string(e.col) + ") out of range");
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
  for (std::size_t k = 1; k < entries.size(); ++k) {
    detail::require(entries[k].row != entries[k - 1].row ||
                        entries[k].col != entries[k - 1].col,
                    "ExplicitMatrix::sparse: duplicate entry (" +
                        std::to_string(entries[k].row) + ", " +
                        std::to_string(entries[k].col) + ")");
  }

  ExplicitMatrix A;
  A.rows_ = rows;
  A.cols_ = cols;
  A.sparse_ = true;
  A.row_ptr_.assign(static_cast<std::size_t>(rows) + 1, 0);
  A.col_idx_.resize(entries.size());
  A.values_.resize(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    A.row_ptr_[static_cast<std::size_t>(entries[k].row) + 1]++;
    A.col_idx_[k] = entries[k].col;
    A.values_[k] = entries[k].value;
  }
  for (Index i = 0; i < rows; ++i) {
    A.row_ptr_[static_cast<std::size_t>(i) + 1] +=
        A.row_ptr_[static_cast<std::size_t>(i)];
  }
  return A;
}

ExplicitMatrix ExplicitMatrix::identity(Index n) {
  detail::require(n > 0, "ExplicitMatrix::identity: n must be positive");
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) entries.push_back({i, i, 1.0});
  return sparse(n, n, std::move(entries));
}

Vec ExplicitMatrix::apply(const Vec& x) const {
  detail::require(x.size() == cols_, "ExplicitMatrix::apply: size mismatch");
  if (!sparse_) return dense_ * x;
  Vec y = Vec::Zero(rows_);
  for (Index i = 0; i < rows_; ++i) {
    double acc = 0.0;
    for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      acc += values_[k] * x[col_idx_[k]];
    }
    y[i] = acc;
  }
  return y;
}

Vec ExplicitMatrix::apply_adjoint(const Vec& y) const {
  detail::require(y.size() == rows_,
                  "ExplicitMatrix::apply_adjoint: size mismatch");
  if (!sparse_) return dense_.transpose() * y;
  Vec x = Vec::Zero(cols_);
  for (Index i = 0; i < rows_; ++i) {
    double yi = y[i];
    for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      x[col_idx_[k]] += values_[k] * yi;
    }
  }
  return x;
}

Index ExplicitMatrix::stored_entries() const {
  return sparse_ ? static_cast<Index>(values_.size()) : rows_ * cols_;
}

Vec ExplicitMatrix::row_norms_sq() const {
  Vec r = Vec::Zero(rows_);
  for_each_entry([&](Index i, Index, double v) { r[i] += v * v; });
  return r;
}

Vec ExplicitMatrix::col_norms_sq() const {
  Vec c = Vec::Zero(cols_);
  for_each_entry([&](Index, Index j, double v) { c[j] += v * v; });
  return c;
}

double ExplicitMatrix::frobenius_sq() const {
  double s = 0.0;
  for_each_entry([&](Index, Index, double v) { s += v * v; });
  return s;
}

ExplicitMatrix ExplicitMatrix::transposed() const {
  if (!sparse_) return dense(dense_.transpose());
  std::vector<Entry> entries;
  entries.reserve(values_.size());
  for_each_entry([&](Index i, Index j, double v) {
    entries.push_back({j, i, v});
  });
  return sparse(cols_, rows_, std::move(entries));
}

Mat ExplicitMatrix::to_dense() const {
  if (!sparse_) return dense_;
  Mat out = Mat::Zero(rows_, cols_);
  for_each_entry([&](Index i, Index j, double v) { out(i, j) = v; });
  return out;
}

Mat ExplicitMatrix::scaled_dense(const Vec& d, const Vec& e) const {
  detail::require(d.size() == rows_ && e.size() == cols_,
                  "ExplicitMatrix::scaled_dense: scaling length mismatch");
  Mat out = Mat::Zero(rows_, cols_);
  for_each_entry(
      [&](Index i, Index j, double v) { out(i, j) = d[i] * v * e[j]; });
  return out;
}

Vec row_norms_sq_exact(const ExplicitMatrix& A) { return A.row_norms_sq(); }

}  // namespace equil
