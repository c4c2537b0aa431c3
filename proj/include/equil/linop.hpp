#pragma once

#include <atomic>
#include <cstdint>

#include "equil/common.hpp"

namespace equil {

/// Abstract linear map A : R^cols -> R^rows, exposed only through
/// matrix-vector products. Algorithms that respect this interface run
/// matrix-free; entrywise access lives on ExplicitMatrix alone.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;

  virtual Index rows() const = 0;
  virtual Index cols() const = 0;

  /// y = A x. Requires x.size() == cols().
  virtual Vec apply(const Vec& x) const = 0;

  /// x = A^T y. Requires y.size() == rows().
  virtual Vec apply_adjoint(const Vec& y) const = 0;
};

/// diag(d) * A * diag(e) without materializing the product. Holds a
/// reference to the inner operator; the caller keeps it alive.
class ScaledOperator final : public LinearOperator {
 public:
  ScaledOperator(const LinearOperator& inner, Vec d, Vec e);

  Index rows() const override { return inner_->rows(); }
  Index cols() const override { return inner_->cols(); }
  Vec apply(const Vec& x) const override;
  Vec apply_adjoint(const Vec& y) const override;

  const Vec& d() const { return d_; }
  const Vec& e() const { return e_; }

 private:
  const LinearOperator* inner_;
  Vec d_, e_;
};

/// Convenience factory matching the mathematical notation D A E.
ScaledOperator scale(const LinearOperator& op, Vec d, Vec e);

/// View of A^T as an operator (apply and apply_adjoint swapped).
class AdjointOperator final : public LinearOperator {
 public:
  explicit AdjointOperator(const LinearOperator& inner) : inner_(&inner) {}

  Index rows() const override { return inner_->cols(); }
  Index cols() const override { return inner_->rows(); }
  Vec apply(const Vec& x) const override { return inner_->apply_adjoint(x); }
  Vec apply_adjoint(const Vec& y) const override { return inner_->apply(y); }

 private:
  const LinearOperator* inner_;
};

/// Pass-through wrapper that counts matrix-vector products. Used to audit
/// the one-apply-plus-one-adjoint-per-iteration accounting.
class CountingOperator final : public LinearOperator {
 public:
  explicit CountingOperator(const LinearOperator& inner) : inner_(&inner) {}

  Index rows() const override { return inner_->rows(); }
  Index cols() const override { return inner_->cols(); }

  Vec apply(const Vec& x) const override {
    ++apply_count_;
    return inner_->apply(x);
  }
  Vec apply_adjoint(const Vec& y) const override {
    ++adjoint_count_;
    return inner_->apply_adjoint(y);
  }

  long long apply_count() const { return apply_count_.load(); }
  long long adjoint_count() const { return adjoint_count_.load(); }
  void reset_counts() {
    apply_count_ = 0;
    adjoint_count_ = 0;
  }

 private:
  const LinearOperator* inner_;
  mutable std::atomic<long long> apply_count_{0};
  mutable std::atomic<long long> adjoint_count_{0};
};

}  // namespace equil
