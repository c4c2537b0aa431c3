#include "equil/linop.hpp"

namespace equil {

ScaledOperator::ScaledOperator(const LinearOperator& inner, Vec d, Vec e)
    : inner_(&inner), d_(std::move(d)), e_(std::move(e)) {
  detail::require(d_.size() == inner_->rows(),
                  "ScaledOperator: d has wrong length");
  detail::require(e_.size() == inner_->cols(),
                  "ScaledOperator: e has wrong length");
  detail::require((d_.array() > 0.0).all(),
                  "ScaledOperator: d must be strictly positive");
  detail::require((e_.array() > 0.0).all(),
                  "ScaledOperator: e must be strictly positive");
}

Vec ScaledOperator::apply(const Vec& x) const {
  detail::require(x.size() == cols(), "ScaledOperator::apply: size mismatch");
  return d_.cwiseProduct(inner_->apply(e_.cwiseProduct(x)));
}

Vec ScaledOperator::apply_adjoint(const Vec& y) const {
  detail::require(y.size() == rows(),
                  "ScaledOperator::apply_adjoint: size mismatch");
  return e_.cwiseProduct(inner_->apply_adjoint(d_.cwiseProduct(y)));
}

ScaledOperator scale(const LinearOperator& op, Vec d, Vec e) {
  return ScaledOperator(op, std::move(d), std::move(e));
}

}  // namespace equil
