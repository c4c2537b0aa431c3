#include "equil/estimator.hpp"

namespace equil {

Vec estimate_row_norms_sq(const LinearOperator& op, SeededRng& rng) {
  Vec s = rademacher(op.cols(), rng);
  Vec y = op.apply(s);
  return y.cwiseProduct(y);
}

}  // namespace equil
