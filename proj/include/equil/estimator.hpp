#pragma once

#include "equil/linop.hpp"
#include "equil/rng.hpp"

namespace equil {

/// One-sample estimate of the squared row norms of op: draws a Rademacher
/// probe s and returns |op(s)|^2 elementwise. Unbiased because
/// E[(b^T s)^2] = |b|^2 for any fixed row b. Costs exactly one apply and
/// cols() sign draws.
Vec estimate_row_norms_sq(const LinearOperator& op, SeededRng& rng);

}  // namespace equil
