#pragma once

#include "cmdp/cmdp.hpp"

namespace cmdp {

/// Solves A X = B by partial-pivot LU with one round of iterative refinement
/// when the scaled residual exceeds `tol`. Throws NumericalError if it still does.
Matrix solve_certified(const Matrix& a, const Matrix& b, double tol);

}  // namespace cmdp
