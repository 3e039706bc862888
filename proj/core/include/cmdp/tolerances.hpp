#pragma once

namespace cmdp {

/// Numeric tolerances shared by the solvers and the certificates.
struct Tolerances {
    double probability_sum = 1e-12;  // row sums of P, p0 and policies
    double linear_solve = 1e-10;     // residual of dense policy-evaluation solves
    double identity = 1e-9;          // cross-checks between exact routes
    double bellman = 1e-10;          // value-iteration residual
    double tie = 1e-10;              // greedy argmax tie window (relative)
    double lp_pivot = 1e-9;
    double lp_infeasible = 1e-8;     // phase-one optimum above this => infeasible
    double lp_residual = 1e-8;
};

inline constexpr Tolerances kDefaultTolerances{};

}  // namespace cmdp
