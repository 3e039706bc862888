#pragma once

#include "cmdp/cmdp.hpp"
#include "cmdp/tolerances.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>

namespace cmdp {

/**
 * maximize    cost' x
 * subject to  a_eq x   = b_eq
 *             a_ineq x <= b_ineq
 *             x >= 0
 */
struct LpProblem {
    Vector cost;
    Matrix a_eq;
    Vector b_eq;
    Matrix a_ineq;
    Vector b_ineq;

    int n_vars() const { return static_cast<int>(cost.size()); }
    int n_eq() const { return static_cast<int>(b_eq.size()); }
    int n_ineq() const { return static_cast<int>(b_ineq.size()); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

std::string to_string(LpStatus status);

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    Vector x;
    double objective = 0.0;
    Vector duals_eq;
    Vector duals;  // one per inequality row, >= 0 at optimum
    double primal_residual = 0.0;
    double complementarity_residual = 0.0;
    double phase_one_objective = 0.0;
    int iterations = 0;
    bool degenerate = false;  // a basic variable sits at zero; duals may be non-unique
};

struct LpOptions {
    double pivot_tol = kDefaultTolerances.lp_pivot;
    double infeasible_tol = kDefaultTolerances.lp_infeasible;
    double residual_tol = kDefaultTolerances.lp_residual;
    // 0 means 50 * (variables + constraints).
    int max_iterations = 0;
};

/// Iteration cap exceeded, unbounded occupancy LP, or residuals that fail certification.
class LpError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two-phase dense primal simplex with Bland's rule. Duals are read from the final basis.
LpSolution solve_lp(const LpProblem& lp, const LpOptions& options = {});

/// Plain-text dump: cost, A_eq | b_eq and A_ineq | b_ineq blocks, row-major.
void write_lp_text(std::ostream& out, const LpProblem& lp);

}  // namespace cmdp
