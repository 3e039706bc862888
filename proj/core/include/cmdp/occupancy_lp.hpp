#pragma once

#include "cmdp/cmdp.hpp"
#include "cmdp/lp.hpp"
#include "cmdp/policy_eval.hpp"

#include <optional>

namespace cmdp {

/// Threshold shift: the perturbed problem requires V_i >= c_i + xi_i.
struct Perturbation {
    Vector xi;

    static Perturbation zero(int m) { return {Vector::Zero(m)}; }
};

/// Flattens an n_states x n_actions table in state-major order (pair index).
Vector flatten_pairs(const Matrix& table);
Matrix unflatten_pairs(const Vector& flat, int n_states, int n_actions);

/**
 * Occupancy-measure LP over rho(s,a) >= 0:
 *   maximize   (1/(1-gamma)) <r_0, rho>
 *   subject to sum_a rho(s,a) - gamma sum_{s',a'} P(s|s',a') rho(s',a') = (1-gamma) p0(s)
 *              (1/(1-gamma)) <r_i, rho> >= c_i + xi_i
 * The value constraints are stored negated as <= rows, so their LP duals are
 * the Lagrange multipliers of the constrained problem.
 */
LpProblem build_occupancy_lp(const Cmdp& cmdp, const Perturbation& xi);

/// P(xi); nullopt stands for an infeasible perturbation (value -infinity).
std::optional<double> perturbation_value(const Cmdp& cmdp, const Perturbation& xi,
                                         const LpOptions& options = {});

struct PrimalOptimum {
    LpStatus status = LpStatus::Infeasible;
    double p_star = 0.0;
    OccupationMeasure rho;
    Policy policy;
    Vector lambda;  // LP duals of the value constraints
    bool degenerate = false;
    int iterations = 0;
};

/// Solves the perturbed occupancy LP and recovers the policy from rho.
PrimalOptimum solve_occupancy(const Cmdp& cmdp, const Perturbation& xi, const LpOptions& options = {});

/// P* and an optimal policy of the unperturbed problem.
PrimalOptimum primal_optimum(const Cmdp& cmdp, const LpOptions& options = {});

/// P(mu xi1 + (1-mu) xi2) - mu P(xi1) - (1-mu) P(xi2); +infinity if an endpoint is infeasible.
double concavity_probe(const Cmdp& cmdp, const Perturbation& xi1, const Perturbation& xi2, double mu,
                       const LpOptions& options = {});

}  // namespace cmdp
