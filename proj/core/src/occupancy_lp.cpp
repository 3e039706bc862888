#include "cmdp/occupancy_lp.hpp"

#include <limits>

namespace cmdp {

Vector flatten_pairs(const Matrix& table) {
    Vector out(table.size());
    const Eigen::Index cols = table.cols();
    for (Eigen::Index s = 0; s < table.rows(); ++s) {
        for (Eigen::Index a = 0; a < cols; ++a) out(s * cols + a) = table(s, a);
    }
    return out;
}

Matrix unflatten_pairs(const Vector& flat, int n_states, int n_actions) {
    Matrix out(n_states, n_actions);
    for (int s = 0; s < n_states; ++s) {
        for (int a = 0; a < n_actions; ++a) out(s, a) = flat(s * n_actions + a);
    }
    return out;
}

LpProblem build_occupancy_lp(const Cmdp& cmdp, const Perturbation& xi) {
    require_valid(cmdp);
    const int m = cmdp.n_constraints();
    if (xi.xi.size() != m) throw DimensionError("perturbation length does not match the number of constraints");
    const double scale = 1.0 / (1.0 - cmdp.gamma);

    LpProblem lp;
    lp.cost = scale * flatten_pairs(cmdp.rewards[0]);
    lp.a_eq = -cmdp.gamma * cmdp.transition.transpose();
    for (int s = 0; s < cmdp.n_states; ++s) {
        for (int a = 0; a < cmdp.n_actions; ++a) lp.a_eq(s, cmdp.pair(s, a)) += 1.0;
    }
    lp.b_eq = (1.0 - cmdp.gamma) * cmdp.initial_dist;
    lp.a_ineq = Matrix(m, cmdp.n_pairs());
    lp.b_ineq = Vector(m);
    for (int i = 0; i < m; ++i) {
        lp.a_ineq.row(i) = -scale * flatten_pairs(cmdp.rewards[i + 1]).transpose();
        lp.b_ineq(i) = -(cmdp.thresholds(i) + xi.xi(i));
    }
    return lp;
}

PrimalOptimum solve_occupancy(const Cmdp& cmdp, const Perturbation& xi, const LpOptions& options) {
    const LpProblem lp = build_occupancy_lp(cmdp, xi);
    const LpSolution sol = solve_lp(lp, options);
    PrimalOptimum out;
    out.status = sol.status;
    out.iterations = sol.iterations;
    if (sol.status == LpStatus::Unbounded) {
        throw LpError("occupancy LP reported unbounded; its feasible set is compact");
    }
    if (sol.status != LpStatus::Optimal) return out;
    out.p_star = sol.objective;
    out.rho = OccupationMeasure{unflatten_pairs(sol.x, cmdp.n_states, cmdp.n_actions), cmdp.gamma};
    out.policy = policy_from_occupation(out.rho);
    out.lambda = sol.duals;
    out.degenerate = sol.degenerate;
    return out;
}

std::optional<double> perturbation_value(const Cmdp& cmdp, const Perturbation& xi, const LpOptions& options) {
    const PrimalOptimum opt = solve_occupancy(cmdp, xi, options);
    if (opt.status != LpStatus::Optimal) return std::nullopt;
    return opt.p_star;
}

PrimalOptimum primal_optimum(const Cmdp& cmdp, const LpOptions& options) {
    return solve_occupancy(cmdp, Perturbation::zero(cmdp.n_constraints()), options);
}

double concavity_probe(const Cmdp& cmdp, const Perturbation& xi1, const Perturbation& xi2, double mu,
                       const LpOptions& options) {
    const auto p1 = perturbation_value(cmdp, xi1, options);
    const auto p2 = perturbation_value(cmdp, xi2, options);
    if (!p1 || !p2) return std::numeric_limits<double>::infinity();
    const Perturbation mid{mu * xi1.xi + (1.0 - mu) * xi2.xi};
    const auto pm = perturbation_value(cmdp, mid, options);
    // A convex combination of feasible perturbations is feasible; an infeasible
    // midpoint here would be a solver failure, reported as -infinity.
    if (!pm) return -std::numeric_limits<double>::infinity();
    return *pm - mu * *p1 - (1.0 - mu) * *p2;
}

}  // namespace cmdp
