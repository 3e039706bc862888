#include "cmdp/policy_eval.hpp"
#include "cmdp/linalg.hpp"

#include <cmath>

namespace cmdp {

namespace {

void check_policy_shape(const Cmdp& cmdp, const Policy& policy) {
    if (policy.n_states() != cmdp.n_states || policy.n_actions() != cmdp.n_actions) {
        throw DimensionError("policy is " + std::to_string(policy.n_states()) + "x" +
                             std::to_string(policy.n_actions()) + ", model is " +
                             std::to_string(cmdp.n_states) + "x" + std::to_string(cmdp.n_actions));
    }
}

void check_table_shape(const Cmdp& cmdp, const Matrix& r) {
    if (r.rows() != cmdp.n_states || r.cols() != cmdp.n_actions) {
        throw DimensionError("reward table shape does not match the model");
    }
}

Matrix evaluation_operator(const Cmdp& cmdp, const Policy& policy) {
    Matrix a = -cmdp.gamma * transition_under(cmdp, policy);
    a.diagonal().array() += 1.0;
    return a;
}

}  // namespace

Matrix transition_under(const Cmdp& cmdp, const Policy& policy) {
    check_policy_shape(cmdp, policy);
    Matrix p = Matrix::Zero(cmdp.n_states, cmdp.n_states);
    for (int s = 0; s < cmdp.n_states; ++s) {
        for (int a = 0; a < cmdp.n_actions; ++a) {
            const double w = policy.table(s, a);
            if (w != 0.0) p.row(s) += w * cmdp.transition.row(cmdp.pair(s, a));
        }
    }
    return p;
}

Matrix state_values(const Cmdp& cmdp, const Policy& policy, const std::vector<Matrix>& rewards,
                    const Tolerances& tol) {
    check_policy_shape(cmdp, policy);
    Matrix rhs(cmdp.n_states, static_cast<Eigen::Index>(rewards.size()));
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        check_table_shape(cmdp, rewards[i]);
        rhs.col(static_cast<Eigen::Index>(i)) = policy.table.cwiseProduct(rewards[i]).rowwise().sum();
    }
    return solve_certified(evaluation_operator(cmdp, policy), rhs, tol.linear_solve);
}

Matrix action_values(const Cmdp& cmdp, const Policy& policy, const Matrix& reward,
                     const Tolerances& tol) {
    const Vector v = state_values(cmdp, policy, {reward}, tol).col(0);
    const Vector next = cmdp.transition * v;
    Matrix q(cmdp.n_states, cmdp.n_actions);
    for (int s = 0; s < cmdp.n_states; ++s) {
        for (int a = 0; a < cmdp.n_actions; ++a) {
            q(s, a) = reward(s, a) + cmdp.gamma * next(cmdp.pair(s, a));
        }
    }
    return q;
}

ValueVector policy_values(const Cmdp& cmdp, const Policy& policy, const Tolerances& tol) {
    const Matrix v = state_values(cmdp, policy, cmdp.rewards, tol);
    return ValueVector{v.transpose() * cmdp.initial_dist};
}

Vector state_occupancy(const Cmdp& cmdp, const Policy& policy, const Tolerances& tol) {
    const Matrix a = evaluation_operator(cmdp, policy).transpose();
    const Vector rhs = (1.0 - cmdp.gamma) * cmdp.initial_dist;
    return solve_certified(a, rhs, tol.linear_solve).col(0);
}

OccupationMeasure occupation_measure(const Cmdp& cmdp, const Policy& policy, const Tolerances& tol) {
    const Vector d = state_occupancy(cmdp, policy, tol);
    return OccupationMeasure{d.asDiagonal() * policy.table, cmdp.gamma};
}

double value_from_occupation(const OccupationMeasure& rho, const Matrix& reward) {
    if (reward.rows() != rho.rho.rows() || reward.cols() != rho.rho.cols()) {
        throw DimensionError("reward table shape does not match the occupation measure");
    }
    return rho.rho.cwiseProduct(reward).sum() / (1.0 - rho.gamma);
}

double tv_distance(const OccupationMeasure& rho1, const OccupationMeasure& rho2) {
    if (rho1.rho.rows() != rho2.rho.rows() || rho1.rho.cols() != rho2.rho.cols()) {
        throw DimensionError("occupation measures have different shapes");
    }
    return (rho1.rho - rho2.rho).cwiseAbs().sum();
}

double policy_tv_epsilon(const Policy& pi, const Policy& pi_theta) {
    if (pi.table.rows() != pi_theta.table.rows() || pi.table.cols() != pi_theta.table.cols()) {
        throw DimensionError("policies have different shapes");
    }
    if (pi.table.size() == 0) return 0.0;
    return (pi.table - pi_theta.table).cwiseAbs().rowwise().sum().maxCoeff();
}

Vector constraint_slacks(const Cmdp& cmdp, const ValueVector& values) {
    const int m = cmdp.n_constraints();
    return values.values.segment(1, m) - cmdp.thresholds;
}

double lagrangian(const Cmdp& cmdp, const ValueVector& values, const Vector& lambda) {
    if (lambda.size() != cmdp.n_constraints()) {
        throw DimensionError("multiplier vector length does not match the number of constraints");
    }
    return values[0] + lambda.dot(constraint_slacks(cmdp, values));
}

double lagrangian(const Cmdp& cmdp, const Policy& policy, const Vector& lambda, const Tolerances& tol) {
    if (lambda.size() != cmdp.n_constraints()) {
        throw DimensionError("multiplier vector length does not match the number of constraints");
    }
    return lagrangian(cmdp, policy_values(cmdp, policy, tol), lambda);
}

Policy policy_from_occupation(const OccupationMeasure& rho) {
    const Eigen::Index n_states = rho.rho.rows();
    const Eigen::Index n_actions = rho.rho.cols();
    const double floor = 1e-14 * std::max(1.0, rho.rho.sum());
    Policy out{Matrix::Constant(n_states, n_actions, 1.0 / static_cast<double>(n_actions))};
    for (Eigen::Index s = 0; s < n_states; ++s) {
        const double marginal = rho.rho.row(s).sum();
        if (marginal > floor) out.table.row(s) = rho.rho.row(s).cwiseMax(0.0) / rho.rho.row(s).cwiseMax(0.0).sum();
    }
    return out;
}

}  // namespace cmdp
