#pragma once

#include "cmdp/cmdp.hpp"
#include "cmdp/tolerances.hpp"

namespace cmdp {

/// Normalised discounted state-action visitation of a policy.
struct OccupationMeasure {
    Matrix rho;  // n_states x n_actions, sums to 1
    double gamma = 0.9;

    Vector state_marginal() const { return rho.rowwise().sum(); }
};

/// (V_0, ..., V_m) from the initial distribution.
struct ValueVector {
    Vector values;

    double operator[](int i) const { return values(i); }
    int size() const { return static_cast<int>(values.size()); }
};

/// P_pi(s, s') = sum_a pi(a|s) P(s'|s,a).
Matrix transition_under(const Cmdp& cmdp, const Policy& policy);

/// Per-state values: column i solves (I - gamma P_pi) v = r_pi for reward table i.
Matrix state_values(const Cmdp& cmdp, const Policy& policy, const std::vector<Matrix>& rewards,
                    const Tolerances& tol = kDefaultTolerances);

/// Q(s,a) = r(s,a) + gamma sum_s' P(s'|s,a) v(s') for the policy's own values.
Matrix action_values(const Cmdp& cmdp, const Policy& policy, const Matrix& reward,
                     const Tolerances& tol = kDefaultTolerances);

ValueVector policy_values(const Cmdp& cmdp, const Policy& policy,
                          const Tolerances& tol = kDefaultTolerances);

/// Discounted state distribution d = (1-gamma) p0 + gamma P_pi^T d.
Vector state_occupancy(const Cmdp& cmdp, const Policy& policy,
                       const Tolerances& tol = kDefaultTolerances);

OccupationMeasure occupation_measure(const Cmdp& cmdp, const Policy& policy,
                                     const Tolerances& tol = kDefaultTolerances);

/// (1 / (1-gamma)) sum_{s,a} r(s,a) rho(s,a).
double value_from_occupation(const OccupationMeasure& rho, const Matrix& reward);

/// L1 distance sum |rho1 - rho2| (not halved).
double tv_distance(const OccupationMeasure& rho1, const OccupationMeasure& rho2);

/// max_s sum_a |pi(a|s) - pi_theta(a|s)|.
double policy_tv_epsilon(const Policy& pi, const Policy& pi_theta);

/// V_0 + sum_i lambda_i (V_i - c_i).
double lagrangian(const Cmdp& cmdp, const Policy& policy, const Vector& lambda,
                  const Tolerances& tol = kDefaultTolerances);
double lagrangian(const Cmdp& cmdp, const ValueVector& values, const Vector& lambda);

/// Slacks V_i - c_i, i = 1..m.
Vector constraint_slacks(const Cmdp& cmdp, const ValueVector& values);

/// pi(a|s) = rho(s,a) / sum_a rho(s,a); states with zero marginal get a uniform row.
Policy policy_from_occupation(const OccupationMeasure& rho);

}  // namespace cmdp
