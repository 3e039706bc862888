#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace cmdp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thrown on mismatched shapes between models, policies and multipliers.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a dense solve cannot certify its residual.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Finite constrained MDP.
 *
 * Transitions are stored as one row per state-action pair: row
 * `s * n_actions + a` holds P(. | s, a). Reward table 0 is the objective,
 * tables 1..m are the constrained rewards with V_i >= thresholds[i-1].
 */
struct Cmdp {
    int n_states = 0;
    int n_actions = 0;
    Matrix transition;
    Vector initial_dist;
    std::vector<Matrix> rewards;
    Vector thresholds;
    double gamma = 0.9;

    int n_constraints() const { return static_cast<int>(thresholds.size()); }
    int pair(int s, int a) const { return s * n_actions + a; }
    int n_pairs() const { return n_states * n_actions; }
};

/// Tabular stochastic policy, n_states x n_actions, rows on the simplex.
struct Policy {
    Matrix table;

    int n_states() const { return static_cast<int>(table.rows()); }
    int n_actions() const { return static_cast<int>(table.cols()); }

    static Policy uniform(int n_states, int n_actions);
    static Policy deterministic(const std::vector<int>& actions, int n_actions);
};

struct Violation {
    std::string what;
    int s = -1;
    int a = -1;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    std::string to_string() const;
};

ValidationReport validate(const Cmdp& cmdp);
ValidationReport validate(const Policy& policy, int n_states, int n_actions);

/// Throws std::invalid_argument listing the first violations when invalid.
void require_valid(const Cmdp& cmdp);

/// r_lambda = r_0 + sum_i lambda_i r_i.
Matrix scalarized_reward(const Cmdp& cmdp, const Vector& lambda);

struct RewardBounds {
    double b_r0 = 0.0;
    double b_r = 0.0;  // max over the constrained rewards
    double b = 0.0;    // sum_i (B_ri / (1 - gamma) - c_i)^2
    std::vector<double> per_reward;
};

RewardBounds reward_bounds(const Cmdp& cmdp);

}  // namespace cmdp
