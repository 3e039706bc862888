#pragma once

#include "cmdp/cmdp.hpp"
#include "cmdp/policy_eval.hpp"
#include "cmdp/tolerances.hpp"

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace cmdp {

/// Maps every state to a cluster; a softmax policy shares one logit row per cluster.
struct StateAggregation {
    std::vector<int> cluster_of;
    int n_clusters = 0;

    int n_states() const { return static_cast<int>(cluster_of.size()); }
    bool is_identity() const;

    static StateAggregation identity(int n_states);
    static StateAggregation single(int n_states);
    /// Renumbers arbitrary labels densely in order of first appearance.
    static StateAggregation from_labels(const std::vector<int>& labels);
};

/// Empty when every state is mapped and cluster indices are dense in [0, n_clusters).
std::vector<std::string> validate(const StateAggregation& agg);

struct SoftmaxPolicy {
    Matrix theta;  // n_clusters x n_actions logits
    StateAggregation aggregation;

    static SoftmaxPolicy zeros(const StateAggregation& agg, int n_actions);
};

Policy induce_policy(const SoftmaxPolicy& sp);

struct ValueIterationResult {
    Vector values;
    Policy greedy;
    std::vector<int> actions;
    double bellman_residual = 0.0;
    int sweeps = 0;
};

/// Optimal values for `reward` and the greedy policy (lowest action index on ties).
/// Bellman sweeps are polished by exact policy evaluation/improvement, so the
/// returned values are those of the returned greedy policy.
ValueIterationResult value_iteration(const Cmdp& cmdp, const Matrix& reward, double tol = 1e-10,
                                     const Tolerances& tols = kDefaultTolerances);

struct PrimalResult {
    Policy policy;
    std::optional<SoftmaxPolicy> params;
    ValueVector values;
    Vector slacks;
    double dual_value = 0.0;      // L(policy, lambda)
    double delta_estimate = 0.0;  // d(lambda) - dual_value, when the exact oracle ran
    int iterations = 0;
};

/// d(lambda) via value iteration on r_lambda.
PrimalResult exact_lagrangian_max(const Cmdp& cmdp, const Vector& lambda,
                                  const Tolerances& tols = kDefaultTolerances);

enum class PgMode { Exact, MonteCarlo };

struct PgConfig {
    double step_size = 1.0;
    int max_iters = 1000;
    double grad_tol = 1e-8;
    PgMode mode = PgMode::Exact;
    int mc_episodes = 64;
    int mc_horizon = 0;  // 0: derived from grad_tol, gamma and the reward bound
    std::uint64_t rng_seed = 0;
};

/// Gradient of L(pi_theta, lambda) with respect to the logits, from the
/// policy-gradient theorem with exact occupancy and action values.
Matrix exact_policy_gradient(const Cmdp& cmdp, const SoftmaxPolicy& sp, const Vector& lambda,
                             const Tolerances& tols = kDefaultTolerances);

/// REINFORCE estimate with discounted return-to-go; every episode owns a seeded stream.
Matrix sampled_policy_gradient(const Cmdp& cmdp, const SoftmaxPolicy& sp, const Vector& lambda,
                               const PgConfig& cfg);

int reinforce_horizon(const Cmdp& cmdp, const Vector& lambda, const PgConfig& cfg);

/// Gradient ascent on the logits. Exact mode halves the step until the
/// Lagrangian does not decrease; MonteCarlo mode uses the fixed step.
PrimalResult pg_lagrangian_max(const Cmdp& cmdp, const Vector& lambda, const SoftmaxPolicy& theta0,
                               const PgConfig& cfg, const Tolerances& tols = kDefaultTolerances);

/// Best of policy-gradient runs from the warm start and from the aggregated fit
/// of the exact maximiser. Stops early when the class attains d(lambda).
PrimalResult in_class_lagrangian_max(const Cmdp& cmdp, const Vector& lambda, const SoftmaxPolicy& warm,
                                     const PgConfig& cfg, const Tolerances& tols = kDefaultTolerances);

inline constexpr double kLogitFloor = 1e-12;

/// Cluster rows are the mean of the target rows; epsilon is the per-state TV
/// error of the induced policy against the target.
std::pair<SoftmaxPolicy, double> fit_aggregated_policy(const Policy& target, const StateAggregation& agg);

}  // namespace cmdp
