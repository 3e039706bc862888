#pragma once

#include "cmdp/cmdp.hpp"
#include "cmdp/primal.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cmdp {

enum class PrimalMode { Exact, PolicyGradient };

struct DualConfig {
    double eta = 0.1;
    int k_max = 1000;
    double epsilon_stop = 1e-3;  // accuracy of the neighbourhood test
    PrimalMode primal_mode = PrimalMode::Exact;
    PgConfig pg;
    std::optional<StateAggregation> aggregation;  // identity when unset
    bool multistart = false;                      // in-class maximiser instead of a single PG run
    Vector lambda0;                               // zeros when empty
    // Stop at the first iterate passing the neighbourhood test instead of
    // only recording it.
    bool stop_at_neighborhood = false;
    // Minimum dual value used by the neighbourhood test; the running minimum
    // of the iterates when unset.
    std::optional<double> reference_dual;
};

std::vector<std::string> validate(const DualConfig& cfg);

struct DualRecord {
    int k = 0;
    Vector lambda;
    double dual_value = 0.0;
    Vector slacks;
    double delta_estimate = 0.0;
    std::optional<double> gap;  // dual_value - P*
    double v0 = 0.0;            // objective value of the primal iterate
};

enum class TraceStatus { Converged, CapReached };

/**
 * Best feasible mixture of the distinct primal iterates.
 *
 * The master LP maximises V_0 over convex combinations of the visited
 * policies subject to the mixed slacks being nonnegative. Its inequality
 * duals minimise the cutting-plane model of d built from the same iterates.
 */
struct MasterSolution {
    Vector lambda;             // model minimiser
    double model_value = 0.0;  // mixture value; a lower bound on D*
    double dual_value = 0.0;   // primal-mode dual value at lambda; an upper bound on D* in exact mode
    Policy policy;             // stationary policy with the mixture's occupation measure
    int n_columns = 0;
};

std::string to_string(TraceStatus status);

struct DualTrace {
    std::vector<DualRecord> records;
    TraceStatus status = TraceStatus::CapReached;
    int iterations = 0;  // K when Converged
    std::optional<int> neighborhood_entry;
    std::optional<double> p_star;

    int best_index = 0;  // argmin of dual_value
    double best_dual_value = 0.0;
    Vector best_lambda;

    Policy final_policy;
    std::optional<SoftmaxPolicy> final_params;
    // Highest-V_0 primal iterate with all slacks >= -feasibility_tol, if any.
    std::optional<Policy> best_feasible_policy;
    std::optional<int> best_feasible_index;

    // At least one constraint and a feasible mixture of the iterates.
    std::optional<MasterSolution> master;

    /// min(best iterate, d at the master multipliers).
    double dual_estimate() const;
    /// Master mixture, else the best feasible iterate, else the last iterate.
    const Policy& primal_policy() const;
};

/// [lambda - eta * slacks]_+ componentwise.
Vector dual_step(const Vector& lambda, const Vector& slacks, double eta);

/**
 * Projected dual subgradient descent.
 *
 * Each iteration maximises the Lagrangian at lambda_k (exactly, or with
 * softmax policy gradient warm-started from the previous logits) and steps
 * the multipliers against the constraint slacks of the new primal iterate.
 * Exact mode also stops at a multiplier fixed point.
 */
DualTrace dual_descent(const Cmdp& cmdp, const DualConfig& cfg, std::optional<double> p_star_oracle = std::nullopt,
                       const Tolerances& tols = kDefaultTolerances);

/// ||lambda0 - lambda_star||^2 / (2 eta eps_acc).
double iteration_bound(const Vector& lambda0, const Vector& lambda_star, double eta, double eps_acc);

struct Neighborhood {
    double lower = 0.0;
    double upper = 0.0;
};

/// lower = P* - (B_r0 + ||lambda_eps||_1 B_r) eps / (1-gamma);
/// upper = P* + eta B / 2 + delta + eps_acc. An infinite multiplier norm
/// (infeasible perturbed problem) gives lower = -infinity.
Neighborhood neighborhood_bounds(const RewardBounds& bounds, double gamma, double eta, double delta,
                                 double eps_acc, double eps_param, double lambda_eps_norm, double p_star);

/// 2 (delta + d_ref - d_k) + eta B; the iterate is in the neighbourhood when this exceeds -2 eps.
double neighborhood_alpha(double delta, double d_ref, double d_k, double eta, double b);

/// Header k, lambda_*, dual_value, slack_*, delta_estimate, gap; 12 significant digits.
void write_trace_csv(std::ostream& out, const DualTrace& trace, int m);

/// Normalised gap (d - P*) / max(1, |P*|).
double normalized_gap(double dual_value, double p_star);

}  // namespace cmdp
