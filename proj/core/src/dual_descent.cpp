#include "cmdp/dual_descent.hpp"
#include "cmdp/lp.hpp"
#include "cmdp/policy_eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace cmdp {

std::string to_string(TraceStatus status) {
    return status == TraceStatus::Converged ? "Converged" : "CapReached";
}

std::vector<std::string> validate(const DualConfig& cfg) {
    std::vector<std::string> errors;
    if (!(cfg.eta > 0.0)) errors.emplace_back("eta must be positive");
    if (!(cfg.epsilon_stop > 0.0)) errors.emplace_back("epsilon_stop must be positive");
    if (cfg.k_max < 1) errors.emplace_back("k_max must be at least 1");
    if (cfg.lambda0.size() > 0 && cfg.lambda0.minCoeff() < 0.0) errors.emplace_back("lambda0 must be nonnegative");
    if (cfg.primal_mode == PrimalMode::PolicyGradient && !(cfg.pg.step_size > 0.0)) {
        errors.emplace_back("policy-gradient step size must be positive");
    }
    return errors;
}

Vector dual_step(const Vector& lambda, const Vector& slacks, double eta) {
    if (lambda.size() != slacks.size()) throw DimensionError("multipliers and slacks differ in length");
    return (lambda - eta * slacks).cwiseMax(0.0);
}

double iteration_bound(const Vector& lambda0, const Vector& lambda_star, double eta, double eps_acc) {
    if (!(eta > 0.0) || !(eps_acc > 0.0)) throw std::invalid_argument("eta and eps_acc must be positive");
    return (lambda0 - lambda_star).squaredNorm() / (2.0 * eta * eps_acc);
}

Neighborhood neighborhood_bounds(const RewardBounds& bounds, double gamma, double eta, double delta,
                                 double eps_acc, double eps_param, double lambda_eps_norm, double p_star) {
    Neighborhood out;
    if (eps_param == 0.0) {
        out.lower = p_star;
    } else if (!std::isfinite(lambda_eps_norm)) {
        out.lower = -std::numeric_limits<double>::infinity();
    } else {
        out.lower = p_star - (bounds.b_r0 + lambda_eps_norm * bounds.b_r) * eps_param / (1.0 - gamma);
    }
    out.upper = p_star + eta * bounds.b / 2.0 + delta + eps_acc;
    return out;
}

double neighborhood_alpha(double delta, double d_ref, double d_k, double eta, double b) {
    return 2.0 * (delta + d_ref - d_k) + eta * b;
}

double normalized_gap(double dual_value, double p_star) {
    return (dual_value - p_star) / std::max(1.0, std::abs(p_star));
}

double DualTrace::dual_estimate() const {
    return master ? std::min(best_dual_value, master->dual_value) : best_dual_value;
}

const Policy& DualTrace::primal_policy() const {
    if (master) return master->policy;
    if (best_feasible_policy) return *best_feasible_policy;
    return final_policy;
}

namespace {

struct Column {
    Policy policy;
    double v0 = 0.0;
    Vector slacks;
};

template <class DualAt>
std::optional<MasterSolution> solve_master(const Cmdp& cmdp, const std::vector<Column>& columns, DualAt dual_at,
                                           const Tolerances& tols) {
    const int n = static_cast<int>(columns.size());
    const int m = cmdp.n_constraints();
    LpProblem lp;
    lp.cost.resize(n);
    lp.a_eq = Matrix::Ones(1, n);
    lp.b_eq = Vector::Ones(1);
    lp.a_ineq.resize(m, n);
    lp.b_ineq = Vector::Zero(m);
    for (int j = 0; j < n; ++j) {
        lp.cost(j) = columns[j].v0;
        lp.a_ineq.col(j) = -columns[j].slacks;
    }
    LpSolution sol;
    try {
        sol = solve_lp(lp);
    } catch (const LpError&) {
        return std::nullopt;
    }
    if (sol.status != LpStatus::Optimal) return std::nullopt;

    MasterSolution out;
    out.lambda = sol.duals.cwiseMax(0.0);
    out.model_value = sol.objective;
    out.dual_value = dual_at(out.lambda);
    out.n_columns = n;
    OccupationMeasure mix{Matrix::Zero(cmdp.n_states, cmdp.n_actions), cmdp.gamma};
    for (int j = 0; j < n; ++j) {
        if (sol.x(j) > 0.0) mix.rho += sol.x(j) * occupation_measure(cmdp, columns[j].policy, tols).rho;
    }
    out.policy = policy_from_occupation(mix);
    return out;
}

}  // namespace

DualTrace dual_descent(const Cmdp& cmdp, const DualConfig& cfg, std::optional<double> p_star_oracle,
                       const Tolerances& tols) {
    require_valid(cmdp);
    const auto errors = validate(cfg);
    if (!errors.empty()) throw std::invalid_argument("invalid dual config: " + errors.front());
    const int m = cmdp.n_constraints();
    Vector lambda = cfg.lambda0.size() > 0 ? cfg.lambda0 : Vector::Zero(m);
    if (lambda.size() != m) throw DimensionError("lambda0 length does not match the number of constraints");

    const bool exact = cfg.primal_mode == PrimalMode::Exact;
    const StateAggregation agg = cfg.aggregation.value_or(StateAggregation::identity(cmdp.n_states));
    if (agg.n_states() != cmdp.n_states) throw DimensionError("aggregation does not match the model");
    SoftmaxPolicy theta = SoftmaxPolicy::zeros(agg, cmdp.n_actions);
    const double b = reward_bounds(cmdp).b;

    DualTrace trace;
    trace.p_star = p_star_oracle;
    double running_min = std::numeric_limits<double>::infinity();
    double best_feasible_v0 = -std::numeric_limits<double>::infinity();
    std::vector<Column> columns;

    for (int k = 0; k < cfg.k_max; ++k) {
        PrimalResult primal;
        try {
            if (exact) {
                primal = exact_lagrangian_max(cmdp, lambda, tols);
            } else {
                PgConfig pg = cfg.pg;
                pg.rng_seed = cfg.pg.rng_seed + 1000003ULL * static_cast<std::uint64_t>(k);
                primal = cfg.multistart ? in_class_lagrangian_max(cmdp, lambda, theta, pg, tols)
                                        : pg_lagrangian_max(cmdp, lambda, theta, pg, tols);
                theta = *primal.params;
            }
        } catch (const std::exception& e) {
            throw std::runtime_error("primal solve failed at dual iteration " + std::to_string(k) + ": " + e.what());
        }

        DualRecord rec;
        rec.k = k;
        rec.lambda = lambda;
        rec.dual_value = primal.dual_value;
        rec.slacks = primal.slacks;
        rec.delta_estimate = primal.delta_estimate;
        rec.v0 = primal.values[0];
        if (p_star_oracle) rec.gap = primal.dual_value - *p_star_oracle;
        trace.records.push_back(rec);

        if (primal.dual_value < running_min) {
            running_min = primal.dual_value;
            trace.best_index = k;
            trace.best_dual_value = primal.dual_value;
            trace.best_lambda = lambda;
        }
        const bool feasible = m == 0 || primal.slacks.minCoeff() >= -tols.identity;
        if (feasible && primal.values[0] > best_feasible_v0) {
            best_feasible_v0 = primal.values[0];
            trace.best_feasible_policy = primal.policy;
            trace.best_feasible_index = k;
        }
        if (m > 0) {
            const bool seen = std::any_of(columns.begin(), columns.end(),
                                          [&](const Column& c) { return c.policy.table == primal.policy.table; });
            if (!seen) columns.push_back({primal.policy, primal.values[0], primal.slacks});
        }
        trace.final_policy = primal.policy;
        trace.final_params = primal.params;
        trace.iterations = k + 1;

        const double d_ref = cfg.reference_dual.value_or(running_min);
        const double alpha = neighborhood_alpha(primal.delta_estimate, d_ref, primal.dual_value, cfg.eta, b);
        if (!trace.neighborhood_entry && alpha > -2.0 * cfg.epsilon_stop) {
            trace.neighborhood_entry = k;
            if (cfg.stop_at_neighborhood) {
                trace.status = TraceStatus::Converged;
                break;
            }
        }
        if (m == 0) {
            trace.status = TraceStatus::Converged;
            break;
        }
        const Vector next = dual_step(lambda, primal.slacks, cfg.eta);
        if (exact && next == lambda) {
            trace.status = TraceStatus::Converged;
            break;
        }
        lambda = next;
    }
    if (!columns.empty()) {
        auto dual_at = [&](const Vector& lam) {
            if (exact) return exact_lagrangian_max(cmdp, lam, tols).dual_value;
            return cfg.multistart ? in_class_lagrangian_max(cmdp, lam, theta, cfg.pg, tols).dual_value
                                  : pg_lagrangian_max(cmdp, lam, theta, cfg.pg, tols).dual_value;
        };
        trace.master = solve_master(cmdp, columns, dual_at, tols);
    }
    return trace;
}

void write_trace_csv(std::ostream& out, const DualTrace& trace, int m) {
    const auto flags = out.flags();
    const auto prec = out.precision();
    out << "k";
    for (int i = 0; i < m; ++i) out << ",lambda_" << i;
    out << ",dual_value";
    for (int i = 0; i < m; ++i) out << ",slack_" << i;
    out << ",delta_estimate,gap\n";
    out << std::setprecision(12);
    for (const auto& r : trace.records) {
        out << r.k;
        for (int i = 0; i < m; ++i) out << "," << r.lambda(i);
        out << "," << r.dual_value;
        for (int i = 0; i < m; ++i) out << "," << r.slacks(i);
        out << "," << r.delta_estimate << ",";
        if (r.gap) out << *r.gap; else out << "nan";
        out << "\n";
    }
    out.flags(flags);
    out.precision(prec);
}

}  // namespace cmdp
