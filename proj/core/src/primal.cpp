#include "cmdp/primal.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>
#include <string>

namespace cmdp {

bool StateAggregation::is_identity() const {
    if (n_clusters != n_states()) return false;
    std::vector<char> seen(n_clusters, 0);
    for (int c : cluster_of) {
        if (c < 0 || c >= n_clusters || seen[c]) return false;
        seen[c] = 1;
    }
    return true;
}

StateAggregation StateAggregation::identity(int n_states) {
    StateAggregation agg;
    agg.cluster_of.resize(n_states);
    for (int s = 0; s < n_states; ++s) agg.cluster_of[s] = s;
    agg.n_clusters = n_states;
    return agg;
}

StateAggregation StateAggregation::single(int n_states) {
    return StateAggregation{std::vector<int>(n_states, 0), 1};
}

StateAggregation StateAggregation::from_labels(const std::vector<int>& labels) {
    std::map<int, int> dense;
    StateAggregation agg;
    for (int label : labels) {
        auto [it, inserted] = dense.try_emplace(label, static_cast<int>(dense.size()));
        agg.cluster_of.push_back(it->second);
    }
    agg.n_clusters = static_cast<int>(dense.size());
    return agg;
}

std::vector<std::string> validate(const StateAggregation& agg) {
    std::vector<std::string> errors;
    if (agg.n_clusters <= 0) errors.emplace_back("aggregation needs at least one cluster");
    std::vector<int> count(std::max(agg.n_clusters, 0), 0);
    for (std::size_t s = 0; s < agg.cluster_of.size(); ++s) {
        const int c = agg.cluster_of[s];
        if (c < 0 || c >= agg.n_clusters) {
            errors.push_back("state " + std::to_string(s) + " maps outside [0, n_clusters)");
        } else {
            ++count[c];
        }
    }
    for (int c = 0; c < agg.n_clusters; ++c) {
        if (count[c] == 0) errors.push_back("cluster " + std::to_string(c) + " is empty");
    }
    return errors;
}

SoftmaxPolicy SoftmaxPolicy::zeros(const StateAggregation& agg, int n_actions) {
    return SoftmaxPolicy{Matrix::Zero(agg.n_clusters, n_actions), agg};
}

Policy induce_policy(const SoftmaxPolicy& sp) {
    const int n_states = sp.aggregation.n_states();
    const auto n_actions = sp.theta.cols();
    Matrix rows(sp.theta.rows(), n_actions);
    for (Eigen::Index c = 0; c < sp.theta.rows(); ++c) {
        const double top = sp.theta.row(c).maxCoeff();
        rows.row(c) = (sp.theta.row(c).array() - top).exp().matrix();
        rows.row(c) /= rows.row(c).sum();
    }
    Policy out{Matrix(n_states, n_actions)};
    for (int s = 0; s < n_states; ++s) out.table.row(s) = rows.row(sp.aggregation.cluster_of[s]);
    return out;
}

namespace {

// Q(s,a) for state values v.
Matrix backup(const Cmdp& cmdp, const Matrix& reward, const Vector& v) {
    const Vector next = cmdp.transition * v;
    Matrix q(cmdp.n_states, cmdp.n_actions);
    for (int s = 0; s < cmdp.n_states; ++s) {
        for (int a = 0; a < cmdp.n_actions; ++a) q(s, a) = reward(s, a) + cmdp.gamma * next(cmdp.pair(s, a));
    }
    return q;
}

// Lowest index within the tie window of the row maximum.
int tie_broken_argmax(const Eigen::Ref<const Eigen::RowVectorXd>& row, double tie) {
    const double top = row.maxCoeff();
    const double window = tie * std::max(1.0, std::abs(top));
    for (Eigen::Index a = 0; a < row.size(); ++a) {
        if (row(a) >= top - window) return static_cast<int>(a);
    }
    return 0;
}

void check_lambda(const Cmdp& cmdp, const Vector& lambda) {
    if (lambda.size() != cmdp.n_constraints()) {
        throw DimensionError("multiplier vector length does not match the number of constraints");
    }
    if (lambda.size() > 0 && lambda.minCoeff() < 0.0) {
        throw std::invalid_argument("multipliers must be nonnegative");
    }
}

void check_aggregation(const Cmdp& cmdp, const SoftmaxPolicy& sp) {
    if (sp.aggregation.n_states() != cmdp.n_states || sp.theta.rows() != sp.aggregation.n_clusters ||
        sp.theta.cols() != cmdp.n_actions) {
        throw DimensionError("softmax policy does not match the model");
    }
}

PrimalResult evaluate(const Cmdp& cmdp, const Policy& policy, const Vector& lambda, const Tolerances& tols) {
    PrimalResult out;
    out.policy = policy;
    out.values = policy_values(cmdp, policy, tols);
    out.slacks = constraint_slacks(cmdp, out.values);
    out.dual_value = lagrangian(cmdp, out.values, lambda);
    if (!std::isfinite(out.dual_value)) throw NumericalError("non-finite Lagrangian value");
    return out;
}

}  // namespace

ValueIterationResult value_iteration(const Cmdp& cmdp, const Matrix& reward, double tol, const Tolerances& tols) {
    if (reward.rows() != cmdp.n_states || reward.cols() != cmdp.n_actions) {
        throw DimensionError("reward table shape does not match the model");
    }
    ValueIterationResult out;
    Vector v = Vector::Zero(cmdp.n_states);
    // A few contraction sweeps give policy iteration a good starting greedy policy.
    for (int sweep = 0; sweep < 20; ++sweep) {
        v = backup(cmdp, reward, v).rowwise().maxCoeff();
        ++out.sweeps;
    }
    std::vector<int> actions(cmdp.n_states, 0);
    Matrix q = backup(cmdp, reward, v);
    for (int s = 0; s < cmdp.n_states; ++s) actions[s] = tie_broken_argmax(q.row(s), tols.tie);

    for (int round = 0; round < 10 * cmdp.n_states + 100; ++round) {
        const Policy pol = Policy::deterministic(actions, cmdp.n_actions);
        v = state_values(cmdp, pol, {reward}, tols).col(0);
        q = backup(cmdp, reward, v);
        bool changed = false;
        for (int s = 0; s < cmdp.n_states; ++s) {
            const double current = q(s, actions[s]);
            Eigen::Index best = 0;
            const double top = q.row(s).maxCoeff(&best);
            if (top > current + tols.tie * std::max(1.0, std::abs(current))) {
                actions[s] = static_cast<int>(best);
                changed = true;
            }
        }
        ++out.sweeps;
        if (!changed) break;
    }

    for (int s = 0; s < cmdp.n_states; ++s) actions[s] = tie_broken_argmax(q.row(s), tols.tie);
    out.greedy = Policy::deterministic(actions, cmdp.n_actions);
    out.actions = actions;
    out.values = state_values(cmdp, out.greedy, {reward}, tols).col(0);
    out.bellman_residual = (out.values - backup(cmdp, reward, out.values).rowwise().maxCoeff()).cwiseAbs().maxCoeff();
    // Policy iteration terminates at a fixed point; fall back to plain sweeps
    // if rounding left a residual above tol.
    for (int extra = 0; out.bellman_residual > tol && extra < 100000; ++extra) {
        out.values = backup(cmdp, reward, out.values).rowwise().maxCoeff();
        out.bellman_residual = (out.values - backup(cmdp, reward, out.values).rowwise().maxCoeff()).cwiseAbs().maxCoeff();
        ++out.sweeps;
    }
    return out;
}

PrimalResult exact_lagrangian_max(const Cmdp& cmdp, const Vector& lambda, const Tolerances& tols) {
    check_lambda(cmdp, lambda);
    const Matrix reward = scalarized_reward(cmdp, lambda);
    const auto vi = value_iteration(cmdp, reward, tols.bellman, tols);
    PrimalResult out = evaluate(cmdp, vi.greedy, lambda, tols);
    out.iterations = vi.sweeps;
    return out;
}

Matrix exact_policy_gradient(const Cmdp& cmdp, const SoftmaxPolicy& sp, const Vector& lambda, const Tolerances& tols) {
    check_aggregation(cmdp, sp);
    check_lambda(cmdp, lambda);
    const Policy pi = induce_policy(sp);
    const Matrix reward = scalarized_reward(cmdp, lambda);
    const Matrix q = action_values(cmdp, pi, reward, tols);
    const Vector d = state_occupancy(cmdp, pi, tols);
    Matrix grad = Matrix::Zero(sp.theta.rows(), sp.theta.cols());
    const double scale = 1.0 / (1.0 - cmdp.gamma);
    for (int s = 0; s < cmdp.n_states; ++s) {
        if (d(s) == 0.0) continue;
        const double v = pi.table.row(s).dot(q.row(s));
        const int c = sp.aggregation.cluster_of[s];
        for (int b = 0; b < cmdp.n_actions; ++b) {
            grad(c, b) += scale * d(s) * pi.table(s, b) * (q(s, b) - v);
        }
    }
    return grad;
}

int reinforce_horizon(const Cmdp& cmdp, const Vector& lambda, const PgConfig& cfg) {
    if (cfg.mc_horizon > 0) return cfg.mc_horizon;
    const double bound = scalarized_reward(cmdp, lambda).cwiseAbs().maxCoeff();
    if (bound <= 0.0) return 1;
    const double tol = std::max(cfg.grad_tol, 1e-12);
    const double h = std::log(tol * (1.0 - cmdp.gamma) / bound) / std::log(cmdp.gamma);
    return std::max(1, static_cast<int>(std::ceil(h)));
}

Matrix sampled_policy_gradient(const Cmdp& cmdp, const SoftmaxPolicy& sp, const Vector& lambda, const PgConfig& cfg) {
    check_aggregation(cmdp, sp);
    check_lambda(cmdp, lambda);
    const Policy pi = induce_policy(sp);
    const Matrix reward = scalarized_reward(cmdp, lambda);
    const int horizon = reinforce_horizon(cmdp, lambda, cfg);
    Matrix grad = Matrix::Zero(sp.theta.rows(), sp.theta.cols());

    auto sample = [](const auto& weights, double u) {
        double acc = 0.0;
        const Eigen::Index n = weights.size();
        for (Eigen::Index j = 0; j < n; ++j) {
            acc += weights(j);
            if (u < acc) return static_cast<int>(j);
        }
        return static_cast<int>(n - 1);
    };

    std::vector<int> states(horizon);
    std::vector<int> actions(horizon);
    std::vector<double> rewards(horizon);
    const int episodes = std::max(1, cfg.mc_episodes);
    for (int ep = 0; ep < episodes; ++ep) {
        std::seed_seq seq{static_cast<std::uint32_t>(cfg.rng_seed), static_cast<std::uint32_t>(cfg.rng_seed >> 32),
                          static_cast<std::uint32_t>(ep)};
        std::mt19937_64 rng(seq);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        int s = sample(cmdp.initial_dist, unif(rng));
        for (int t = 0; t < horizon; ++t) {
            const int a = sample(pi.table.row(s), unif(rng));
            states[t] = s;
            actions[t] = a;
            rewards[t] = reward(s, a);
            s = sample(cmdp.transition.row(cmdp.pair(s, a)), unif(rng));
        }
        double to_go = 0.0;
        double discount = std::pow(cmdp.gamma, horizon - 1);
        for (int t = horizon - 1; t >= 0; --t) {
            to_go = rewards[t] + cmdp.gamma * to_go;
            const int c = sp.aggregation.cluster_of[states[t]];
            const double w = discount * to_go;
            for (int b = 0; b < cmdp.n_actions; ++b) {
                grad(c, b) += w * ((b == actions[t] ? 1.0 : 0.0) - pi.table(states[t], b));
            }
            discount /= cmdp.gamma;
        }
    }
    return grad / static_cast<double>(episodes);
}

PrimalResult pg_lagrangian_max(const Cmdp& cmdp, const Vector& lambda, const SoftmaxPolicy& theta0,
                               const PgConfig& cfg, const Tolerances& tols) {
    check_aggregation(cmdp, theta0);
    check_lambda(cmdp, lambda);
    if (!(cfg.step_size > 0.0)) throw std::invalid_argument("policy-gradient step size must be positive");

    SoftmaxPolicy sp = theta0;
    PrimalResult current = evaluate(cmdp, induce_policy(sp), lambda, tols);
    int it = 0;
    for (; it < cfg.max_iters; ++it) {
        Matrix grad;
        if (cfg.mode == PgMode::Exact) {
            grad = exact_policy_gradient(cmdp, sp, lambda, tols);
        } else {
            PgConfig call = cfg;
            call.rng_seed = cfg.rng_seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(it);
            grad = sampled_policy_gradient(cmdp, sp, lambda, call);
        }
        if (cfg.mode == PgMode::Exact && grad.cwiseAbs().maxCoeff() <= cfg.grad_tol) break;

        double step = cfg.step_size;
        if (cfg.mode == PgMode::MonteCarlo) {
            sp.theta += step * grad;
            current = evaluate(cmdp, induce_policy(sp), lambda, tols);
            continue;
        }
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving, step *= 0.5) {
            SoftmaxPolicy trial{sp.theta + step * grad, sp.aggregation};
            PrimalResult candidate = evaluate(cmdp, induce_policy(trial), lambda, tols);
            if (candidate.dual_value >= current.dual_value) {
                sp = std::move(trial);
                current = std::move(candidate);
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    current.params = sp;
    current.iterations = it;
    current.delta_estimate = exact_lagrangian_max(cmdp, lambda, tols).dual_value - current.dual_value;
    return current;
}

PrimalResult in_class_lagrangian_max(const Cmdp& cmdp, const Vector& lambda, const SoftmaxPolicy& warm,
                                     const PgConfig& cfg, const Tolerances& tols) {
    const PrimalResult exact = exact_lagrangian_max(cmdp, lambda, tols);
    const double attain = tols.identity * std::max(1.0, std::abs(exact.dual_value));

    const SoftmaxPolicy fitted = fit_aggregated_policy(exact.policy, warm.aggregation).first;
    PrimalResult best = pg_lagrangian_max(cmdp, lambda, fitted, cfg, tols);
    if (best.dual_value >= exact.dual_value - attain) return best;

    PrimalResult from_warm = pg_lagrangian_max(cmdp, lambda, warm, cfg, tols);
    if (from_warm.dual_value > best.dual_value) best = std::move(from_warm);
    return best;
}

std::pair<SoftmaxPolicy, double> fit_aggregated_policy(const Policy& target, const StateAggregation& agg) {
    if (agg.n_states() != target.n_states()) throw DimensionError("aggregation does not match the policy");
    const auto errors = validate(agg);
    if (!errors.empty()) throw std::invalid_argument("invalid aggregation: " + errors.front());

    Matrix mean = Matrix::Zero(agg.n_clusters, target.n_actions());
    std::vector<int> count(agg.n_clusters, 0);
    for (int s = 0; s < target.n_states(); ++s) {
        mean.row(agg.cluster_of[s]) += target.table.row(s);
        ++count[agg.cluster_of[s]];
    }
    for (int c = 0; c < agg.n_clusters; ++c) mean.row(c) /= count[c];

    SoftmaxPolicy sp{mean.cwiseMax(kLogitFloor).array().log().matrix(), agg};
    const double epsilon = policy_tv_epsilon(target, induce_policy(sp));
    return {std::move(sp), epsilon};
}

}  // namespace cmdp
