#pragma once

// Independent reference computations used by the unit tests. Nothing here
// calls the library's solvers: values come from truncated sums, enumeration
// of deterministic policies or finite differences.

#include "cmdp/cmdp.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using cmdp::Cmdp;
using cmdp::Matrix;
using cmdp::Policy;
using cmdp::Vector;

/// Horizon after which gamma^t drops below `tail`.
inline int horizon_for(double gamma, double tail = 1e-13) {
    return static_cast<int>(std::ceil(std::log(tail) / std::log(gamma))) + 1;
}

/// (1-gamma) sum_t gamma^t Pr(s_t = s, a_t = a), summed to `horizon` steps.
inline Matrix truncated_occupation(const Cmdp& c, const Policy& pi, int horizon) {
    Matrix rho = Matrix::Zero(c.n_states, c.n_actions);
    std::vector<double> mu(c.initial_dist.data(), c.initial_dist.data() + c.n_states);
    double weight = 1.0 - c.gamma;
    for (int t = 0; t < horizon; ++t) {
        std::vector<double> next(c.n_states, 0.0);
        for (int s = 0; s < c.n_states; ++s) {
            for (int a = 0; a < c.n_actions; ++a) {
                const double p = mu[s] * pi.table(s, a);
                rho(s, a) += weight * p;
                for (int s2 = 0; s2 < c.n_states; ++s2) next[s2] += p * c.transition(s * c.n_actions + a, s2);
            }
        }
        mu = next;
        weight *= c.gamma;
    }
    return rho;
}

/// Expected discounted return of reward table `r`, summed to `horizon` steps.
inline double truncated_value(const Cmdp& c, const Policy& pi, const Matrix& r, int horizon) {
    const Matrix rho = truncated_occupation(c, pi, horizon);
    double v = 0.0;
    for (int s = 0; s < c.n_states; ++s) {
        for (int a = 0; a < c.n_actions; ++a) v += rho(s, a) * r(s, a);
    }
    return v / (1.0 - c.gamma);
}

inline std::vector<double> truncated_values(const Cmdp& c, const Policy& pi) {
    std::vector<double> out;
    const int h = horizon_for(c.gamma);
    for (const auto& r : c.rewards) out.push_back(truncated_value(c, pi, r, h));
    return out;
}

/// Calls fn for each of the n_actions^n_states deterministic policies.
inline void for_each_deterministic(int n_states, int n_actions, const std::function<void(const Policy&)>& fn) {
    std::vector<int> choice(n_states, 0);
    while (true) {
        Policy p{Matrix::Zero(n_states, n_actions)};
        for (int s = 0; s < n_states; ++s) p.table(s, choice[s]) = 1.0;
        fn(p);
        int s = 0;
        while (s < n_states && ++choice[s] == n_actions) choice[s++] = 0;
        if (s == n_states) break;
    }
}

struct DeterministicValue {
    Policy policy;
    std::vector<double> values;
};

inline std::vector<DeterministicValue> enumerate_values(const Cmdp& c) {
    std::vector<DeterministicValue> out;
    for_each_deterministic(c.n_states, c.n_actions, [&](const Policy& p) { out.push_back({p, truncated_values(c, p)}); });
    return out;
}

/// max over deterministic policies of V_0 + sum lambda_i (V_i - c_i).
inline double brute_force_dual(const Cmdp& c, const std::vector<DeterministicValue>& table, const Vector& lambda) {
    double best = -INFINITY;
    for (const auto& d : table) {
        double l = d.values[0];
        for (int i = 0; i < c.n_constraints(); ++i) l += lambda(i) * (d.values[i + 1] - c.thresholds(i));
        best = std::max(best, l);
    }
    return best;
}

/// Single-constraint optimum: the occupancy polytope's vertices are the
/// deterministic policies, so the optimum mixes at most two of them.
inline double brute_force_p_star_m1(const Cmdp& c, const std::vector<DeterministicValue>& table) {
    const double thr = c.thresholds(0);
    double best = -INFINITY;
    for (const auto& a : table) {
        if (a.values[1] >= thr) best = std::max(best, a.values[0]);
        for (const auto& b : table) {
            // mu a + (1-mu) b with the constraint active.
            const double da = a.values[1] - thr, db = b.values[1] - thr;
            if (da >= 0.0 && db < 0.0) {
                const double mu = -db / (da - db);
                best = std::max(best, mu * a.values[0] + (1.0 - mu) * b.values[0]);
            }
        }
    }
    return best;
}

/// Central difference of f along the (row, col) logit.
inline double central_difference(const std::function<double(const Matrix&)>& f, const Matrix& x, int row, int col,
                                 double h = 1e-5) {
    Matrix up = x, down = x;
    up(row, col) += h;
    down(row, col) -= h;
    return (f(up) - f(down)) / (2.0 * h);
}

}  // namespace oracle
