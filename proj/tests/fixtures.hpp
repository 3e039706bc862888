#pragma once

#include "cmdp/cmdp.hpp"

#include <random>

namespace fixture {

using cmdp::Cmdp;
using cmdp::Matrix;
using cmdp::Policy;
using cmdp::Vector;

/// One state with a self-loop per action; rewards[i] lists r_i per action.
inline Cmdp one_state(const std::vector<std::vector<double>>& rewards, double gamma, const std::vector<double>& c = {}) {
    Cmdp m;
    m.n_states = 1;
    m.n_actions = static_cast<int>(rewards.front().size());
    m.gamma = gamma;
    m.transition = Matrix::Ones(m.n_actions, 1);
    m.initial_dist = Vector::Ones(1);
    for (const auto& r : rewards) {
        Matrix t(1, m.n_actions);
        for (int a = 0; a < m.n_actions; ++a) t(0, a) = r[a];
        m.rewards.push_back(t);
    }
    m.thresholds = Vector::Zero(static_cast<int>(c.size()));
    for (std::size_t i = 0; i < c.size(); ++i) m.thresholds(static_cast<int>(i)) = c[i];
    return m;
}

/// 0 -> 1 -> 1, one action, r_0 = (0, 1), p0 = delta_0.
inline Cmdp chain2(double gamma) {
    Cmdp m;
    m.n_states = 2;
    m.n_actions = 1;
    m.gamma = gamma;
    m.transition = Matrix::Zero(2, 2);
    m.transition(0, 1) = 1.0;
    m.transition(1, 1) = 1.0;
    m.initial_dist = Vector::Zero(2);
    m.initial_dist(0) = 1.0;
    Matrix r(2, 1);
    r << 0.0, 1.0;
    m.rewards.push_back(r);
    m.thresholds = Vector::Zero(0);
    return m;
}

/// Unconstrained copy (m = 0).
inline Cmdp drop_constraints(Cmdp m) {
    m.rewards.resize(1);
    m.thresholds = Vector::Zero(0);
    return m;
}

inline Vector random_simplex(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = u(rng) + 1e-3;
    return v / v.sum();
}

inline Policy random_policy(std::mt19937_64& rng, int n_states, int n_actions) {
    Policy p{Matrix(n_states, n_actions)};
    for (int s = 0; s < n_states; ++s) p.table.row(s) = random_simplex(rng, n_actions).transpose();
    return p;
}

inline Matrix random_logits(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) m(i, j) = n(rng);
    }
    return m;
}

}  // namespace fixture
