#include "cmdp/cmdp.hpp"
#include "cmdp/tolerances.hpp"

#include <cmath>
#include <sstream>

namespace cmdp {

Policy Policy::uniform(int n_states, int n_actions) {
    return Policy{Matrix::Constant(n_states, n_actions, 1.0 / n_actions)};
}

Policy Policy::deterministic(const std::vector<int>& actions, int n_actions) {
    Policy p{Matrix::Zero(static_cast<Eigen::Index>(actions.size()), n_actions)};
    for (std::size_t s = 0; s < actions.size(); ++s) {
        p.table(static_cast<Eigen::Index>(s), actions[s]) = 1.0;
    }
    return p;
}

std::string ValidationReport::to_string() const {
    std::ostringstream out;
    for (const auto& v : violations) {
        out << v.what;
        if (v.s >= 0) {
            out << " (s=" << v.s;
            if (v.a >= 0) out << ",a=" << v.a;
            out << ")";
        }
        out << "\n";
    }
    return out.str();
}

namespace {

void check_distribution(const Eigen::Ref<const Vector>& row, double tol, const std::string& name,
                        int s, int a, std::vector<Violation>& out) {
    bool negative = false;
    bool finite = true;
    for (Eigen::Index j = 0; j < row.size(); ++j) {
        if (!std::isfinite(row(j))) finite = false;
        else if (row(j) < 0.0) negative = true;
    }
    if (!finite) {
        out.push_back({name + " has non-finite entries", s, a});
        return;
    }
    if (negative) out.push_back({name + " has negative entries", s, a});
    const double sum = row.sum();
    if (std::abs(sum - 1.0) > tol) {
        std::ostringstream msg;
        msg.precision(15);
        msg << name << " sums to " << sum << ", expected 1";
        out.push_back({msg.str(), s, a});
    }
}

}  // namespace

ValidationReport validate(const Cmdp& c) {
    ValidationReport report;
    auto& out = report.violations;
    const double tol = kDefaultTolerances.probability_sum;

    if (c.n_states <= 0) out.push_back({"n_states must be positive"});
    if (c.n_actions <= 0) out.push_back({"n_actions must be positive"});
    if (!(c.gamma > 0.0 && c.gamma < 1.0)) {
        std::ostringstream msg;
        msg << "discount gamma=" << c.gamma << " outside (0,1)";
        out.push_back({msg.str()});
    }
    if (!out.empty() && (c.n_states <= 0 || c.n_actions <= 0)) return report;

    if (c.transition.rows() != c.n_pairs() || c.transition.cols() != c.n_states) {
        out.push_back({"transition must be (n_states*n_actions) x n_states"});
    } else {
        for (int s = 0; s < c.n_states; ++s) {
            for (int a = 0; a < c.n_actions; ++a) {
                check_distribution(c.transition.row(c.pair(s, a)).transpose(), tol,
                                   "transition row", s, a, out);
            }
        }
    }

    if (c.initial_dist.size() != c.n_states) {
        out.push_back({"p0 must have n_states entries"});
    } else {
        check_distribution(c.initial_dist, tol, "p0", -1, -1, out);
    }

    if (c.rewards.empty()) {
        out.push_back({"at least the objective reward table r_0 is required"});
    } else if (static_cast<int>(c.rewards.size()) != c.n_constraints() + 1) {
        out.push_back({"rewards must hold m+1 tables for m thresholds"});
    }
    for (std::size_t i = 0; i < c.rewards.size(); ++i) {
        const auto& r = c.rewards[i];
        if (r.rows() != c.n_states || r.cols() != c.n_actions) {
            out.push_back({"reward table " + std::to_string(i) + " has wrong shape"});
            continue;
        }
        for (int s = 0; s < c.n_states; ++s) {
            for (int a = 0; a < c.n_actions; ++a) {
                if (!std::isfinite(r(s, a))) {
                    out.push_back({"reward table " + std::to_string(i) + " is not finite", s, a});
                }
            }
        }
    }
    for (int i = 0; i < c.n_constraints(); ++i) {
        if (!std::isfinite(c.thresholds(i))) {
            out.push_back({"threshold c_" + std::to_string(i + 1) + " is not finite"});
        }
    }
    return report;
}

ValidationReport validate(const Policy& policy, int n_states, int n_actions) {
    ValidationReport report;
    if (policy.n_states() != n_states || policy.n_actions() != n_actions) {
        report.violations.push_back({"policy shape does not match the model"});
        return report;
    }
    for (int s = 0; s < n_states; ++s) {
        check_distribution(policy.table.row(s).transpose(), kDefaultTolerances.probability_sum,
                           "policy row", s, -1, report.violations);
    }
    return report;
}

void require_valid(const Cmdp& cmdp) {
    const auto report = validate(cmdp);
    if (!report.ok()) {
        throw std::invalid_argument("invalid CMDP:\n" + report.to_string());
    }
}

Matrix scalarized_reward(const Cmdp& cmdp, const Vector& lambda) {
    if (lambda.size() != cmdp.n_constraints()) {
        throw DimensionError("multiplier vector has " + std::to_string(lambda.size()) +
                             " entries, model has " + std::to_string(cmdp.n_constraints()) +
                             " constraints");
    }
    Matrix r = cmdp.rewards.at(0);
    for (int i = 0; i < cmdp.n_constraints(); ++i) {
        r += lambda(i) * cmdp.rewards[i + 1];
    }
    return r;
}

RewardBounds reward_bounds(const Cmdp& cmdp) {
    RewardBounds out;
    for (const auto& r : cmdp.rewards) {
        out.per_reward.push_back(r.size() == 0 ? 0.0 : r.cwiseAbs().maxCoeff());
    }
    out.b_r0 = out.per_reward.empty() ? 0.0 : out.per_reward[0];
    for (int i = 0; i < cmdp.n_constraints(); ++i) {
        const double bri = out.per_reward[i + 1];
        out.b_r = std::max(out.b_r, bri);
        const double term = bri / (1.0 - cmdp.gamma) - cmdp.thresholds(i);
        out.b += term * term;
    }
    return out;
}

}  // namespace cmdp
