#include "cmdp/lp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <vector>

namespace cmdp {

std::string to_string(LpStatus status) {
    switch (status) {
        case LpStatus::Optimal: return "Optimal";
        case LpStatus::Infeasible: return "Infeasible";
        case LpStatus::Unbounded: return "Unbounded";
    }
    return "Unknown";
}

namespace {

// Standard form  A x = b, b >= 0, x >= 0  with columns
// [original | inequality slacks | artificials].
struct StandardForm {
    Matrix a;
    Vector b;
    Vector sign;  // row multiplier applied to make b >= 0
    int n_orig = 0;
    int n_struct = 0;  // original + slacks
    int n_cols = 0;    // + artificials
};

StandardForm to_standard_form(const LpProblem& lp) {
    StandardForm sf;
    const int n = lp.n_vars();
    const int me = lp.n_eq();
    const int mi = lp.n_ineq();
    const int rows = me + mi;
    sf.n_orig = n;
    sf.n_struct = n + mi;
    sf.n_cols = sf.n_struct + rows;
    sf.a = Matrix::Zero(rows, sf.n_cols);
    sf.b = Vector::Zero(rows);
    sf.sign = Vector::Ones(rows);
    if (me > 0) {
        sf.a.block(0, 0, me, n) = lp.a_eq;
        sf.b.head(me) = lp.b_eq;
    }
    if (mi > 0) {
        sf.a.block(me, 0, mi, n) = lp.a_ineq;
        sf.a.block(me, n, mi, mi).setIdentity();
        sf.b.tail(mi) = lp.b_ineq;
    }
    for (int i = 0; i < rows; ++i) {
        if (sf.b(i) < 0.0) {
            sf.a.row(i) *= -1.0;
            sf.b(i) *= -1.0;
            sf.sign(i) = -1.0;
        }
        sf.a(i, sf.n_struct + i) = 1.0;
    }
    return sf;
}

class Tableau {
public:
    Tableau(const StandardForm& sf, double pivot_tol) : sf_(sf), pivot_tol_(pivot_tol) {}

    // Rebuilds B^{-1}[A | b] from the current basis.
    void refactor(const std::vector<int>& basis) {
        basis_ = basis;
        const Eigen::Index rows = sf_.a.rows();
        Matrix bmat(rows, rows);
        for (Eigen::Index i = 0; i < rows; ++i) bmat.col(i) = sf_.a.col(basis_[i]);
        Matrix aug(rows, sf_.n_cols + 1);
        aug.leftCols(sf_.n_cols) = sf_.a;
        aug.col(sf_.n_cols) = sf_.b;
        t_ = bmat.partialPivLu().solve(aug);
    }

    // Maximises cost over the tableau; columns >= allowed_cols never enter.
    // Returns false when unbounded.
    bool optimize(const Vector& cost, int allowed_cols, int& iterations, int max_iterations) {
        const Eigen::Index rows = t_.rows();
        const int rhs = sf_.n_cols;
        Vector reduced(sf_.n_cols);
        auto recompute = [&] {
            for (int j = 0; j < sf_.n_cols; ++j) {
                double z = 0.0;
                for (Eigen::Index i = 0; i < rows; ++i) z += cost(basis_[i]) * t_(i, j);
                reduced(j) = cost(j) - z;
            }
        };
        recompute();
        while (true) {
            int enter = -1;
            for (int j = 0; j < allowed_cols; ++j) {
                if (reduced(j) > pivot_tol_) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return true;
            if (++iterations > max_iterations) {
                throw LpError("simplex iteration cap of " + std::to_string(max_iterations) + " exceeded");
            }
            int leave = -1;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < rows; ++i) {
                const double coef = t_(i, enter);
                if (coef <= pivot_tol_) continue;
                const double ratio = std::max(0.0, t_(i, rhs)) / coef;
                if (ratio < best_ratio - 1e-12 ||
                    (std::abs(ratio - best_ratio) <= 1e-12 && basis_[i] < basis_[leave])) {
                    best_ratio = ratio;
                    leave = static_cast<int>(i);
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
            const double factor = reduced(enter);
            reduced -= factor * t_.row(leave).head(sf_.n_cols).transpose();
        }
    }

    void pivot(int row, int col) {
        t_.row(row) /= t_(row, col);
        for (Eigen::Index i = 0; i < t_.rows(); ++i) {
            if (i == row) continue;
            const double f = t_(i, col);
            if (f != 0.0) t_.row(i) -= f * t_.row(row);
        }
        basis_[row] = col;
    }

    // Pivots basic artificials onto structural columns where possible.
    void expel_artificials() {
        for (Eigen::Index i = 0; i < t_.rows(); ++i) {
            if (basis_[i] < sf_.n_struct) continue;
            Eigen::Index best = -1;
            double best_abs = pivot_tol_;
            for (int j = 0; j < sf_.n_struct; ++j) {
                if (std::find(basis_.begin(), basis_.end(), j) != basis_.end()) continue;
                if (std::abs(t_(i, j)) > best_abs) {
                    best_abs = std::abs(t_(i, j));
                    best = j;
                }
            }
            if (best >= 0) pivot(static_cast<int>(i), static_cast<int>(best));
        }
    }

    const std::vector<int>& basis() const { return basis_; }
    double rhs(Eigen::Index i) const { return t_(i, sf_.n_cols); }

private:
    const StandardForm& sf_;
    double pivot_tol_;
    Matrix t_;
    std::vector<int> basis_;
};

double max_abs_or_zero(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

LpSolution solve_lp(const LpProblem& lp, const LpOptions& options) {
    const int n = lp.n_vars();
    const int me = lp.n_eq();
    const int mi = lp.n_ineq();
    if (lp.a_eq.rows() != me || (me > 0 && lp.a_eq.cols() != n) || lp.a_ineq.rows() != mi ||
        (mi > 0 && lp.a_ineq.cols() != n)) {
        throw DimensionError("LP constraint blocks do not match the number of variables");
    }
    const StandardForm sf = to_standard_form(lp);
    const int rows = me + mi;
    const int cap = options.max_iterations > 0 ? options.max_iterations : 50 * (n + rows);

    LpSolution sol;
    if (rows == 0) {
        if (n > 0 && lp.cost.maxCoeff() > 0.0) {
            sol.status = LpStatus::Unbounded;
            return sol;
        }
        sol.status = LpStatus::Optimal;
        sol.x = Vector::Zero(n);
        sol.duals_eq = Vector::Zero(0);
        sol.duals = Vector::Zero(0);
        return sol;
    }
    Tableau tab(sf, options.pivot_tol);
    std::vector<int> basis(rows);
    for (int i = 0; i < rows; ++i) basis[i] = sf.n_struct + i;
    tab.refactor(basis);

    Vector phase_one_cost = Vector::Zero(sf.n_cols);
    phase_one_cost.tail(rows).setConstant(-1.0);
    tab.optimize(phase_one_cost, sf.n_struct, sol.iterations, cap);

    double artificial_mass = 0.0;
    for (int i = 0; i < rows; ++i) {
        if (tab.basis()[i] >= sf.n_struct) artificial_mass += std::max(0.0, tab.rhs(i));
    }
    sol.phase_one_objective = artificial_mass;
    if (artificial_mass > options.infeasible_tol) {
        sol.status = LpStatus::Infeasible;
        return sol;
    }
    tab.expel_artificials();

    Vector cost = Vector::Zero(sf.n_cols);
    cost.head(n) = lp.cost;
    // Refactor and re-optimise until the fresh basis is dual feasible.
    for (int round = 0; round < 4; ++round) {
        if (!tab.optimize(cost, sf.n_struct, sol.iterations, cap)) {
            sol.status = LpStatus::Unbounded;
            return sol;
        }
        std::vector<int> b = tab.basis();
        tab.refactor(b);
        Matrix bmat(rows, rows);
        for (int i = 0; i < rows; ++i) bmat.col(i) = sf.a.col(b[i]);
        Vector cb(rows);
        for (int i = 0; i < rows; ++i) cb(i) = cost(b[i]);
        const Vector y = bmat.transpose().partialPivLu().solve(cb);
        const Vector reduced = cost.head(sf.n_struct) - sf.a.leftCols(sf.n_struct).transpose() * y;
        if (reduced.maxCoeff() <= options.pivot_tol || round == 3) {
            const Vector xb = bmat.partialPivLu().solve(sf.b);
            Vector xs = Vector::Zero(sf.n_cols);
            for (int i = 0; i < rows; ++i) {
                xs(b[i]) = xb(i);
                if (std::abs(xb(i)) <= options.pivot_tol) sol.degenerate = true;
            }
            sol.x = xs.head(n).cwiseMax(0.0);
            const Vector y_orig = y.cwiseProduct(sf.sign);
            sol.duals_eq = y_orig.head(me);
            sol.duals = y_orig.tail(mi);
            break;
        }
    }

    sol.status = LpStatus::Optimal;
    sol.objective = lp.cost.dot(sol.x);

    double primal = 0.0;
    if (me > 0) primal = std::max(primal, max_abs_or_zero(lp.a_eq * sol.x - lp.b_eq));
    Vector ineq_slack = Vector::Zero(mi);
    if (mi > 0) {
        ineq_slack = lp.b_ineq - lp.a_ineq * sol.x;
        primal = std::max(primal, (-ineq_slack).cwiseMax(0.0).maxCoeff());
    }
    sol.primal_residual = primal;

    Vector dual_price = Vector::Zero(n);
    if (me > 0) dual_price += lp.a_eq.transpose() * sol.duals_eq;
    if (mi > 0) dual_price += lp.a_ineq.transpose() * sol.duals;
    const Vector reduced = lp.cost - dual_price;
    double comp = n > 0 ? sol.x.cwiseProduct(reduced).cwiseAbs().maxCoeff() : 0.0;
    if (mi > 0) {
        comp = std::max(comp, sol.duals.cwiseProduct(ineq_slack).cwiseAbs().maxCoeff());
        comp = std::max(comp, (-sol.duals).cwiseMax(0.0).maxCoeff());
    }
    if (n > 0) comp = std::max(comp, reduced.cwiseMax(0.0).maxCoeff());
    sol.complementarity_residual = comp;

    if (sol.primal_residual > options.residual_tol || sol.complementarity_residual > options.residual_tol) {
        throw LpError("optimal basis fails certification: primal residual " +
                      std::to_string(sol.primal_residual) + ", complementarity residual " +
                      std::to_string(sol.complementarity_residual));
    }
    return sol;
}

void write_lp_text(std::ostream& out, const LpProblem& lp) {
    const auto flags = out.flags();
    const auto prec = out.precision();
    out << std::setprecision(17);
    auto write_row = [&](const auto& row, const double* rhs) {
        for (Eigen::Index j = 0; j < row.size(); ++j) out << (j ? " " : "") << row(j);
        if (rhs) out << " | " << *rhs;
        out << "\n";
    };
    out << "maximize " << lp.n_vars() << "\n";
    write_row(lp.cost, nullptr);
    out << "equalities " << lp.n_eq() << "\n";
    for (int i = 0; i < lp.n_eq(); ++i) write_row(lp.a_eq.row(i), &lp.b_eq(i));
    out << "inequalities " << lp.n_ineq() << "\n";
    for (int i = 0; i < lp.n_ineq(); ++i) write_row(lp.a_ineq.row(i), &lp.b_ineq(i));
    out.flags(flags);
    out.precision(prec);
}

}  // namespace cmdp
