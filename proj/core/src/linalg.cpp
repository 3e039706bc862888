#include "cmdp/linalg.hpp"

#include <algorithm>
#include <string>

namespace cmdp {

namespace {

double scaled_residual(const Matrix& a, const Matrix& x, const Matrix& b) {
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    return (a * x - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

Matrix solve_certified(const Matrix& a, const Matrix& b, double tol) {
    if (a.rows() != a.cols() || a.rows() != b.rows()) {
        throw DimensionError("solve_certified: incompatible shapes");
    }
    if (b.size() == 0) return Matrix::Zero(a.cols(), b.cols());
    const Eigen::PartialPivLU<Matrix> lu(a);
    Matrix x = lu.solve(b);
    double res = scaled_residual(a, x, b);
    for (int round = 0; round < 2 && res > tol; ++round) {
        x += lu.solve(b - a * x);
        res = scaled_residual(a, x, b);
    }
    if (!(res <= tol)) {
        throw NumericalError("linear solve residual " + std::to_string(res) + " exceeds tolerance");
    }
    return x;
}

}  // namespace cmdp
