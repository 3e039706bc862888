#include "fixtures.hpp"
#include "oracles.hpp"

#include "cmdp/certificates.hpp"
#include "cmdp/lp.hpp"
#include "cmdp/occupancy_lp.hpp"
#include "cmdp/primal.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace cmdp;

namespace {

LpProblem one_var(double eq_rhs) {
    LpProblem lp;
    lp.cost = Vector::Ones(1);
    lp.a_eq = Matrix::Ones(1, 1);
    lp.b_eq = Vector::Constant(1, eq_rhs);
    lp.a_ineq = Matrix(0, 1);
    lp.b_ineq = Vector(0);
    return lp;
}

// Best vertex of {x >= 0, A x <= b} found by solving every n x n system of
// active constraints.
double vertex_enumeration(const Matrix& a, const Vector& b, const Vector& cost) {
    const int n = static_cast<int>(cost.size());
    const int rows = static_cast<int>(b.size());
    Matrix all(rows + n, n);
    all << a, -Matrix::Identity(n, n);
    Vector rhs(rows + n);
    rhs << b, Vector::Zero(n);
    const int total = rows + n;
    double best = -INFINITY;
    for (int mask = 0; mask < (1 << total); ++mask) {
        if (__builtin_popcount(static_cast<unsigned>(mask)) != n) continue;
        Matrix sub(n, n);
        Vector sub_rhs(n);
        int r = 0;
        for (int i = 0; i < total; ++i) {
            if (mask & (1 << i)) {
                sub.row(r) = all.row(i);
                sub_rhs(r++) = rhs(i);
            }
        }
        Eigen::FullPivLU<Matrix> lu(sub);
        if (lu.rank() < n) continue;
        const Vector x = lu.solve(sub_rhs);
        if ((all * x - rhs).maxCoeff() > 1e-9) continue;
        best = std::max(best, cost.dot(x));
    }
    return best;
}

}  // namespace

TEST_SUITE("lp-oracle") {

TEST_CASE("single equality") {
    const LpSolution sol = solve_lp(one_var(1.0));
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.x(0) == doctest::Approx(1.0));
    CHECK(sol.objective == doctest::Approx(1.0));
}

TEST_CASE("equality and conflicting inequality is infeasible") {
    LpProblem lp = one_var(1.0);
    lp.a_ineq = Matrix::Ones(1, 1);
    lp.b_ineq = Vector::Zero(1);
    CHECK(solve_lp(lp).status == LpStatus::Infeasible);
}

TEST_CASE("unbounded and dimension errors") {
    LpProblem lp;
    lp.cost = Vector::Ones(2);
    lp.a_eq = Matrix(0, 2);
    lp.b_eq = Vector(0);
    lp.a_ineq = Matrix(1, 2);
    lp.a_ineq << 1.0, -1.0;
    lp.b_ineq = Vector::Ones(1);
    CHECK(solve_lp(lp).status == LpStatus::Unbounded);
    lp.a_ineq = Matrix::Ones(1, 3);
    CHECK_THROWS_AS(solve_lp(lp), DimensionError);
}

TEST_CASE("two-variable LP with known duals") {
    // max 3x + 2y  s.t. x + y <= 4, x + 3y <= 6, x <= 3
    LpProblem lp;
    lp.cost = Vector(2);
    lp.cost << 3.0, 2.0;
    lp.a_eq = Matrix(0, 2);
    lp.b_eq = Vector(0);
    lp.a_ineq = Matrix(3, 2);
    lp.a_ineq << 1, 1, 1, 3, 1, 0;
    lp.b_ineq = Vector(3);
    lp.b_ineq << 4, 6, 3;
    const LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.x(0) == doctest::Approx(3.0));
    CHECK(sol.x(1) == doctest::Approx(1.0));
    CHECK(sol.objective == doctest::Approx(11.0));
    CHECK(sol.duals(0) == doctest::Approx(2.0));
    CHECK(sol.duals(1) == doctest::Approx(0.0));
    CHECK(sol.duals(2) == doctest::Approx(1.0));
    CHECK(sol.primal_residual <= 1e-8);
    CHECK(sol.complementarity_residual <= 1e-8);
}

TEST_CASE("random bounded LPs against vertex enumeration") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 3, rows = 3;
        Matrix a(rows, n);
        Vector b(rows), c(n);
        for (int i = 0; i < rows; ++i) {
            b(i) = u(rng) * 5.0;
            for (int j = 0; j < n; ++j) a(i, j) = u(rng);
        }
        for (int j = 0; j < n; ++j) c(j) = u(rng) * 2.0 - 0.5;
        LpProblem lp{c, Matrix(0, n), Vector(0), a, b};
        const LpSolution sol = solve_lp(lp);
        REQUIRE(sol.status == LpStatus::Optimal);
        CHECK(sol.objective == doctest::Approx(vertex_enumeration(a, b, c)).epsilon(1e-9));
        CHECK(sol.duals.minCoeff() >= -1e-12);
        // Strong duality for max c'x, Ax <= b: b'y = c'x.
        CHECK(b.dot(sol.duals) == doctest::Approx(sol.objective).epsilon(1e-9));
    }
}

TEST_CASE("degenerate vertex is solved and flagged") {
    // Three constraints meet at (1, 1).
    LpProblem lp;
    lp.cost = Vector::Ones(2);
    lp.a_eq = Matrix(0, 2);
    lp.b_eq = Vector(0);
    lp.a_ineq = Matrix(3, 2);
    lp.a_ineq << 1, 0, 0, 1, 1, 1;
    lp.b_ineq = Vector(3);
    lp.b_ineq << 1, 1, 2;
    const LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(2.0));
    CHECK(sol.degenerate);
}

TEST_CASE("iteration cap raises") {
    LpProblem lp;
    lp.cost = Vector::Ones(3);
    lp.a_eq = Matrix(0, 3);
    lp.b_eq = Vector(0);
    lp.a_ineq = Matrix::Identity(3, 3);
    lp.b_ineq = Vector::Ones(3);
    LpOptions opts;
    opts.max_iterations = 1;
    CHECK_THROWS_AS(solve_lp(lp, opts), LpError);
}

TEST_CASE("text dump") {
    std::ostringstream out;
    write_lp_text(out, one_var(1.0));
    CHECK(out.str() == "maximize 1\n1\nequalities 1\n1 | 1\ninequalities 0\n");
}

TEST_CASE("occupancy LP shape") {
    const Cmdp c = random_cmdp(1, 4, 3, 2);
    const LpProblem lp = build_occupancy_lp(c, Perturbation::zero(2));
    CHECK(lp.n_vars() == 12);
    CHECK(lp.n_eq() == 4);
    CHECK(lp.n_ineq() == 2);
    CHECK_THROWS_AS(build_occupancy_lp(c, Perturbation::zero(1)), DimensionError);

    const LpProblem free = build_occupancy_lp(fixture::drop_constraints(c), Perturbation::zero(0));
    CHECK(free.n_ineq() == 0);
}

TEST_CASE("one state one action forces unit mass") {
    const Cmdp c = fixture::one_state({{2.0}}, 0.9);
    const PrimalOptimum opt = primal_optimum(c);
    REQUIRE(opt.status == LpStatus::Optimal);
    CHECK(opt.rho.rho(0, 0) == doctest::Approx(1.0));
    CHECK(opt.p_star == doctest::Approx(20.0));
}

TEST_CASE("flow constraints reproduce the two-state chain occupancy") {
    const Cmdp c = fixture::chain2(0.5);
    const PrimalOptimum opt = primal_optimum(c);
    REQUIRE(opt.status == LpStatus::Optimal);
    CHECK(opt.rho.rho(0, 0) == doctest::Approx(0.5));
    CHECK(opt.rho.rho(1, 0) == doctest::Approx(0.5));
    CHECK(opt.p_star == doctest::Approx(1.0));
}

TEST_CASE("unconstrained optimum matches enumeration and value iteration") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Cmdp c = fixture::drop_constraints(random_cmdp(seed, 4, 2, 1));
        const auto table = oracle::enumerate_values(c);
        double best = -INFINITY;
        for (const auto& d : table) best = std::max(best, d.values[0]);
        const PrimalOptimum opt = primal_optimum(c);
        CHECK(opt.p_star == doctest::Approx(best).epsilon(1e-9));
        const ValueIterationResult vi = value_iteration(c, c.rewards[0]);
        CHECK(std::abs(opt.p_star - c.initial_dist.dot(vi.values)) <= 1e-7);
    }
}

TEST_CASE("single-constraint optimum matches the two-policy mixture oracle") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Cmdp c = random_cmdp(seed, 4, 2, 1);
        const PrimalOptimum opt = primal_optimum(c);
        REQUIRE(opt.status == LpStatus::Optimal);
        CHECK(opt.p_star == doctest::Approx(oracle::brute_force_p_star_m1(c, oracle::enumerate_values(c))).epsilon(1e-8));
    }
}

TEST_CASE("recovered policy is feasible and attains P*") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Cmdp c = random_cmdp(seed, 5, 3, 2);
        const PrimalOptimum opt = primal_optimum(c);
        REQUIRE(opt.status == LpStatus::Optimal);
        const ValueVector v = policy_values(c, opt.policy);
        CHECK(v[0] == doctest::Approx(opt.p_star).epsilon(1e-8));
        CHECK(constraint_slacks(c, v).minCoeff() >= -1e-7);
        CHECK(opt.lambda.minCoeff() >= 0.0);
    }
}

TEST_CASE("P* bounds every sampled feasible policy") {
    const Cmdp c = random_cmdp(2, 5, 3, 1);
    const double p_star = primal_optimum(c).p_star;
    std::mt19937_64 rng(8);
    int feasible = 0;
    for (int t = 0; t < 1000; ++t) {
        const Policy pi = fixture::random_policy(rng, 5, 3);
        const ValueVector v = policy_values(c, pi);
        if (constraint_slacks(c, v).minCoeff() < -1e-7) continue;
        ++feasible;
        CHECK(v[0] <= p_star + 1e-9);
    }
    CHECK(feasible > 0);
}

TEST_CASE("perturbation function") {
    const Cmdp c = random_cmdp(4, 5, 3, 2);
    const RewardBounds rb = reward_bounds(c);
    const double span = rb.b_r / (1.0 - c.gamma);

    SUBCASE("very negative shifts give the unconstrained optimum") {
        const auto p = perturbation_value(c, {Vector::Constant(2, -2.0 * span - 1.0)});
        REQUIRE(p);
        CHECK(*p == doctest::Approx(primal_optimum(fixture::drop_constraints(c)).p_star).epsilon(1e-9));
    }
    SUBCASE("unreachable thresholds are infeasible") {
        Vector xi = Vector::Zero(2);
        xi(0) = span - c.thresholds(0) + 1.0;
        CHECK_FALSE(perturbation_value(c, {xi}));
        CHECK(primal_optimum([&] { Cmdp d = c; d.thresholds(0) += span + 1.0; return d; }()).status ==
              LpStatus::Infeasible);
    }
    SUBCASE("zero shift is P*") {
        CHECK(*perturbation_value(c, Perturbation::zero(2)) == doctest::Approx(primal_optimum(c).p_star));
    }
    SUBCASE("nonincreasing along each coordinate") {
        for (int i = 0; i < 2; ++i) {
            double prev = INFINITY;
            for (double t = -1.0; t <= 0.3; t += 0.1) {
                Vector xi = Vector::Zero(2);
                xi(i) = t;
                const auto p = perturbation_value(c, {xi});
                if (!p) break;
                CHECK(*p <= prev + 1e-7);
                prev = *p;
            }
        }
    }
}

TEST_CASE("concavity probes") {
    const Cmdp c = random_cmdp(0, 5, 3, 2);
    const Perturbation a{Vector::Constant(2, -0.2)};
    CHECK(concavity_probe(c, a, a, 0.5) == doctest::Approx(0.0).epsilon(1e-12));
    const Perturbation huge{Vector::Constant(2, 1e3)};
    CHECK(concavity_probe(c, a, huge, 0.5) == INFINITY);

    // Probes drawn below the thresholds so both endpoints stay feasible.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 0.0);
    for (int t = 0; t < 200; ++t) {
        Perturbation x1{Vector(2)}, x2{Vector(2)};
        for (int i = 0; i < 2; ++i) {
            x1.xi(i) = u(rng);
            x2.xi(i) = u(rng);
        }
        const double mu = 0.25 * (1 + t % 3);
        const double margin = concavity_probe(c, x1, x2, mu);
        CHECK(std::isfinite(margin));
        CHECK(margin >= -1e-7);
    }
}

}  // TEST_SUITE
