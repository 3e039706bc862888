#include "fixtures.hpp"
#include "oracles.hpp"

#include "cmdp/certificates.hpp"
#include "cmdp/policy_eval.hpp"

#include <doctest.h>

using namespace cmdp;

TEST_SUITE("policy-eval") {

TEST_CASE("geometric series and zero rewards") {
    const Cmdp one = fixture::one_state({{1.0}}, 0.9);
    CHECK(policy_values(one, Policy::uniform(1, 1))[0] == doctest::Approx(10.0).epsilon(1e-12));

    const Cmdp zero = fixture::one_state({{0.0, 0.0}, {0.0, 0.0}}, 0.7, {0.0});
    const ValueVector v = policy_values(zero, Policy::uniform(1, 2));
    CHECK(v[0] == 0.0);
    CHECK(v[1] == 0.0);
}

TEST_CASE("two-state chain against truncated sums") {
    const Cmdp chain = fixture::chain2(0.5);
    const Policy pi = Policy::uniform(2, 1);
    CHECK(policy_values(chain, pi)[0] == doctest::Approx(1.0).epsilon(1e-12));
    const Vector d = state_occupancy(chain, pi);
    CHECK(d(0) == doctest::Approx(0.5));
    CHECK(d(1) == doctest::Approx(0.5));
    const Matrix rho = oracle::truncated_occupation(chain, pi, 60);
    CHECK((occupation_measure(chain, pi).rho - rho).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("one state one action has unit occupation") {
    const Cmdp one = fixture::one_state({{3.0}}, 0.8);
    CHECK(occupation_measure(one, Policy::uniform(1, 1)).rho(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("values and occupation match truncated sums on random models") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Cmdp c = random_cmdp(seed, 4, 3, 2);
        const Policy pi = random_policy(seed + 100, 4, 3);
        const ValueVector v = policy_values(c, pi);
        const auto ref = oracle::truncated_values(c, pi);
        for (int i = 0; i < 3; ++i) CHECK(v[i] == doctest::Approx(ref[i]).epsilon(1e-10));
        const Matrix rho = oracle::truncated_occupation(c, pi, oracle::horizon_for(c.gamma));
        CHECK((occupation_measure(c, pi).rho - rho).cwiseAbs().maxCoeff() <= 1e-11);
        CHECK(occupation_measure(c, pi).rho.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("value from occupation") {
    const Cmdp c = random_cmdp(4, 4, 2, 1);
    const OccupationMeasure rho = occupation_measure(c, Policy::uniform(4, 2));
    CHECK(value_from_occupation(rho, Matrix::Zero(4, 2)) == 0.0);
    CHECK(value_from_occupation(rho, Matrix::Ones(4, 2)) == doctest::Approx(1.0 / (1.0 - c.gamma)));
    CHECK_THROWS_AS(value_from_occupation(rho, Matrix::Ones(3, 2)), DimensionError);
    for (int i = 0; i < 2; ++i) {
        CHECK(value_from_occupation(rho, c.rewards[i]) ==
              doctest::Approx(policy_values(c, Policy::uniform(4, 2))[i]).epsilon(1e-12));
    }
}

TEST_CASE("policy TV epsilon and occupation TV") {
    Policy a = Policy::deterministic({0, 1, 2}, 4);
    CHECK(policy_tv_epsilon(a, a) == 0.0);
    Policy b = Policy::deterministic({0, 1, 3}, 4);
    CHECK(policy_tv_epsilon(a, b) == doctest::Approx(2.0));
    Policy u = Policy::uniform(3, 4);
    CHECK(policy_tv_epsilon(u, a) == doctest::Approx(1.5));

    OccupationMeasure r1{Matrix::Zero(2, 1), 0.9}, r2{Matrix::Zero(2, 1), 0.9};
    r1.rho(0, 0) = 1.0;
    r2.rho(1, 0) = 1.0;
    CHECK(tv_distance(r1, r1) == 0.0);
    CHECK(tv_distance(r1, r2) == doctest::Approx(2.0));
}

TEST_CASE("occupancy perturbation bound on random policy pairs") {
    std::mt19937_64 rng(11);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Cmdp c = random_cmdp(seed, 5, 3, 1, 0.05, 0.95);
        const Policy p = fixture::random_policy(rng, 5, 3);
        Policy q = p;
        q.table.row(seed % 5) = fixture::random_simplex(rng, 3).transpose();
        const double eps = policy_tv_epsilon(p, q);
        const double tv = tv_distance(occupation_measure(c, p), occupation_measure(c, q));
        CHECK(tv <= eps / (1.0 - c.gamma) + 1e-9);
    }
}

TEST_CASE("lagrangian") {
    const Cmdp c = random_cmdp(2, 3, 2, 2);
    const Policy pi = random_policy(5, 3, 2);
    const ValueVector v = policy_values(c, pi);
    CHECK(lagrangian(c, pi, Vector::Zero(2)) == doctest::Approx(v[0]));
    Vector lambda(2);
    lambda << 1.0, 2.0;
    const double expected = v[0] + 1.0 * (v[1] - c.thresholds(0)) + 2.0 * (v[2] - c.thresholds(1));
    CHECK(lagrangian(c, pi, lambda) == doctest::Approx(expected).epsilon(1e-13));
    CHECK_THROWS_AS(lagrangian(c, pi, Vector::Zero(3)), DimensionError);

    SUBCASE("zero slacks make the multipliers irrelevant") {
        Cmdp tight = c;
        tight.thresholds << v[1], v[2];
        CHECK(lagrangian(tight, pi, lambda) == doctest::Approx(v[0]).epsilon(1e-12));
    }

    SUBCASE("affine along a line of multipliers") {
        Vector l0(2), dir(2);
        l0 << 0.3, 0.1;
        dir << 0.5, 1.5;
        const double f0 = lagrangian(c, pi, l0);
        const double f1 = lagrangian(c, pi, l0 + dir);
        const double f2 = lagrangian(c, pi, l0 + 2.0 * dir);
        CHECK(std::abs(f2 - 2.0 * f1 + f0) <= 1e-12);
    }
}

TEST_CASE("policy from occupation") {
    SUBCASE("uniform measure gives the uniform policy") {
        OccupationMeasure rho{Matrix::Constant(3, 2, 1.0 / 6.0), 0.9};
        CHECK(policy_from_occupation(rho).table.isApprox(Policy::uniform(3, 2).table));
    }
    SUBCASE("zero marginal gives a uniform row") {
        OccupationMeasure rho{Matrix::Zero(2, 3), 0.9};
        rho.rho(0, 1) = 1.0;
        const Policy p = policy_from_occupation(rho);
        CHECK(p.table(0, 1) == 1.0);
        CHECK(p.table.row(1).isApprox(Eigen::RowVector3d::Constant(1.0 / 3.0)));
    }
    SUBCASE("deterministic round trip on a three-state chain") {
        Cmdp c;
        c.n_states = 3;
        c.n_actions = 2;
        c.gamma = 0.8;
        c.transition = Matrix::Zero(6, 3);
        // action 0 advances, action 1 stays
        for (int s = 0; s < 3; ++s) {
            c.transition(c.pair(s, 0), std::min(s + 1, 2)) = 1.0;
            c.transition(c.pair(s, 1), s) = 1.0;
        }
        c.initial_dist = Vector::Zero(3);
        c.initial_dist(0) = 1.0;
        c.rewards = {Matrix::Zero(3, 2)};
        c.thresholds = Vector::Zero(0);
        const Policy det = Policy::deterministic({0, 0, 1}, 2);
        const Policy back = policy_from_occupation(occupation_measure(c, det));
        CHECK(back.table.isApprox(det.table));
    }
    SUBCASE("mixtures of measures round trip") {
        const Cmdp c = random_cmdp(9, 5, 3, 1);
        const OccupationMeasure r1 = occupation_measure(c, random_policy(1, 5, 3));
        const OccupationMeasure r2 = occupation_measure(c, Policy::deterministic({0, 2, 1, 1, 0}, 3));
        for (double mu : {0.25, 0.5, 0.75}) {
            OccupationMeasure mix{mu * r1.rho + (1.0 - mu) * r2.rho, c.gamma};
            const OccupationMeasure again = occupation_measure(c, policy_from_occupation(mix));
            CHECK((again.rho - mix.rho).cwiseAbs().maxCoeff() <= 1e-8);
        }
    }
}

TEST_CASE("dimension mismatches are rejected") {
    const Cmdp c = random_cmdp(0, 3, 2, 1);
    CHECK_THROWS_AS(policy_values(c, Policy::uniform(4, 2)), DimensionError);
    CHECK_THROWS_AS(policy_tv_epsilon(Policy::uniform(3, 2), Policy::uniform(3, 3)), DimensionError);
}

}  // TEST_SUITE
